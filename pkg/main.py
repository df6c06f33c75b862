import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np
from pydantic import ValidationError

from core.control import track
from core.diffdrive import drive_base
from core.errors import ConfigError, DivergedError, InvalidArgumentError
from core.grid_planner import astar, compare_heuristics, load_map, path_header, time_parameterize
from core.ik import bench_ik, solve_pinv, solve_race, solve_sqp_ss
from core.kinematics import end_effector, end_effector_twist
from core.monitor import TaskMonitor
from core import plotting
from core.simulator import run_scenario
from core.trajectory import (
    peak_acceleration,
    peak_velocity,
    plan_joint_trajectory,
    sample_trajectory,
    trajectory_header,
    trajectory_rows,
)
from core.utils import dump_json, format_validation_error, load_model, parse_floats, write_csv
from models.base import BASE_LOG_HEADER, BaseGains, BaseParams, BaseState
from models.chain import DynamicModel, KinematicChain
from models.config import RunConfig
from models.control import PidGains
from models.geometry import RigidTransform
from models.grid import Connectivity, HeuristicKind
from models.ik import ExecutionMode, IkRequest
from models.robot import RobotDescription

logger = logging.getLogger("mobimanip")

EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2

SOLVERS = {"race": solve_race, "pinv": solve_pinv, "sqp_ss": solve_sqp_ss}


def parse_config(args) -> RunConfig:
    try:
        return RunConfig(
            robot=getattr(args, "robot", None),
            map=getattr(args, "map", None),
            scenario=getattr(args, "scenario", None),
            out_dir=getattr(args, "out", None) or Path("out"),
            seed=getattr(args, "seed", None) or 0,
            emit_svg=getattr(args, "svg", False),
        )
    except ValidationError as exc:
        raise ConfigError(format_validation_error(exc), "arguments") from exc


def load_robot(config: RunConfig) -> RobotDescription:
    if config.robot is None:
        raise ConfigError("--robot is required", "arguments")
    return load_model(config.robot, RobotDescription)


def resolve_joints(robot: RobotDescription, text: str) -> np.ndarray:
    """A named pose from the robot file or a comma-separated joint vector."""
    if text in robot.poses:
        return np.array(robot.poses[text], dtype=float)
    return np.array(parse_floats(text), dtype=float)


def emit(data) -> None:
    print(dump_json(data))


def cmd_fk(args) -> int:
    robot = load_robot(parse_config(args))
    chain = KinematicChain.from_description(robot)
    q = resolve_joints(robot, args.q)
    out = end_effector(chain, q).to_dict()
    if args.qdot:
        out["twist"] = end_effector_twist(chain, q, parse_floats(args.qdot)).to_dict()
    emit(out)
    return EXIT_OK


def cmd_ik(args) -> int:
    config = parse_config(args)
    robot = load_robot(config)
    chain = KinematicChain.from_description(robot)
    seed = resolve_joints(robot, args.seed_q) if args.seed_q else np.clip(np.zeros(len(chain)), chain.lower, chain.upper)
    req = IkRequest(
        target=RigidTransform.from_xyz_rpy(parse_floats(args.xyz), parse_floats(args.rpy)),
        seed=seed,
        time_budget=args.budget_ms / 1e3,
        rng_seed=config.seed,
        mode=ExecutionMode.THREADED if args.threaded else ExecutionMode.SEQUENTIAL,
    )
    result = SOLVERS[args.solver](chain, req)
    data = result.to_dict()
    if not args.threaded:
        data.pop("elapsed")
    emit(data)
    return EXIT_OK if result.converged else EXIT_FAILED


def _arm_trajectory(robot: RobotDescription, args):
    chain = KinematicChain.from_description(robot)
    return plan_joint_trajectory(
        chain,
        resolve_joints(robot, args.start),
        resolve_joints(robot, args.goal),
        duration=args.duration,
        vel_limits=robot.velocity_limits,
        acc_limits=robot.acceleration_limits,
    )


def cmd_plan_arm(args) -> int:
    config = parse_config(args)
    robot = load_robot(config)
    traj = _arm_trajectory(robot, args)
    write_csv(config.out_dir / "trajectory.csv", trajectory_header(len(traj)), trajectory_rows(traj, args.dt))
    if config.emit_svg:
        times, q, v, a = sample_trajectory(traj, args.dt)
        plotting.plot_joint_profiles(times, q, v, a, config.out_dir / "trajectory.svg")
    emit(
        {
            "duration": traj.duration,
            "peak_velocity": [peak_velocity(s) for s in traj.segments],
            "peak_acceleration": [peak_acceleration(s) for s in traj.segments],
        }
    )
    return EXIT_OK


def cmd_track_arm(args) -> int:
    config = parse_config(args)
    robot = load_robot(config)
    if robot.arm_gains is None:
        raise ConfigError("robot has no arm_gains block", str(config.robot))
    model = DynamicModel.from_description(robot)
    traj = _arm_trajectory(robot, args)
    try:
        log = track(
            model,
            traj,
            PidGains.from_spec(robot.arm_gains),
            args.dt,
            gravity_comp=not args.no_gravity_comp,
            torque_limits=robot.torque_limits,
        )
        status = EXIT_OK
    except DivergedError as exc:
        logger.error("%s", exc)
        log, status = exc.log, EXIT_FAILED
    write_csv(config.out_dir / "tracking.csv", log.header(), log.rows())
    if config.emit_svg and len(log):
        plotting.plot_tracking(log, config.out_dir / "tracking.svg")
    summary = log.summary()
    summary["diverged"] = status != EXIT_OK
    emit(summary)
    return status


def cmd_plan_base(args) -> int:
    config = parse_config(args)
    if config.map is None:
        raise ConfigError("--map is required", "arguments")
    grid = load_map(config.map)
    start = grid.world_to_cell(*parse_floats(args.start)[:2])
    goal = grid.world_to_cell(*parse_floats(args.goal)[:2])
    rows = compare_heuristics(grid, start, goal)
    TaskMonitor(sys.stderr).print_plan_comparison(rows)

    chosen = astar(grid, start, goal, Connectivity(args.connectivity), HeuristicKind(args.heuristic))
    if chosen.found:
        timed = time_parameterize(chosen, grid, args.speed)
        write_csv(config.out_dir / "path.csv", path_header(), [list(w) for w in timed.rows()])
    if config.emit_svg:
        plans = {
            f"{row['connectivity']}/{row['heuristic']}": astar(
                grid, start, goal, Connectivity(row["connectivity"]), HeuristicKind(row["heuristic"])
            )
            for row in rows
        }
        plotting.plot_plans(grid, plans, config.out_dir / "plans.svg")
    emit({"start": list(start), "goal": list(goal), "comparison": rows})
    return EXIT_OK if chosen.found else EXIT_FAILED


def cmd_follow_base(args) -> int:
    config = parse_config(args)
    robot = load_robot(config)
    if config.map is None or robot.base is None:
        raise ConfigError("--map and a robot base block are required", "arguments")
    grid = load_map(config.map)
    start = parse_floats(args.start)
    goal = parse_floats(args.goal)
    if len(start) != 3 or len(goal) != 3:
        raise InvalidArgumentError("--start and --goal take x,y,theta")
    result = astar(grid, grid.world_to_cell(*start[:2]), grid.world_to_cell(*goal[:2]))
    if not result.found:
        emit({"found": False, "nodes_expanded": result.nodes_expanded})
        return EXIT_FAILED
    timed = time_parameterize(result, grid, args.speed)
    run = drive_base(
        BaseState(*start),
        timed,
        BaseParams.from_spec(robot.base.params),
        BaseGains.from_spec(robot.base.gains),
        args.dt,
        goal_heading=goal[2],
    )
    write_csv(config.out_dir / "base_log.csv", BASE_LOG_HEADER, run.rows)
    if config.emit_svg:
        plotting.plot_base_run(grid, timed, run.rows, config.out_dir / "base_log.svg")
    emit(run.to_dict())
    return EXIT_OK if run.arrived else EXIT_FAILED


def cmd_run_task(args) -> int:
    config = parse_config(args)
    if config.scenario is None:
        raise ConfigError("--scenario is required", "arguments")
    report = run_scenario(config.scenario, config.out_dir, config.emit_svg, seed=args.seed)
    TaskMonitor(sys.stderr).print_report(report)
    emit({"final_state": report.final_state, "reason": report.reason, "events": report.events})
    return EXIT_OK if report.succeeded else EXIT_FAILED


def cmd_bench_ik(args) -> int:
    config = parse_config(args)
    robot = load_robot(config)
    chain = KinematicChain.from_description(robot)
    mode = ExecutionMode.THREADED if args.threaded else ExecutionMode.SEQUENTIAL
    report = bench_ik(chain, args.samples, args.budget_ms / 1e3, config.seed, mode)
    TaskMonitor(sys.stderr).print_ik_bench(report)
    emit(report)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mobimanip", description="Mobile manipulator planning and control")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    commands = parser.add_subparsers(dest="command", required=True)

    def command(name, handler, help_text):
        sub = commands.add_parser(name, help=help_text)
        sub.set_defaults(handler=handler)
        return sub

    fk = command("fk", cmd_fk, "end-effector pose for a joint vector")
    fk.add_argument("--robot", type=Path, required=True)
    fk.add_argument("--q", required=True, help="comma-separated joints or a named pose")
    fk.add_argument("--qdot", help="comma-separated joint velocities; adds the end-effector twist")

    ik = command("ik", cmd_ik, "solve inverse kinematics for a pose")
    ik.add_argument("--robot", type=Path, required=True)
    ik.add_argument("--xyz", required=True)
    ik.add_argument("--rpy", default="0,0,0")
    ik.add_argument("--seed-q", help="seed joints or a named pose")
    ik.add_argument("--solver", choices=sorted(SOLVERS), default="race")
    ik.add_argument("--budget-ms", type=float, default=50.0)
    ik.add_argument("--threaded", action="store_true")
    ik.add_argument("--seed", type=int, default=0)

    for name, handler, help_text in (
        ("plan-arm", cmd_plan_arm, "quintic joint trajectory between two configurations"),
        ("track-arm", cmd_track_arm, "PID tracking of a quintic trajectory"),
    ):
        sub = command(name, handler, help_text)
        sub.add_argument("--robot", type=Path, required=True)
        sub.add_argument("--start", required=True, help="joints or a named pose")
        sub.add_argument("--goal", required=True, help="joints or a named pose")
        sub.add_argument("--duration", type=float)
        sub.add_argument("--out", type=Path, default=Path("out"))
        sub.add_argument("--svg", action="store_true")
    commands.choices["plan-arm"].add_argument("--dt", type=float, default=0.01)
    commands.choices["track-arm"].add_argument("--dt", type=float, default=0.001)
    commands.choices["track-arm"].add_argument("--no-gravity-comp", action="store_true")

    plan_base = command("plan-base", cmd_plan_base, "A* on a map, every heuristic next to the optimum")
    plan_base.add_argument("--map", type=Path, required=True)
    plan_base.add_argument("--start", required=True, help="x,y in metres")
    plan_base.add_argument("--goal", required=True, help="x,y in metres")
    plan_base.add_argument("--connectivity", choices=[c.value for c in Connectivity], default="eight")
    plan_base.add_argument("--heuristic", choices=[h.value for h in HeuristicKind], default="euclidean")
    plan_base.add_argument("--speed", type=float, default=0.5)
    plan_base.add_argument("--out", type=Path, default=Path("out"))
    plan_base.add_argument("--svg", action="store_true")

    follow = command("follow-base", cmd_follow_base, "plan and drive the base between two poses")
    follow.add_argument("--robot", type=Path, required=True)
    follow.add_argument("--map", type=Path, required=True)
    follow.add_argument("--start", required=True, help="x,y,theta")
    follow.add_argument("--goal", required=True, help="x,y,theta")
    follow.add_argument("--speed", type=float, default=0.5)
    follow.add_argument("--dt", type=float, default=0.01)
    follow.add_argument("--out", type=Path, default=Path("out"))
    follow.add_argument("--svg", action="store_true")

    run = command("run-task", cmd_run_task, "pick-and-place scenario")
    run.add_argument("--scenario", type=Path, required=True)
    run.add_argument("--out", type=Path, default=Path("out"))
    run.add_argument("--seed", type=int, default=None)
    run.add_argument("--svg", action="store_true")

    bench = command("bench-ik", cmd_bench_ik, "IK success rate and latency per solver")
    bench.add_argument("--robot", type=Path, required=True)
    bench.add_argument("--samples", type=int, default=500)
    bench.add_argument("--budget-ms", type=float, default=50.0)
    bench.add_argument("--threaded", action="store_true")
    bench.add_argument("--seed", type=int, default=0)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="[%(levelname)s] %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.handler(args)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
