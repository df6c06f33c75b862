import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple, Union

import numpy as np

from core import plotting
from core.control import track
from core.diffdrive import drive_base
from core.errors import ConfigError, DivergedError, MobiManipError
from core.grid_planner import load_map, path_header, plan_path
from core.ik import solve_race
from core.kinematics import end_effector
from core.task import INITIAL_STATE, gripper_command, transition
from core.trajectory import plan_joint_trajectory
from core.utils import dump_json, load_model, write_csv
from models.base import BASE_LOG_HEADER, BaseGains, BaseParams, BaseRun, BaseState
from models.chain import DynamicModel, JointState
from models.control import PidGains, TrackingLog
from models.geometry import RigidTransform
from models.grid import GridMap, TimedPath
from models.ik import IkRequest, IkResult
from models.robot import RobotDescription
from models.task import GripperState, Phase, PhaseRecord, ScenarioSpec, TaskEvent, TaskReport, TaskState

logger = logging.getLogger(__name__)

GRASP_REACH = 0.02
GRIPPER_SECONDS = 1.0

# event emitted when a phase raises instead of returning
FALLBACK_EVENTS = {
    Phase.CHECK_STATUS: TaskEvent.PATH_FAILED,
    Phase.PLAN_BASE_PATH: TaskEvent.PATH_FAILED,
    Phase.MOVE_BASE_TO_PICK: TaskEvent.BASE_TIMEOUT,
    Phase.PLAN_ARM_TO_GRASP: TaskEvent.IK_FAILED,
    Phase.EXECUTE_ARM_TRAJECTORY: TaskEvent.ARM_DIVERGED,
    Phase.CLOSE_GRIPPER: TaskEvent.GRASP_SLIPPED,
    Phase.TUCK_ARM: TaskEvent.ARM_DIVERGED,
    Phase.MOVE_BASE_TO_PLACE: TaskEvent.BASE_TIMEOUT,
    Phase.EXTEND_ARM: TaskEvent.IK_FAILED,
    Phase.OPEN_GRIPPER: TaskEvent.GRASP_SLIPPED,
}


@dataclass(frozen=True)
class Scenario:
    spec: ScenarioSpec
    robot: RobotDescription
    grid: GridMap

    def with_seed(self, seed: int) -> "Scenario":
        return Scenario(self.spec.model_copy(update={"seed": seed}), self.robot, self.grid)


def _in_map(grid: GridMap, x: float, y: float) -> bool:
    return grid.in_bounds(grid.world_to_cell(x, y))


def validate_scenario(scenario: Scenario, location: str = "scenario") -> Scenario:
    spec, robot, grid = scenario.spec, scenario.robot, scenario.grid
    if robot.base is None or robot.arm_gains is None or not robot.inertial:
        raise ConfigError("robot needs base, arm_gains and inertial blocks to run a task", location)
    if "tuck" not in robot.poses:
        raise ConfigError("robot has no 'tuck' pose", location)
    if spec.object.width >= robot.gripper.max_opening:
        raise ConfigError(
            f"object width {spec.object.width} does not fit the {robot.gripper.max_opening} gripper", location
        )
    for name in ("start", "pick_base_goal", "place_base_goal"):
        x, y, _ = getattr(spec, name)
        if not _in_map(grid, x, y):
            raise ConfigError(f"{name} ({x}, {y}) is outside the map", location)
    for name in ("pick_pose", "place_pose"):
        x, y = getattr(spec, name).xyz[:2]
        if not _in_map(grid, x, y):
            raise ConfigError(f"{name} ({x}, {y}) is outside the map", location)
    return scenario


def load_scenario(path) -> Scenario:
    """Scenario file plus the robot and map files it names (relative to the scenario)."""
    path = Path(path)
    spec = load_model(path, ScenarioSpec)
    robot = load_model(path.parent / spec.robot, RobotDescription)
    grid = load_map(path.parent / spec.map)
    return validate_scenario(Scenario(spec, robot, grid), str(path))


class TaskSimulator:
    """Runs the pick-and-place machine over the base, arm and gripper models."""

    def __init__(self, scenario: Scenario):
        self.scenario = scenario
        spec, robot = scenario.spec, scenario.robot
        self.spec = spec
        self.robot = robot
        self.grid = scenario.grid
        self.model = DynamicModel.from_description(robot)
        self.chain = self.model.chain
        self.base_params = BaseParams.from_spec(robot.base.params)
        self.base_gains = BaseGains.from_spec(spec.base_gains or robot.base.gains)
        self.arm_gains = PidGains.from_spec(spec.arm_gains or robot.arm_gains)
        self.tuck = np.array(robot.poses["tuck"], dtype=float)

        self.base = BaseState(*spec.start)
        self.arm_q = self.tuck.copy()
        self.arm_state = JointState.at_rest(self.tuck)
        max_opening = robot.gripper.max_opening
        self.gripper = GripperState(max_opening, 0.0, False, max_opening)
        self.object_pose = spec.pick_pose.to_transform()
        self.grasp_offset: Optional[RigidTransform] = None
        self.path: Optional[TimedPath] = None
        self.ik_solution: Optional[np.ndarray] = None

        self.tables: Dict[str, Tuple[List[str], list]] = {}
        self.base_runs: Dict[str, Tuple[TimedPath, BaseRun]] = {}
        self.arm_logs: Dict[str, TrackingLog] = {}
        self.handlers: Dict[Phase, Callable[[], Tuple[TaskEvent, float, dict]]] = {
            Phase.CHECK_STATUS: self.check_status,
            Phase.PLAN_BASE_PATH: self.plan_base_path,
            Phase.MOVE_BASE_TO_PICK: self.move_base_to_pick,
            Phase.PLAN_ARM_TO_GRASP: self.plan_arm_to_grasp,
            Phase.EXECUTE_ARM_TRAJECTORY: self.execute_arm_trajectory,
            Phase.CLOSE_GRIPPER: self.close_gripper,
            Phase.TUCK_ARM: self.tuck_arm,
            Phase.MOVE_BASE_TO_PLACE: self.move_base_to_place,
            Phase.EXTEND_ARM: self.extend_arm,
            Phase.OPEN_GRIPPER: self.open_gripper,
        }

    # world helpers

    def base_transform(self) -> RigidTransform:
        return RigidTransform.planar(self.base.x, self.base.y, self.base.theta)

    def end_effector_world(self, q) -> RigidTransform:
        return self.base_transform() @ end_effector(self.chain, q)

    def _carry_object(self) -> None:
        if self.gripper.holding and self.grasp_offset is not None:
            self.object_pose = self.end_effector_world(self.arm_state.q) @ self.grasp_offset

    # phase helpers

    def _plan(self, goal: Tuple[float, float, float], name: str):
        planner = self.spec.planner
        result, timed = plan_path(
            self.grid,
            (self.base.x, self.base.y),
            goal[:2],
            self.spec.base_speed,
            planner.connectivity,
            planner.heuristic,
        )
        details = result.to_dict()
        if timed is None:
            return None, details
        details["duration"] = timed.duration
        details["length"] = timed.length()
        self.tables[f"{name}_path"] = (path_header(), [list(w) for w in timed.rows()])
        return timed, details

    def _drive(self, path: TimedPath, goal: Tuple[float, float, float], name: str):
        run = drive_base(self.base, path, self.base_params, self.base_gains, self.spec.base_dt, goal_heading=goal[2])
        self.base = BaseState(*run.final_state.pose())
        self.tables[name] = (BASE_LOG_HEADER, run.rows)
        self.base_runs[name] = (path, run)
        self._carry_object()
        event = TaskEvent.BASE_ARRIVED if run.arrived else TaskEvent.BASE_TIMEOUT
        return event, run.sim_time, run.to_dict()

    def _solve_ik(self, world_pose: RigidTransform, stream: int) -> Tuple[IkResult, dict]:
        target = self.base_transform().inverse() @ world_pose
        req = IkRequest(
            target=target,
            seed=self.arm_q,
            time_budget=self.spec.ik_budget_ms / 1e3,
            rng_seed=(self.spec.seed + stream) % 2**64,
        )
        result = solve_race(self.chain, req)
        details = result.to_dict()
        details.pop("elapsed")
        return result, details

    def _move_arm(self, goal: np.ndarray, name: str):
        traj = plan_joint_trajectory(
            self.chain,
            self.arm_q,
            goal,
            vel_limits=self.robot.velocity_limits,
            acc_limits=self.robot.acceleration_limits,
        )
        try:
            log = track(
                self.model,
                traj,
                self.arm_gains,
                self.spec.arm_dt,
                gravity_comp=self.spec.gravity_comp,
                torque_limits=self.robot.torque_limits,
            )
        except DivergedError as exc:
            logger.error("%s: %s", name, exc)
            if exc.log is not None:
                self.arm_logs[name] = exc.log
                self.tables[name] = (exc.log.header(), list(exc.log.rows()))
            return TaskEvent.ARM_DIVERGED, traj.duration, {"status": "failed", "error": str(exc)}
        self.arm_logs[name] = log
        self.tables[name] = (log.header(), list(log.rows()))
        self.arm_q = np.array(goal, dtype=float)
        self.arm_state = log.final_state
        self._carry_object()
        details = log.summary()
        details["goal"] = [float(v) for v in goal]
        return TaskEvent.ARM_DONE, traj.duration, details

    # phases

    def check_status(self):
        details = {
            "base": list(self.base.pose()),
            "arm_q": [float(v) for v in self.arm_q],
            "gripper": self.gripper.to_dict(),
        }
        return TaskEvent.STATUS_OK, 0.0, details

    def plan_base_path(self):
        self.path, details = self._plan(self.spec.pick_base_goal, "base_pick")
        return (TaskEvent.PATH_FOUND if self.path else TaskEvent.PATH_FAILED), 0.0, details

    def move_base_to_pick(self):
        return self._drive(self.path, self.spec.pick_base_goal, "base_pick")

    def plan_arm_to_grasp(self):
        result, details = self._solve_ik(self.spec.pick_pose.to_transform(), 0)
        if not result.converged:
            return TaskEvent.IK_FAILED, 0.0, details
        self.ik_solution = result.joints()
        return TaskEvent.IK_SOLVED, 0.0, details

    def execute_arm_trajectory(self):
        return self._move_arm(self.ik_solution, "arm_grasp")

    def close_gripper(self):
        reach = self.end_effector_world(self.arm_state.q)
        gap = float(np.linalg.norm(reach.translation - self.object_pose.translation))
        obj = self.spec.object if gap <= GRASP_REACH else None
        effort = min(self.spec.grip_effort, self.robot.gripper.max_effort)
        self.gripper = gripper_command(self.gripper, 0.0, effort, obj)
        details = self.gripper.to_dict()
        details["object_gap"] = gap
        if not self.gripper.holding:
            return TaskEvent.GRASP_SLIPPED, GRIPPER_SECONDS, details
        self.grasp_offset = reach.inverse() @ self.object_pose
        return TaskEvent.GRASP_SECURED, GRIPPER_SECONDS, details

    def tuck_arm(self):
        return self._move_arm(self.tuck, "arm_tuck")

    def move_base_to_place(self):
        path, details = self._plan(self.spec.place_base_goal, "base_place")
        if path is None:
            return TaskEvent.PATH_FAILED, 0.0, details
        event, sim_time, drive = self._drive(path, self.spec.place_base_goal, "base_place")
        details.update(drive)
        return event, sim_time, details

    def extend_arm(self):
        result, ik = self._solve_ik(self.spec.place_pose.to_transform(), 1)
        if not result.converged:
            return TaskEvent.IK_FAILED, 0.0, {"ik": ik}
        event, sim_time, details = self._move_arm(result.joints(), "arm_extend")
        details["ik"] = ik
        return event, sim_time, details

    def open_gripper(self):
        self.gripper = gripper_command(self.gripper, self.robot.gripper.max_opening, 0.0, None)
        self.grasp_offset = None
        return TaskEvent.RELEASE_DONE, GRIPPER_SECONDS, self.gripper.to_dict()

    def run(self) -> TaskReport:
        state: TaskState = INITIAL_STATE
        events: List[str] = []
        phases: List[PhaseRecord] = []
        total = 0.0
        while not state.terminal:
            phase = state.phase
            logger.info("entering %s", phase.value)
            try:
                event, sim_time, details = self.handlers[phase]()
            except (MobiManipError, ValueError) as exc:
                logger.error("%s failed: %s", phase.value, exc)
                event, sim_time, details = FALLBACK_EVENTS[phase], 0.0, {"status": "failed", "error": str(exc)}
            total += sim_time
            events.append(event.value)
            phases.append(PhaseRecord(phase=phase.value, event=event.value, sim_time=sim_time, details=details))
            state = transition(state, event)

        logger.info("task finished in %s after %.2f simulated seconds", state, total)
        return TaskReport(
            final_state=state.phase.value,
            reason=None if state.reason is None else state.reason.value,
            events=events,
            phases=phases,
            total_sim_time=total,
            seed=self.spec.seed,
            gripper=self.gripper.to_dict(),
            object_position=[float(v) for v in self.object_pose.translation],
        )

    def write_outputs(self, report: TaskReport, out_dir, emit_svg: bool = False) -> List[Path]:
        out_dir = Path(out_dir)
        dump_json(report.model_dump(), out_dir / "report.json")
        written = [out_dir / "report.json"]
        for name, (header, rows) in self.tables.items():
            written.append(write_csv(out_dir / f"{name}.csv", header, rows))
        if emit_svg:
            for name, (path, run) in self.base_runs.items():
                written.append(plotting.plot_base_run(self.grid, path, run.rows, out_dir / f"{name}.svg"))
            for name, log in self.arm_logs.items():
                written.append(plotting.plot_tracking(log, out_dir / f"{name}.svg"))
        return written


def run_scenario(
    scenario: Union[Scenario, str, Path],
    out_dir=None,
    emit_svg: bool = False,
    seed: Optional[int] = None,
) -> TaskReport:
    """Execute the whole pick-and-place task; failures end in Failed(reason), never an exception."""
    if not isinstance(scenario, Scenario):
        scenario = load_scenario(scenario)
    if seed is not None:
        scenario = scenario.with_seed(seed)
    simulator = TaskSimulator(scenario)
    report = simulator.run()
    if out_dir is not None:
        simulator.write_outputs(report, out_dir, emit_svg)
    return report
