"""Unicycle model of the differential-drive base and a PID path follower."""

import logging
import math
from typing import Optional, Tuple

import numpy as np

from core.errors import InvalidArgumentError
from core.utils import normalize_angle
from models.base import BaseGains, BaseParams, BaseRun, BaseState, FollowCommand, PidMemory, Reference
from models.grid import TimedPath

logger = logging.getLogger(__name__)

MAX_DT = 0.05
STRAIGHT_EPS = 1e-9
BEARING_SWITCH = 0.05
LATERAL_LOOKAHEAD = 0.3
ANTI_WINDUP = 1.0
ARRIVAL_DIST = 0.05
ARRIVAL_HEADING = 0.1
SETTLE_DIST = 0.01
SETTLE_HEADING = 0.01
TIMEOUT = 120.0


def _check_dt(dt: float) -> None:
    if not 0.0 < dt <= MAX_DT:
        raise InvalidArgumentError(f"dt must lie in (0, {MAX_DT}], got {dt}")


def step(state: BaseState, v_cmd: float, w_cmd: float, dt: float, params: BaseParams) -> BaseState:
    """Saturate, rate-limit and integrate one constant-twist arc."""
    _check_dt(dt)
    if not (math.isfinite(v_cmd) and math.isfinite(w_cmd)):
        raise InvalidArgumentError("base commands must be finite")
    v = float(np.clip(v_cmd, -params.v_max, params.v_max))
    dv = params.a_max * dt
    v = float(np.clip(v, state.v - dv, state.v + dv))
    w = float(np.clip(w_cmd, -params.w_max, params.w_max))

    theta = state.theta
    if abs(w) > STRAIGHT_EPS:
        x = state.x + (v / w) * (math.sin(theta + w * dt) - math.sin(theta))
        y = state.y - (v / w) * (math.cos(theta + w * dt) - math.cos(theta))
    else:
        x = state.x + v * dt * math.cos(theta)
        y = state.y + v * dt * math.sin(theta)
    return BaseState(x, y, theta + w * dt, v, w)


def wheel_speeds(v: float, w: float, params: BaseParams) -> Tuple[float, float]:
    half = 0.5 * w * params.track_width
    return (v - half) / params.wheel_radius, (v + half) / params.wheel_radius


def body_twist(omega_left: float, omega_right: float, params: BaseParams) -> Tuple[float, float]:
    left = omega_left * params.wheel_radius
    right = omega_right * params.wheel_radius
    return 0.5 * (left + right), (right - left) / params.track_width


def constraint_residual(prev: BaseState, nxt: BaseState, dt: float) -> float:
    """Lateral slip of the chord against the arc's mid heading.

    `nxt.w` is the turn rate applied over the step, so turns past pi per step keep
    the right branch.
    """
    if not dt > 0:
        raise InvalidArgumentError("dt must be positive")
    mid = prev.theta + 0.5 * nxt.w * dt
    dx, dy = nxt.x - prev.x, nxt.y - prev.y
    return abs(dx * math.sin(mid) - dy * math.cos(mid))


def reference_at(path: TimedPath, t: float) -> Reference:
    """Linear interpolation of the path at time t, held at the ends."""
    points = path.waypoints
    if t <= points[0].t or len(points) == 1:
        first = points[0]
        return Reference(first.x, first.y, first.heading, 0.0)
    if t >= points[-1].t:
        last = points[-1]
        return Reference(last.x, last.y, last.heading, 0.0)
    times = [w.t for w in points]
    i = int(np.searchsorted(times, t, side="right")) - 1
    a, b = points[i], points[i + 1]
    s = (t - a.t) / (b.t - a.t)
    speed = math.hypot(b.x - a.x, b.y - a.y) / (b.t - a.t)
    return Reference(a.x + s * (b.x - a.x), a.y + s * (b.y - a.y), a.heading, speed)


def cross_track_error(path: TimedPath, x: float, y: float) -> float:
    """Distance from (x, y) to the path polyline."""
    points = np.array([(w.x, w.y) for w in path.waypoints])
    p = np.array([x, y])
    if len(points) == 1:
        return float(np.linalg.norm(p - points[0]))
    a, b = points[:-1], points[1:]
    seg = b - a
    length2 = np.einsum("ij,ij->i", seg, seg)
    s = np.clip(np.einsum("ij,ij->i", p - a, seg) / np.where(length2 > 0, length2, 1.0), 0.0, 1.0)
    closest = a + s[:, None] * seg
    return float(np.min(np.linalg.norm(closest - p, axis=1)))


def _pid(kp, ki, kd, error, integral, previous, dt, wrap=False):
    integral = float(np.clip(integral + error * dt, -ANTI_WINDUP, ANTI_WINDUP))
    derivative = 0.0
    if previous is not None and dt > 0:
        change = error - previous
        derivative = (normalize_angle(change) if wrap else change) / dt
    return kp * error + ki * integral + kd * derivative, integral


def _errors(state: BaseState, ref: Reference) -> Tuple[float, float, float, bool]:
    """(distance, signed drive error, heading error, bearing mode)."""
    dx, dy = ref.x - state.x, ref.y - state.y
    e_d = math.hypot(dx, dy)
    if e_d > BEARING_SWITCH:
        return e_d, e_d, normalize_angle(math.atan2(dy, dx) - state.theta), True
    # near the reference: drive on the along-track error and steer the lateral offset back onto the path
    cos_h, sin_h = math.cos(ref.heading), math.sin(ref.heading)
    along = cos_h * dx + sin_h * dy
    lateral = cos_h * dy - sin_h * dx
    heading = ref.heading + math.atan2(lateral, LATERAL_LOOKAHEAD)
    return e_d, along, normalize_angle(heading - state.theta), False


def _track(state: BaseState, ref: Reference, t_now: float, gains: BaseGains, memory: PidMemory) -> FollowCommand:
    e_d, e_drive, e_theta, bearing_mode = _errors(state, ref)
    dt = 0.0 if memory.prev_t is None else max(0.0, t_now - memory.prev_t)
    # both errors jump when the mode flips; skip those derivatives
    same_mode = memory.bearing_mode == bearing_mode
    prev_dist = memory.prev_dist if same_mode else None
    prev_head = memory.prev_head if same_mode else None
    u_d, integral_d = _pid(gains.kp_dist, gains.ki_dist, gains.kd_dist, e_drive, memory.integral_dist, prev_dist, dt)
    w, integral_h = _pid(gains.kp_head, gains.ki_head, gains.kd_head, e_theta, memory.integral_head, prev_head, dt, wrap=True)
    v = max(0.0, (gains.kff * ref.speed + u_d) * math.cos(e_theta))
    memory = PidMemory(integral_d, integral_h, e_drive, e_theta, t_now, bearing_mode)
    return FollowCommand(v, w, False, e_d, e_theta, ref, memory)


def follow(
    state: BaseState,
    path: TimedPath,
    t_now: float,
    gains: BaseGains,
    memory: Optional[PidMemory] = None,
) -> FollowCommand:
    """Distance/heading PID toward the path reference at t_now."""
    memory = memory or PidMemory()
    if t_now > path.t_end:
        goal = path.goal
        ref = Reference(goal.x, goal.y, goal.heading, 0.0)
        e_d = math.hypot(goal.x - state.x, goal.y - state.y)
        return FollowCommand(0.0, 0.0, True, e_d, normalize_angle(goal.heading - state.theta), ref, memory)
    return _track(state, reference_at(path, t_now), t_now, gains, memory)


def _settle(state: BaseState, ref: Reference, t_now: float, gains: BaseGains, memory: PidMemory, params: BaseParams):
    """Drive onto the final point, capped by the stopping distance."""
    e_d = math.hypot(ref.x - state.x, ref.y - state.y)
    bearing = math.atan2(ref.y - state.y, ref.x - state.x)
    e_theta = normalize_angle(bearing - state.theta)
    dt = 0.0 if memory.prev_t is None else max(0.0, t_now - memory.prev_t)
    u_d, integral_d = _pid(gains.kp_dist, gains.ki_dist, gains.kd_dist, e_d, memory.integral_dist, memory.prev_dist, dt)
    w, integral_h = _pid(
        gains.kp_head, gains.ki_head, gains.kd_head, e_theta, memory.integral_head, memory.prev_head, dt, wrap=True
    )
    v = min(max(0.0, u_d * math.cos(e_theta)), math.sqrt(2.0 * params.a_max * e_d))
    return FollowCommand(v, w, False, e_d, e_theta, ref, PidMemory(integral_d, integral_h, e_d, e_theta, t_now))


def _rotate(state: BaseState, heading: float, t_now: float, gains: BaseGains, memory: PidMemory, ref: Reference):
    e_theta = normalize_angle(heading - state.theta)
    dt = 0.0 if memory.prev_t is None else max(0.0, t_now - memory.prev_t)
    w, integral_h = _pid(
        gains.kp_head, gains.ki_head, gains.kd_head, e_theta, memory.integral_head, memory.prev_head, dt, wrap=True
    )
    e_d = math.hypot(ref.x - state.x, ref.y - state.y)
    return FollowCommand(0.0, w, False, e_d, e_theta, ref, PidMemory(0.0, integral_h, None, e_theta, t_now))


def drive_base(
    state: BaseState,
    path: TimedPath,
    params: BaseParams,
    gains: BaseGains,
    dt: float,
    goal_heading: Optional[float] = None,
    timeout: float = TIMEOUT,
) -> BaseRun:
    """Track the timed path, settle on its last point, then turn to the goal heading."""
    _check_dt(dt)
    goal = path.goal
    goal_ref = Reference(goal.x, goal.y, goal.heading, 0.0)
    heading = goal.heading if goal_heading is None else goal_heading
    run = BaseRun(final_state=state, arrived=False, sim_time=0.0)
    memory = PidMemory()
    squared_cte = 0.0
    k = 0
    phase = "track"
    t = 0.0

    while t <= timeout:
        t = path.waypoints[0].t + k * dt
        if phase == "track" and t > path.t_end:
            phase = "settle"
            memory = PidMemory()
        if phase == "settle" and math.hypot(goal.x - state.x, goal.y - state.y) <= SETTLE_DIST:
            phase = "rotate"
            memory = PidMemory()
        if phase == "rotate" and abs(normalize_angle(heading - state.theta)) <= SETTLE_HEADING:
            break

        if phase == "track":
            cmd = follow(state, path, t, gains, memory)
        elif phase == "settle":
            cmd = _settle(state, goal_ref, t, gains, memory, params)
        else:
            cmd = _rotate(state, heading, t, gains, memory, goal_ref)
        memory = cmd.memory

        nxt = step(state, cmd.v, cmd.w, dt, params)
        run.max_residual = max(run.max_residual, constraint_residual(state, nxt, dt))
        state = nxt
        squared_cte += cross_track_error(path, state.x, state.y) ** 2
        ref = cmd.reference
        run.rows.append((t + dt, state.x, state.y, state.theta, state.v, state.w, ref.x, ref.y, cmd.e_d, cmd.e_theta))
        k += 1

    run.final_state = state
    run.sim_time = k * dt
    run.final_error = math.hypot(goal.x - state.x, goal.y - state.y)
    run.rms_cross_track = math.sqrt(squared_cte / k) if k else 0.0
    heading_error = abs(normalize_angle(heading - state.theta))
    run.arrived = run.final_error <= ARRIVAL_DIST and heading_error <= ARRIVAL_HEADING
    if run.arrived:
        logger.info("base arrived after %.2f s (error %.4f m)", run.sim_time, run.final_error)
    else:
        logger.warning("base timed out after %.2f s, %.3f m from goal", run.sim_time, run.final_error)
    return run
