"""Joint-space PID torque control closed over the dynamics integrator."""

import logging
from typing import Optional, Sequence

import numpy as np

from core.dynamics import gravity_vector, integrate_step
from core.errors import DegenerateModelError, DivergedError, InvalidArgumentError
from core.trajectory import evaluate_trajectory
from core.utils import as_vector
from models.chain import DynamicModel, JointState
from models.control import PidGains, TrackingLog, TrackingSample
from models.trajectory import JointTrajectory

logger = logging.getLogger(__name__)

MAX_DT = 0.01


def pid_torque(gains: PidGains, q_err: Sequence[float], v_err: Sequence[float], integral: Sequence[float]) -> np.ndarray:
    n = len(gains)
    q_err = as_vector(q_err, n, "q_err")
    v_err = as_vector(v_err, n, "v_err")
    integral = np.clip(as_vector(integral, n, "integral"), -gains.integral_limit, gains.integral_limit)
    return gains.kp * q_err + gains.kv * v_err + gains.ki * integral


def track(
    model: DynamicModel,
    traj: JointTrajectory,
    gains: PidGains,
    dt: float,
    gravity_comp: bool = True,
    torque_limits: Optional[Sequence[float]] = None,
) -> TrackingLog:
    """Follow `traj` from its start at rest, logging every control step."""
    if not 0.0 < dt <= MAX_DT:
        raise InvalidArgumentError(f"dt must lie in (0, {MAX_DT}], got {dt}")
    n = len(model)
    if len(traj) != n or len(gains) != n:
        raise InvalidArgumentError(f"trajectory and gains must cover {n} joints")
    limits = None if torque_limits is None else as_vector(torque_limits, n, "torque_limits")

    start = evaluate_trajectory(traj, traj.t0)
    state = JointState.at_rest(start.q)
    integral = np.zeros(n)
    log = TrackingLog(dt=dt)
    steps = max(1, int(round(traj.duration / dt)))

    for k in range(steps + 1):
        t = traj.t0 + k * dt
        ref = evaluate_trajectory(traj, min(t, traj.tf))
        q_err = ref.q - state.q
        v_err = ref.v - state.qdot
        integral = np.clip(integral + q_err * dt, -gains.integral_limit, gains.integral_limit)
        tau = pid_torque(gains, q_err, v_err, integral)
        if gravity_comp:
            tau = tau + gravity_vector(model, state.q)
        if limits is not None:
            saturated = np.abs(tau) > limits
            if np.any(saturated):
                log.saturation_events += int(np.count_nonzero(saturated))
                tau = np.clip(tau, -limits, limits)
        log.samples.append(TrackingSample(t, ref.q, state.q, ref.v, state.qdot, q_err, tau))
        if k == steps:
            break
        if not np.all(np.isfinite(tau)):
            raise DivergedError(f"non-finite torque at t={t:.4f}", log)
        try:
            with np.errstate(over="ignore", invalid="ignore"):
                state = integrate_step(model, state, tau, dt)
        except (DegenerateModelError, ValueError, np.linalg.LinAlgError) as exc:
            raise DivergedError(f"controller diverged at t={t:.4f}: {exc}", log) from exc
        if not state.is_finite():
            raise DivergedError(f"non-finite joint state at t={t + dt:.4f}", log)

    log.final_state = state
    if log.saturation_events:
        logger.warning("torque saturated %d times while tracking", log.saturation_events)
    logger.debug("tracked %d steps, max |error| %.3e rad", len(log), log.max_abs_error())
    return log
