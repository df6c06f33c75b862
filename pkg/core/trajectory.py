"""Quintic joint-space trajectories with position/velocity/acceleration boundary conditions."""

import logging
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial import polynomial as P

from core.errors import DegenerateDurationError, InvalidArgumentError, JointLimitError
from core.utils import as_vector
from models.chain import KinematicChain
from models.trajectory import BoundaryCondition, JointTrajectory, QuinticSegment, TrajectorySample

logger = logging.getLogger(__name__)

MIN_DURATION = 1e-6
PEAK_SAMPLES = 1000
DEFAULT_DURATION = 1.0


def _boundary_matrix(duration: float) -> np.ndarray:
    T = duration
    return np.array(
        [
            [1.0, 0.0, 0.0, 0.0, 0.0, 0.0],
            [0.0, 1.0, 0.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 2.0, 0.0, 0.0, 0.0],
            [1.0, T, T**2, T**3, T**4, T**5],
            [0.0, 1.0, 2.0 * T, 3.0 * T**2, 4.0 * T**3, 5.0 * T**4],
            [0.0, 0.0, 2.0, 6.0 * T, 12.0 * T**2, 20.0 * T**3],
        ]
    )


def quintic_coefficients(bc: BoundaryCondition) -> QuinticSegment:
    values = (bc.q0, bc.v0, bc.a0, bc.qf, bc.vf, bc.af, bc.t0, bc.tf)
    if not all(math.isfinite(v) for v in values):
        raise InvalidArgumentError("boundary conditions must be finite")
    duration = bc.tf - bc.t0
    if duration <= 0.0:
        raise InvalidArgumentError(f"tf must exceed t0 (t0={bc.t0}, tf={bc.tf})")
    if duration < MIN_DURATION:
        raise DegenerateDurationError(f"segment duration {duration} is too short to solve")
    rhs = np.array([bc.q0, bc.v0, bc.a0, bc.qf, bc.vf, bc.af])
    coeffs = np.linalg.solve(_boundary_matrix(duration), rhs)
    return QuinticSegment(coeffs, bc.t0, bc.tf)


def evaluate(seg: QuinticSegment, t: float) -> TrajectorySample:
    """Position, velocity, acceleration at t; t outside the window is clamped and flagged."""
    clamped = t < seg.t0 or t > seg.tf
    tau = min(max(t, seg.t0), seg.tf) - seg.t0
    vel = P.polyder(seg.coeffs)
    acc = P.polyder(vel)
    return TrajectorySample(
        float(P.polyval(tau, seg.coeffs)),
        float(P.polyval(tau, vel)),
        float(P.polyval(tau, acc)),
        clamped,
    )


def evaluate_trajectory(traj: JointTrajectory, t: float) -> TrajectorySample:
    samples = [evaluate(seg, t) for seg in traj.segments]
    return TrajectorySample(
        np.array([s.q for s in samples]),
        np.array([s.v for s in samples]),
        np.array([s.a for s in samples]),
        samples[0].clamped,
    )


def _peak_abs(poly: np.ndarray, duration: float) -> float:
    """max |poly| on [0, duration]: dense sampling refined at the critical points."""
    grid = np.linspace(0.0, duration, PEAK_SAMPLES)
    peak = float(np.max(np.abs(P.polyval(grid, poly))))
    for root in P.polyroots(P.polyder(poly)):
        if abs(root.imag) < 1e-9 and 0.0 <= root.real <= duration:
            peak = max(peak, abs(float(P.polyval(root.real, poly))))
    return peak


def peak_velocity(seg: QuinticSegment) -> float:
    return _peak_abs(P.polyder(seg.coeffs), seg.duration)


def peak_acceleration(seg: QuinticSegment) -> float:
    return _peak_abs(P.polyder(seg.coeffs, 2), seg.duration)


def max_jerk(seg: QuinticSegment) -> float:
    return _peak_abs(P.polyder(seg.coeffs, 3), seg.duration)


def default_duration(q_start: np.ndarray, q_goal: np.ndarray, vel_limits: Optional[np.ndarray]) -> float:
    """Slowest joint at half its velocity limit."""
    if vel_limits is None:
        return DEFAULT_DURATION
    duration = float(np.max(np.abs(q_goal - q_start) / (0.5 * vel_limits)))
    return duration if duration > 0.0 else DEFAULT_DURATION


def _rest_to_rest(q_start, q_goal, duration) -> JointTrajectory:
    return JointTrajectory(
        tuple(
            quintic_coefficients(BoundaryCondition.rest_to_rest(a, b, 0.0, duration))
            for a, b in zip(q_start, q_goal)
        )
    )


def plan_joint_trajectory(
    chain: KinematicChain,
    q_start: Sequence[float],
    q_goal: Sequence[float],
    duration: Optional[float] = None,
    vel_limits: Optional[Sequence[float]] = None,
    acc_limits: Optional[Sequence[float]] = None,
) -> JointTrajectory:
    """Synchronized rest-to-rest quintics, time-dilated until velocity/acceleration limits hold."""
    n = len(chain)
    q_start = as_vector(q_start, n, "q_start")
    q_goal = as_vector(q_goal, n, "q_goal")
    if not chain.within_limits(q_start):
        raise JointLimitError(f"start configuration outside joint limits: {q_start.tolist()}")
    if not chain.within_limits(q_goal):
        raise JointLimitError(f"goal configuration outside joint limits: {q_goal.tolist()}")
    vel = None if vel_limits is None else as_vector(vel_limits, n, "vel_limits")
    acc = None if acc_limits is None else as_vector(acc_limits, n, "acc_limits")
    for name, limits in (("vel_limits", vel), ("acc_limits", acc)):
        if limits is not None and not np.all(limits > 0.0):
            raise InvalidArgumentError(f"{name} must be positive, got {limits.tolist()}")
    if duration is None:
        duration = default_duration(q_start, q_goal, vel)
    if not duration > 0.0:
        raise InvalidArgumentError("duration must be positive")

    traj = _rest_to_rest(q_start, q_goal, duration)
    scale = 1.0
    if vel is not None:
        scale = max(scale, max(peak_velocity(s) / lim for s, lim in zip(traj.segments, vel)))
    if acc is not None:
        scale = max(scale, math.sqrt(max(peak_acceleration(s) / lim for s, lim in zip(traj.segments, acc))))
    if scale > 1.0 + 1e-12:
        logger.info("dilating trajectory from %.4f s to %.4f s to respect limits", duration, duration * scale)
        traj = _rest_to_rest(q_start, q_goal, duration * scale)
    return traj


def sample_trajectory(traj: JointTrajectory, dt: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Times and (steps x joints) q, v, a arrays on a fixed grid including both ends."""
    if not dt > 0.0:
        raise InvalidArgumentError("dt must be positive")
    steps = max(1, int(round(traj.duration / dt)))
    times = np.minimum(traj.t0 + dt * np.arange(steps + 1), traj.tf)
    rows = [evaluate_trajectory(traj, t) for t in times]
    return (
        times,
        np.array([r.q for r in rows]),
        np.array([r.v for r in rows]),
        np.array([r.a for r in rows]),
    )


def trajectory_header(joints: int) -> List[str]:
    header = ["t"]
    for i in range(joints):
        header += [f"q_{i}", f"v_{i}", f"a_{i}"]
    return header


def trajectory_rows(traj: JointTrajectory, dt: float):
    times, q, v, a = sample_trajectory(traj, dt)
    for k, t in enumerate(times):
        row = [t]
        for i in range(len(traj)):
            row += [q[k, i], v[k, i], a[k, i]]
        yield row
