"""Rigid-body dynamics of the serial chain: M(q) q'' + C(q, q') q' + g(q) = tau."""

import logging
from dataclasses import dataclass
from typing import List, Sequence

import numpy as np
import scipy.linalg

from core.errors import DegenerateModelError, InvalidArgumentError
from core.kinematics import frame_matrices, point_jacobian
from core.utils import as_vector
from models.chain import DynamicModel, JointState
from models.robot import JointKind

logger = logging.getLogger(__name__)

FD_STEP = 1e-6
MAX_CONDITION = 1e12
MAX_DT = 0.05


@dataclass
class _LinkGeometry:
    frames: List[np.ndarray]
    coms: List[np.ndarray]
    world_inertias: List[np.ndarray]


def _geometry(model: DynamicModel, q: np.ndarray) -> _LinkGeometry:
    frames = frame_matrices(model.chain, q)
    coms, inertias = [], []
    for i, link in enumerate(model.inertias):
        rotation = frames[i + 1][:3, :3]
        coms.append(frames[i + 1][:3, 3] + rotation @ link.com)
        inertias.append(rotation @ link.inertia_tensor @ rotation.T)
    return _LinkGeometry(frames, coms, inertias)


def _vectors(model: DynamicModel, *values, names=("q", "qdot", "qddot")):
    n = len(model)
    return [as_vector(v, n, name) for v, name in zip(values, names)]


def mass_matrix(model: DynamicModel, q: Sequence[float]) -> np.ndarray:
    (q,) = _vectors(model, q)
    geo = _geometry(model, q)
    n = len(model)
    mass = np.zeros((n, n))
    for i, link in enumerate(model.inertias):
        jac = point_jacobian(model.chain, geo.frames, geo.coms[i], i)
        jv, jw = jac[:3], jac[3:]
        mass += link.mass * jv.T @ jv + jw.T @ geo.world_inertias[i] @ jw
    return 0.5 * (mass + mass.T)


def kinetic_energy(model: DynamicModel, q: Sequence[float], qdot: Sequence[float]) -> float:
    q, qdot = _vectors(model, q, qdot)
    return float(0.5 * qdot @ mass_matrix(model, q) @ qdot)


def potential_energy(model: DynamicModel, q: Sequence[float]) -> float:
    (q,) = _vectors(model, q)
    geo = _geometry(model, q)
    return float(-sum(link.mass * model.gravity @ com for link, com in zip(model.inertias, geo.coms)))


def total_energy(model: DynamicModel, state: JointState) -> float:
    return kinetic_energy(model, state.q, state.qdot) + potential_energy(model, state.q)


def gravity_vector(model: DynamicModel, q: Sequence[float]) -> np.ndarray:
    """g(q) = dP/dq, assembled from the com Jacobians."""
    (q,) = _vectors(model, q)
    geo = _geometry(model, q)
    torque = np.zeros(len(model))
    for i, link in enumerate(model.inertias):
        jv = point_jacobian(model.chain, geo.frames, geo.coms[i], i)[:3]
        torque += jv.T @ (-link.mass * model.gravity)
    return torque


def mass_matrix_derivatives(model: DynamicModel, q: np.ndarray) -> np.ndarray:
    """dM[k] = dM/dq_k by central differences."""
    n = len(model)
    out = np.empty((n, n, n))
    for k in range(n):
        step = np.zeros(n)
        step[k] = FD_STEP
        out[k] = (mass_matrix(model, q + step) - mass_matrix(model, q - step)) / (2.0 * FD_STEP)
    return out


def coriolis_matrix(model: DynamicModel, q: Sequence[float], qdot: Sequence[float]) -> np.ndarray:
    """C from Christoffel symbols of the first kind; M' - 2C is skew-symmetric."""
    q, qdot = _vectors(model, q, qdot)
    dm = mass_matrix_derivatives(model, q)
    # dm[k, i, j] = dM_ij / dq_k
    term_k = np.einsum("kij,k->ij", dm, qdot)
    term_j = np.einsum("jik,k->ij", dm, qdot)
    term_i = np.einsum("ijk,k->ij", dm, qdot)
    return 0.5 * (term_k + term_j - term_i)


def _newton_euler(model: DynamicModel, q, qdot, qddot, gravity: np.ndarray) -> np.ndarray:
    """World-frame recursive Newton-Euler; returns joint forces without friction."""
    geo = _geometry(model, q)
    frames = geo.frames
    n = len(model)

    omega = np.zeros(3)
    alpha = np.zeros(3)
    accel = -gravity  # acceleration of the current joint point
    forces, moments = [], []
    for i in range(n):
        axis = frames[i][:3, 2]
        joint_point = frames[i][:3, 3]
        origin = frames[i + 1][:3, 3]
        span = origin - joint_point
        if model.chain.rows[i].joint_kind == JointKind.REVOLUTE:
            alpha = alpha + qddot[i] * axis + qdot[i] * np.cross(omega, axis)
            omega = omega + qdot[i] * axis
            accel = accel + np.cross(alpha, span) + np.cross(omega, np.cross(omega, span))
        else:
            accel = (
                accel
                + np.cross(alpha, span)
                + np.cross(omega, np.cross(omega, span))
                + 2.0 * qdot[i] * np.cross(omega, axis)
                + qddot[i] * axis
            )
        lever = geo.coms[i] - origin
        com_accel = accel + np.cross(alpha, lever) + np.cross(omega, np.cross(omega, lever))
        inertia = geo.world_inertias[i]
        forces.append(model.inertias[i].mass * com_accel)
        moments.append(inertia @ alpha + np.cross(omega, inertia @ omega))

    torque = np.zeros(n)
    f_child = np.zeros(3)
    n_child = np.zeros(3)
    for i in reversed(range(n)):
        axis = frames[i][:3, 2]
        joint_point = frames[i][:3, 3]
        origin = frames[i + 1][:3, 3]
        f_link = f_child + forces[i]
        n_link = (
            n_child
            + np.cross(origin - joint_point, f_child)
            + np.cross(geo.coms[i] - joint_point, forces[i])
            + moments[i]
        )
        if model.chain.rows[i].joint_kind == JointKind.REVOLUTE:
            torque[i] = n_link @ axis
        else:
            torque[i] = f_link @ axis
        f_child, n_child = f_link, n_link
    return torque


def bias_forces(model: DynamicModel, q: Sequence[float], qdot: Sequence[float]) -> np.ndarray:
    """C(q, q') q' + g(q) + friction."""
    q, qdot = _vectors(model, q, qdot)
    return _newton_euler(model, q, qdot, np.zeros(len(model)), model.gravity) + model.viscous_friction * qdot


def inverse_dynamics(
    model: DynamicModel, q: Sequence[float], qdot: Sequence[float], qddot: Sequence[float]
) -> np.ndarray:
    q, qdot, qddot = _vectors(model, q, qdot, qddot)
    return _newton_euler(model, q, qdot, qddot, model.gravity) + model.viscous_friction * qdot


def forward_dynamics(
    model: DynamicModel, q: Sequence[float], qdot: Sequence[float], tau: Sequence[float]
) -> np.ndarray:
    """q'' = M^-1 (tau - C q' - g) through a Cholesky solve."""
    q, qdot, tau = _vectors(model, q, qdot, tau, names=("q", "qdot", "tau"))
    mass = mass_matrix(model, q)
    if not np.all(np.isfinite(mass)):
        raise DegenerateModelError("mass matrix has non-finite entries")
    if np.linalg.cond(mass) > MAX_CONDITION:
        raise DegenerateModelError("mass matrix is numerically singular")
    rhs = tau - bias_forces(model, q, qdot)
    if not np.all(np.isfinite(rhs)):
        raise InvalidArgumentError("generalized forces overflowed")
    try:
        factor = scipy.linalg.cho_factor(mass)
    except np.linalg.LinAlgError as exc:
        raise DegenerateModelError("mass matrix is not positive definite") from exc
    return scipy.linalg.cho_solve(factor, rhs)


def integrate_step(model: DynamicModel, state: JointState, tau: Sequence[float], dt: float) -> JointState:
    """One classical RK4 step with tau held over the interval."""
    if not 0.0 < dt <= MAX_DT:
        raise InvalidArgumentError(f"dt must lie in (0, {MAX_DT}], got {dt}")
    tau = as_vector(tau, len(model), "tau")
    q, qd = state.q, state.qdot

    def deriv(q_, qd_):
        return qd_, forward_dynamics(model, q_, qd_, tau)

    k1q, k1v = deriv(q, qd)
    k2q, k2v = deriv(q + 0.5 * dt * k1q, qd + 0.5 * dt * k1v)
    k3q, k3v = deriv(q + 0.5 * dt * k2q, qd + 0.5 * dt * k2v)
    k4q, k4v = deriv(q + dt * k3q, qd + dt * k3v)
    q_next = q + dt / 6.0 * (k1q + 2.0 * k2q + 2.0 * k3q + k4q)
    qd_next = qd + dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
    return JointState(q_next, qd_next)
