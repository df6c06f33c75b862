"""Standard (distal) DH forward kinematics, geometric Jacobian and pseudoinverse."""

import logging
import math
from typing import List, Sequence

import numpy as np
import scipy.linalg

from core.errors import InvalidArgumentError, SingularityError
from core.utils import as_vector
from models.chain import KinematicChain
from models.geometry import RigidTransform, SpatialVelocity
from models.robot import DHRow, JointKind

logger = logging.getLogger(__name__)


def dh_matrix(row: DHRow, joint_value: float) -> np.ndarray:
    """4x4 RotZ(theta) TransZ(d) TransX(a) RotX(alpha) for one row."""
    if row.joint_kind == JointKind.REVOLUTE:
        theta, d = joint_value + row.theta_offset, row.d
    else:
        theta, d = row.theta_offset, joint_value + row.d
    ct, st = math.cos(theta), math.sin(theta)
    ca, sa = math.cos(row.alpha), math.sin(row.alpha)
    return np.array(
        [
            [ct, -st * ca, st * sa, row.a * ct],
            [st, ct * ca, -ct * sa, row.a * st],
            [0.0, sa, ca, d],
            [0.0, 0.0, 0.0, 1.0],
        ]
    )


def dh_transform(row: DHRow, joint_value: float) -> RigidTransform:
    if not math.isfinite(joint_value):
        raise InvalidArgumentError("joint value must be finite")
    return RigidTransform.from_matrix(dh_matrix(row, joint_value))


def frame_matrices(chain: KinematicChain, q: Sequence[float]) -> List[np.ndarray]:
    """Homogeneous frames [base, frame_0, ..., frame_{n-1}] (n + 1 entries)."""
    q = as_vector(q, len(chain), "q")
    frames = [chain.base_frame.matrix()]
    for row, value in zip(chain.rows, q):
        frames.append(frames[-1] @ dh_matrix(row, value))
    return frames


def forward_kinematics(chain: KinematicChain, q: Sequence[float]) -> List[RigidTransform]:
    """One transform per link frame; the last entry is the end-effector."""
    return [RigidTransform.from_matrix(frame) for frame in frame_matrices(chain, q)[1:]]


def end_effector(chain: KinematicChain, q: Sequence[float]) -> RigidTransform:
    return RigidTransform.from_matrix(frame_matrices(chain, q)[-1])


def point_jacobian(
    chain: KinematicChain, frames: List[np.ndarray], point: np.ndarray, link: int
) -> np.ndarray:
    """Geometric Jacobian (6 x n) of a point rigidly attached to `link`.

    Joint i moves about the z axis of frames[i] (the frame before its row);
    columns beyond `link` are zero.
    """
    revolute = chain.revolute_mask
    jac = np.zeros((6, len(chain)))
    for i in range(link + 1):
        z_axis = frames[i][:3, 2]
        if revolute[i]:
            jac[:3, i] = np.cross(z_axis, point - frames[i][:3, 3])
            jac[3:, i] = z_axis
        else:
            jac[:3, i] = z_axis
    return jac


def jacobian(chain: KinematicChain, q: Sequence[float]) -> np.ndarray:
    frames = frame_matrices(chain, q)
    return point_jacobian(chain, frames, frames[-1][:3, 3], len(chain) - 1)


def end_effector_twist(chain: KinematicChain, q: Sequence[float], qdot: Sequence[float]) -> SpatialVelocity:
    """World-frame linear and angular velocity of the end-effector, J(q) q'."""
    qdot = as_vector(qdot, len(chain), "qdot")
    return SpatialVelocity.from_twist(jacobian(chain, q) @ qdot)


def manipulability(jac: np.ndarray) -> float:
    """Yoshikawa measure sqrt(det(J J^T)); zero when J loses row rank."""
    return math.sqrt(max(np.linalg.det(jac @ jac.T), 0.0))


def damped_pseudoinverse(jac: np.ndarray, lam: float = 0.0) -> np.ndarray:
    """J^T (J J^T + lam^2 I)^-1."""
    jac = np.asarray(jac, dtype=float)
    if not math.isfinite(lam) or lam < 0.0:
        raise InvalidArgumentError("damping must be finite and non-negative")
    if not np.all(np.isfinite(jac)):
        raise InvalidArgumentError("Jacobian contains non-finite values")
    rows = jac.shape[0]
    if lam == 0.0 and np.linalg.matrix_rank(jac) < rows:
        raise SingularityError("Jacobian is rank deficient; use a positive damping factor")
    gram = jac @ jac.T + (lam * lam) * np.eye(rows)
    return scipy.linalg.solve(gram, jac, assume_a="pos").T


def max_reach(chain: KinematicChain) -> float:
    """Upper bound on end-effector distance from the base-frame origin."""
    reach = 0.0
    for row, (low, high) in zip(chain.rows, chain.limits):
        reach += abs(row.a) + abs(row.d)
        if row.joint_kind == JointKind.PRISMATIC:
            reach += max(abs(low), abs(high))
    return reach


def concat_chains(first: KinematicChain, second: KinematicChain) -> KinematicChain:
    """Mount `second` on the end-effector of `first`."""
    if not second.base_frame.almost_equal(RigidTransform.identity(), 1e-12):
        raise InvalidArgumentError("the appended chain must start at its own identity frame")
    return KinematicChain(
        rows=first.rows + second.rows,
        limits=np.vstack([first.limits, second.limits]),
        base_frame=first.base_frame,
    )
