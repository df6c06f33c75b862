from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

from models.geometry import RigidTransform
from models.robot import DHRow, InertialSpec, JointKind, RobotDescription


def _readonly(values, shape=None) -> np.ndarray:
    array = np.array(values, dtype=float)
    if shape is not None:
        array = array.reshape(shape)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class KinematicChain:
    """Ordered DH rows with joint limits; row i is moved by joint i."""

    rows: Tuple[DHRow, ...]
    limits: np.ndarray
    base_frame: RigidTransform = field(default_factory=RigidTransform.identity)

    def __post_init__(self):
        rows = tuple(self.rows)
        if len(rows) < 1:
            raise ValueError("a kinematic chain needs at least one DH row")
        limits = _readonly(self.limits, (len(rows), 2))
        if not np.all(np.isfinite(limits)):
            raise ValueError("joint limits must be finite")
        if np.any(limits[:, 0] >= limits[:, 1]):
            raise ValueError("joint limits need min < max for every joint")
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "limits", limits)

    @classmethod
    def from_description(cls, description: RobotDescription) -> "KinematicChain":
        return cls(
            rows=tuple(description.dh),
            limits=np.array(description.limits, dtype=float),
            base_frame=description.base_frame.to_transform(),
        )

    def __len__(self) -> int:
        return len(self.rows)

    @property
    def lower(self) -> np.ndarray:
        return self.limits[:, 0]

    @property
    def upper(self) -> np.ndarray:
        return self.limits[:, 1]

    @property
    def revolute_mask(self) -> np.ndarray:
        return np.array([row.joint_kind == JointKind.REVOLUTE for row in self.rows])

    def within_limits(self, q: Sequence[float], tol: float = 0.0) -> bool:
        q = np.asarray(q, dtype=float)
        return bool(np.all(q >= self.lower - tol) and np.all(q <= self.upper + tol))

    def clamp(self, q: Sequence[float]) -> np.ndarray:
        return np.clip(np.asarray(q, dtype=float), self.lower, self.upper)

    def random_configuration(self, rng: np.random.Generator) -> np.ndarray:
        return rng.uniform(self.lower, self.upper)


@dataclass(frozen=True, eq=False)
class LinkInertia:
    mass: float
    com: np.ndarray
    inertia_tensor: np.ndarray

    def __post_init__(self):
        if not self.mass > 0:
            raise ValueError("link mass must be positive")
        com = _readonly(self.com, (3,))
        tensor = _readonly(self.inertia_tensor, (3, 3))
        if np.max(np.abs(tensor - tensor.T)) > 1e-12:
            raise ValueError("inertia tensor must be symmetric")
        principal = np.linalg.eigvalsh(tensor)
        if principal[0] < -1e-12:
            raise ValueError("inertia tensor must be positive semidefinite")
        i1, i2, i3 = principal
        if i1 + i2 < i3 - 1e-12:
            raise ValueError("principal moments violate the triangle inequality")
        object.__setattr__(self, "com", com)
        object.__setattr__(self, "inertia_tensor", tensor)

    @classmethod
    def from_spec(cls, spec: InertialSpec) -> "LinkInertia":
        ixx, iyy, izz, ixy, ixz, iyz = spec.inertia
        tensor = np.array([[ixx, ixy, ixz], [ixy, iyy, iyz], [ixz, iyz, izz]])
        return cls(spec.mass, np.array(spec.com), tensor)

    @classmethod
    def point_mass(cls, mass: float, com: Sequence[float] = (0.0, 0.0, 0.0)) -> "LinkInertia":
        return cls(mass, np.asarray(com, dtype=float), np.zeros((3, 3)))


@dataclass(frozen=True, eq=False)
class DynamicModel:
    chain: KinematicChain
    inertias: Tuple[LinkInertia, ...]
    gravity: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, -9.81]))
    viscous_friction: Optional[np.ndarray] = None

    def __post_init__(self):
        inertias = tuple(self.inertias)
        n = len(self.chain)
        if len(inertias) != n:
            raise ValueError(f"{len(inertias)} link inertias for a {n}-joint chain")
        friction = np.zeros(n) if self.viscous_friction is None else self.viscous_friction
        object.__setattr__(self, "inertias", inertias)
        object.__setattr__(self, "gravity", _readonly(self.gravity, (3,)))
        object.__setattr__(self, "viscous_friction", _readonly(friction, (n,)))

    @classmethod
    def from_description(cls, description: RobotDescription) -> "DynamicModel":
        if not description.inertial:
            raise ValueError(f"robot '{description.name}' has no inertial block")
        return cls(
            chain=KinematicChain.from_description(description),
            inertias=tuple(LinkInertia.from_spec(spec) for spec in description.inertial),
            gravity=np.array(description.gravity),
            viscous_friction=(
                None if description.viscous_friction is None else np.array(description.viscous_friction)
            ),
        )

    def with_gravity(self, gravity: Sequence[float]) -> "DynamicModel":
        return DynamicModel(self.chain, self.inertias, np.asarray(gravity, dtype=float), self.viscous_friction)

    def __len__(self) -> int:
        return len(self.chain)


@dataclass(frozen=True, eq=False)
class JointState:
    """Arm state (q, qdot) advanced by the integrator."""

    q: np.ndarray
    qdot: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "q", _readonly(self.q).reshape(-1))
        object.__setattr__(self, "qdot", _readonly(self.qdot).reshape(-1))

    @classmethod
    def at_rest(cls, q: Sequence[float]) -> "JointState":
        q = np.asarray(q, dtype=float)
        return cls(q, np.zeros_like(q))

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.q)) and np.all(np.isfinite(self.qdot)))
