from dataclasses import dataclass
from typing import List, Sequence

import numpy as np
from pydantic import BaseModel, Field
from scipy.spatial.transform import Rotation

ORTHONORMAL_TOL = 1e-9


def _frozen(values, shape) -> np.ndarray:
    array = np.array(values, dtype=float).reshape(shape)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class RigidTransform:
    """Rotation + translation pair; composes with `@`."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        rotation = _frozen(self.rotation, (3, 3))
        translation = _frozen(self.translation, (3,))
        if not (np.all(np.isfinite(rotation)) and np.all(np.isfinite(translation))):
            raise ValueError("rigid transform contains non-finite values")
        if np.max(np.abs(rotation.T @ rotation - np.eye(3))) > ORTHONORMAL_TOL:
            raise ValueError("rotation block is not orthonormal")
        if abs(np.linalg.det(rotation) - 1.0) > ORTHONORMAL_TOL:
            raise ValueError("rotation block must have determinant +1")
        object.__setattr__(self, "rotation", rotation)
        object.__setattr__(self, "translation", translation)

    @classmethod
    def identity(cls) -> "RigidTransform":
        return cls(np.eye(3), np.zeros(3))

    @classmethod
    def from_matrix(cls, matrix: np.ndarray) -> "RigidTransform":
        matrix = np.asarray(matrix, dtype=float)
        return cls(matrix[:3, :3], matrix[:3, 3])

    @classmethod
    def from_xyz_rpy(cls, xyz: Sequence[float], rpy: Sequence[float]) -> "RigidTransform":
        """Fixed-axis roll/pitch/yaw: R = Rz(yaw) Ry(pitch) Rx(roll)."""
        rotation = Rotation.from_euler("xyz", rpy).as_matrix()
        return cls(rotation, xyz)

    @classmethod
    def planar(cls, x: float, y: float, theta: float) -> "RigidTransform":
        return cls.from_xyz_rpy((x, y, 0.0), (0.0, 0.0, theta))

    def matrix(self) -> np.ndarray:
        out = np.eye(4)
        out[:3, :3] = self.rotation
        out[:3, 3] = self.translation
        return out

    def inverse(self) -> "RigidTransform":
        rotation_t = self.rotation.T
        return RigidTransform(rotation_t, -rotation_t @ self.translation)

    def apply(self, point: Sequence[float]) -> np.ndarray:
        return self.rotation @ np.asarray(point, dtype=float) + self.translation

    def rpy(self) -> np.ndarray:
        return Rotation.from_matrix(self.rotation).as_euler("xyz")

    def almost_equal(self, other: "RigidTransform", tol: float = 1e-9) -> bool:
        return bool(
            np.allclose(self.rotation, other.rotation, atol=tol)
            and np.allclose(self.translation, other.translation, atol=tol)
        )

    def __matmul__(self, other: "RigidTransform") -> "RigidTransform":
        return RigidTransform(
            self.rotation @ other.rotation,
            self.rotation @ other.translation + self.translation,
        )

    def to_dict(self) -> dict:
        return {
            "xyz": [float(v) for v in self.translation],
            "rpy": [float(v) for v in self.rpy()],
            "matrix": [[float(v) for v in row] for row in self.matrix()],
        }


@dataclass(frozen=True, eq=False)
class SpatialVelocity:
    linear: np.ndarray
    angular: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "linear", _frozen(self.linear, (3,)))
        object.__setattr__(self, "angular", _frozen(self.angular, (3,)))

    @classmethod
    def from_twist(cls, twist: np.ndarray) -> "SpatialVelocity":
        twist = np.asarray(twist, dtype=float)
        return cls(twist[:3], twist[3:])

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.linear, self.angular])

    def to_dict(self) -> dict:
        return {"linear": [float(v) for v in self.linear], "angular": [float(v) for v in self.angular]}


class PoseSpec(BaseModel):
    """World pose as written in JSON files."""

    xyz: List[float] = Field(min_length=3, max_length=3)
    rpy: List[float] = Field(default=[0.0, 0.0, 0.0], min_length=3, max_length=3)

    def to_transform(self) -> RigidTransform:
        return RigidTransform.from_xyz_rpy(self.xyz, self.rpy)
