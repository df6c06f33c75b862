from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np


@dataclass(frozen=True)
class BoundaryCondition:
    q0: float
    v0: float
    a0: float
    qf: float
    vf: float
    af: float
    t0: float
    tf: float

    @classmethod
    def rest_to_rest(cls, q0: float, qf: float, t0: float, tf: float) -> "BoundaryCondition":
        return cls(q0, 0.0, 0.0, qf, 0.0, 0.0, t0, tf)


@dataclass(frozen=True, eq=False)
class QuinticSegment:
    """q(t) = sum coeffs[k] * (t - t0)^k on [t0, tf]."""

    coeffs: np.ndarray
    t0: float
    tf: float

    def __post_init__(self):
        coeffs = np.array(self.coeffs, dtype=float).reshape(6)
        coeffs.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def duration(self) -> float:
        return self.tf - self.t0


@dataclass(frozen=True)
class TrajectorySample:
    q: Union[float, np.ndarray]
    v: Union[float, np.ndarray]
    a: Union[float, np.ndarray]
    clamped: bool = False


@dataclass(frozen=True, eq=False)
class JointTrajectory:
    """One quintic per joint over a shared window."""

    segments: Tuple[QuinticSegment, ...]

    def __post_init__(self):
        segments = tuple(self.segments)
        if not segments:
            raise ValueError("a joint trajectory needs at least one segment")
        t0, tf = segments[0].t0, segments[0].tf
        if any(seg.t0 != t0 or seg.tf != tf for seg in segments):
            raise ValueError("all segments must share the same time window")
        object.__setattr__(self, "segments", segments)

    @property
    def t0(self) -> float:
        return self.segments[0].t0

    @property
    def tf(self) -> float:
        return self.segments[0].tf

    @property
    def duration(self) -> float:
        return self.tf - self.t0

    def __len__(self) -> int:
        return len(self.segments)
