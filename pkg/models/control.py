from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from models.chain import JointState
from models.robot import GainSpec

DEFAULT_INTEGRAL_LIMIT = 2.0


def _readonly(values) -> np.ndarray:
    array = np.array(values, dtype=float).reshape(-1)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class PidGains:
    """Per-joint K_p, K_v, K_i and the integral clamp."""

    kp: np.ndarray
    kv: np.ndarray
    ki: np.ndarray
    integral_limit: np.ndarray

    def __post_init__(self):
        arrays = [_readonly(getattr(self, name)) for name in ("kp", "kv", "ki", "integral_limit")]
        if len({a.shape for a in arrays}) != 1:
            raise ValueError("kp, kv, ki and integral_limit must have equal lengths")
        if any(np.any(a < 0) for a in arrays[:3]):
            raise ValueError("gains must be non-negative")
        if np.any(arrays[3] <= 0):
            raise ValueError("integral_limit must be positive")
        for name, array in zip(("kp", "kv", "ki", "integral_limit"), arrays):
            object.__setattr__(self, name, array)

    @classmethod
    def uniform(cls, joints: int, kp: float, kv: float, ki: float = 0.0, limit: float = DEFAULT_INTEGRAL_LIMIT):
        return cls(np.full(joints, kp), np.full(joints, kv), np.full(joints, ki), np.full(joints, limit))

    @classmethod
    def from_spec(cls, spec: GainSpec) -> "PidGains":
        return cls(spec.kp, spec.kv, spec.ki, spec.integral_limit)

    def scaled(self, factor: float) -> "PidGains":
        """Scale kp and kv together."""
        return PidGains(self.kp * factor, self.kv * factor, self.ki, self.integral_limit)

    def __len__(self) -> int:
        return len(self.kp)


@dataclass(frozen=True, eq=False)
class TrackingSample:
    t: float
    q_ref: np.ndarray
    q_act: np.ndarray
    v_ref: np.ndarray
    v_act: np.ndarray
    error: np.ndarray
    torque: np.ndarray


@dataclass
class TrackingLog:
    dt: float
    samples: List[TrackingSample] = field(default_factory=list)
    saturation_events: int = 0
    final_state: Optional[JointState] = None

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.samples])

    def stack(self, name: str) -> np.ndarray:
        """(steps x joints) array of one sample field."""
        return np.array([getattr(s, name) for s in self.samples])

    def max_abs_error(self) -> float:
        if not self.samples:
            return 0.0
        return float(np.max(np.abs(self.stack("error"))))

    def header(self) -> List[str]:
        joints = len(self.samples[0].q_ref) if self.samples else 0
        columns = ["t"]
        for i in range(joints):
            columns += [f"q_ref_{i}", f"q_act_{i}", f"v_ref_{i}", f"v_act_{i}", f"tau_{i}"]
        return columns

    def rows(self):
        for s in self.samples:
            row = [s.t]
            for i in range(len(s.q_ref)):
                row += [s.q_ref[i], s.q_act[i], s.v_ref[i], s.v_act[i], s.torque[i]]
            yield row

    def summary(self) -> dict:
        return {
            "steps": len(self.samples),
            "duration": float(self.samples[-1].t - self.samples[0].t) if self.samples else 0.0,
            "max_abs_error": self.max_abs_error(),
            "saturation_events": self.saturation_events,
        }
