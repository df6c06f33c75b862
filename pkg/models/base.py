import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

from core.utils import normalize_angle
from models.robot import BaseGainsSpec, BaseParamsSpec


@dataclass(frozen=True)
class BaseParams:
    wheel_radius: float
    track_width: float
    v_max: float
    w_max: float
    a_max: float

    def __post_init__(self):
        for name in ("wheel_radius", "track_width", "v_max", "w_max", "a_max"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")

    @classmethod
    def from_spec(cls, spec: BaseParamsSpec) -> "BaseParams":
        return cls(**spec.model_dump())


@dataclass(frozen=True)
class BaseGains:
    kp_dist: float = 0.0
    ki_dist: float = 0.0
    kd_dist: float = 0.0
    kp_head: float = 0.0
    ki_head: float = 0.0
    kd_head: float = 0.0
    kff: float = 0.0

    def __post_init__(self):
        if any(value < 0 for value in vars(self).values()):
            raise ValueError("base gains must be non-negative")

    @classmethod
    def from_spec(cls, spec: BaseGainsSpec) -> "BaseGains":
        return cls(**spec.model_dump())


@dataclass(frozen=True)
class BaseState:
    """Planar pose and body velocities; theta is kept in (-pi, pi]."""

    x: float
    y: float
    theta: float
    v: float = 0.0
    w: float = 0.0

    def __post_init__(self):
        if not all(math.isfinite(value) for value in (self.x, self.y, self.theta, self.v, self.w)):
            raise ValueError("base state must be finite")
        object.__setattr__(self, "theta", normalize_angle(self.theta))

    def pose(self) -> Tuple[float, float, float]:
        return self.x, self.y, self.theta


@dataclass(frozen=True)
class PidMemory:
    """Integrator and previous-error state carried between `follow` calls."""

    integral_dist: float = 0.0
    integral_head: float = 0.0
    prev_dist: Optional[float] = None
    prev_head: Optional[float] = None
    prev_t: Optional[float] = None
    bearing_mode: Optional[bool] = None


@dataclass(frozen=True)
class Reference:
    x: float
    y: float
    heading: float
    speed: float


@dataclass(frozen=True)
class FollowCommand:
    v: float
    w: float
    at_goal: bool
    e_d: float = 0.0
    e_theta: float = 0.0
    reference: Optional[Reference] = None
    memory: PidMemory = field(default_factory=PidMemory)

    @property
    def command(self) -> Tuple[float, float]:
        return self.v, self.w


BASE_LOG_HEADER = ["t", "x", "y", "theta", "v", "w", "ref_x", "ref_y", "e_d", "e_theta"]


@dataclass
class BaseRun:
    """Outcome of driving the base along a timed path."""

    final_state: BaseState
    arrived: bool
    sim_time: float
    rows: List[Tuple[float, ...]] = field(default_factory=list)
    max_residual: float = 0.0
    rms_cross_track: float = 0.0
    final_error: float = math.inf

    def to_dict(self) -> dict:
        return {
            "arrived": self.arrived,
            "sim_time": self.sim_time,
            "final_pose": list(self.final_state.pose()),
            "final_error": self.final_error,
            "max_constraint_residual": self.max_residual,
            "rms_cross_track": self.rms_cross_track,
            "steps": len(self.rows),
        }
