import math
from enum import Enum
from typing import Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from models.geometry import PoseSpec


class JointKind(str, Enum):
    REVOLUTE = "revolute"
    PRISMATIC = "prismatic"


class DHRow(BaseModel):
    """One standard (distal) DH row: RotZ(theta) TransZ(d) TransX(a) RotX(alpha)."""

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    d: float = 0.0
    theta_offset: float = 0.0
    a: float = 0.0
    alpha: float = 0.0
    joint_kind: JointKind = Field(default=JointKind.REVOLUTE, alias="kind")

    @field_validator("d", "theta_offset", "a", "alpha")
    @classmethod
    def _finite(cls, value: float) -> float:
        if not math.isfinite(value):
            raise ValueError("DH parameters must be finite")
        return value


class InertialSpec(BaseModel):
    """Per-link inertial block: inertia = [ixx, iyy, izz, ixy, ixz, iyz] about the com."""

    mass: float = Field(gt=0)
    com: List[float] = Field(default=[0.0, 0.0, 0.0], min_length=3, max_length=3)
    inertia: List[float] = Field(default=[0.0] * 6, min_length=6, max_length=6)


class GainSpec(BaseModel):
    kp: List[float]
    kv: List[float]
    ki: List[float]
    integral_limit: List[float]


class BaseParamsSpec(BaseModel):
    wheel_radius: float = Field(gt=0)
    track_width: float = Field(gt=0)
    v_max: float = Field(gt=0)
    w_max: float = Field(gt=0)
    a_max: float = Field(gt=0)


class BaseGainsSpec(BaseModel):
    kp_dist: float = Field(default=1.5, ge=0)
    ki_dist: float = Field(default=0.0, ge=0)
    kd_dist: float = Field(default=0.0, ge=0)
    kp_head: float = Field(default=4.0, ge=0)
    ki_head: float = Field(default=0.0, ge=0)
    kd_head: float = Field(default=0.5, ge=0)
    kff: float = Field(default=0.0, ge=0)


class BaseSpec(BaseModel):
    params: BaseParamsSpec
    gains: BaseGainsSpec = BaseGainsSpec()


class GripperSpec(BaseModel):
    max_opening: float = Field(default=0.1, gt=0)
    max_effort: float = Field(default=60.0, ge=0)


class RobotDescription(BaseModel):
    """Robot file contents (`robot.json`)."""

    schema_version: Literal[1] = 1
    name: str
    dh: List[DHRow] = Field(min_length=1)
    limits: List[Tuple[float, float]]
    base_frame: PoseSpec = PoseSpec(xyz=[0.0, 0.0, 0.0])
    inertial: List[InertialSpec] = []
    gravity: List[float] = Field(default=[0.0, 0.0, -9.81], min_length=3, max_length=3)
    velocity_limits: Optional[List[float]] = None
    acceleration_limits: Optional[List[float]] = None
    torque_limits: Optional[List[float]] = None
    viscous_friction: Optional[List[float]] = None
    arm_gains: Optional[GainSpec] = None
    base: Optional[BaseSpec] = None
    gripper: GripperSpec = GripperSpec()
    poses: Dict[str, List[float]] = {}

    @model_validator(mode="after")
    def _check_lengths(self) -> "RobotDescription":
        n = len(self.dh)
        if len(self.limits) != n:
            raise ValueError(f"limits has {len(self.limits)} rows, dh has {n}")
        for index, (low, high) in enumerate(self.limits):
            if not low < high:
                raise ValueError(f"limits[{index}]: min must be below max")
        if self.inertial and len(self.inertial) != n:
            raise ValueError(f"inertial has {len(self.inertial)} rows, dh has {n}")
        for field in ("velocity_limits", "acceleration_limits", "torque_limits", "viscous_friction"):
            values = getattr(self, field)
            if values is not None and len(values) != n:
                raise ValueError(f"{field} must have {n} entries")
        if self.arm_gains is not None:
            for field in ("kp", "kv", "ki", "integral_limit"):
                if len(getattr(self.arm_gains, field)) != n:
                    raise ValueError(f"arm_gains.{field} must have {n} entries")
        for name, pose in self.poses.items():
            if len(pose) != n:
                raise ValueError(f"poses.{name} must have {n} entries")
        return self
