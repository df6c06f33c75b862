from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, Field

from models.geometry import PoseSpec
from models.grid import Connectivity, HeuristicKind
from models.robot import BaseGainsSpec, GainSpec


class Phase(str, Enum):
    CHECK_STATUS = "CheckStatus"
    PLAN_BASE_PATH = "PlanBasePath"
    MOVE_BASE_TO_PICK = "MoveBaseToPick"
    PLAN_ARM_TO_GRASP = "PlanArmToGrasp"
    EXECUTE_ARM_TRAJECTORY = "ExecuteArmTrajectory"
    CLOSE_GRIPPER = "CloseGripper"
    TUCK_ARM = "TuckArm"
    MOVE_BASE_TO_PLACE = "MoveBaseToPlace"
    EXTEND_ARM = "ExtendArm"
    OPEN_GRIPPER = "OpenGripper"
    DONE = "Done"
    FAILED = "Failed"


class TaskEvent(str, Enum):
    STATUS_OK = "StatusOk"
    PATH_FOUND = "PathFound"
    PATH_FAILED = "PathFailed"
    BASE_ARRIVED = "BaseArrived"
    BASE_TIMEOUT = "BaseTimeout"
    IK_SOLVED = "IkSolved"
    IK_FAILED = "IkFailed"
    ARM_DONE = "ArmDone"
    ARM_DIVERGED = "ArmDiverged"
    GRASP_SECURED = "GraspSecured"
    GRASP_SLIPPED = "GraspSlipped"
    RELEASE_DONE = "ReleaseDone"


class FailureReason(str, Enum):
    PATH_FAILED = "path_failed"
    BASE_TIMEOUT = "base_timeout"
    IK_FAILED = "ik_failed"
    ARM_DIVERGED = "arm_diverged"
    GRASP_SLIPPED = "grasp_slipped"


@dataclass(frozen=True)
class TaskState:
    phase: Phase
    reason: Optional[FailureReason] = None

    def __post_init__(self):
        if (self.reason is not None) != (self.phase == Phase.FAILED):
            raise ValueError("a failure reason is carried exactly by the Failed state")

    @property
    def terminal(self) -> bool:
        return self.phase in (Phase.DONE, Phase.FAILED)

    def __str__(self) -> str:
        if self.reason is not None:
            return f"{self.phase.value}({self.reason.value})"
        return self.phase.value


@dataclass(frozen=True)
class GripperState:
    opening: float
    applied_effort: float = 0.0
    holding: bool = False
    max_opening: float = 0.1

    def __post_init__(self):
        if not 0.0 <= self.opening <= self.max_opening:
            raise ValueError(f"opening {self.opening} outside [0, {self.max_opening}]")
        if self.applied_effort < 0:
            raise ValueError("applied effort must be non-negative")

    def to_dict(self) -> dict:
        return {"opening": self.opening, "applied_effort": self.applied_effort, "holding": self.holding}


class ObjectSpec(BaseModel):
    width: float = Field(gt=0)
    required_effort: float = Field(ge=0)


class PlannerSpec(BaseModel):
    connectivity: Connectivity = Connectivity.EIGHT
    heuristic: HeuristicKind = HeuristicKind.EUCLIDEAN


class ScenarioSpec(BaseModel):
    """Scenario file contents (`scenario.json`); paths are relative to the file."""

    schema_version: Literal[1] = 1
    robot: str
    map: str
    start: Tuple[float, float, float]
    pick_base_goal: Tuple[float, float, float]
    place_base_goal: Tuple[float, float, float]
    pick_pose: PoseSpec
    place_pose: PoseSpec
    object: ObjectSpec
    grip_effort: float = Field(default=60.0, ge=0)
    planner: PlannerSpec = PlannerSpec()
    base_speed: float = Field(default=0.5, gt=0)
    base_dt: float = Field(default=0.01, gt=0, le=0.05)
    arm_dt: float = Field(default=0.002, gt=0, le=0.01)
    ik_budget_ms: float = Field(default=200.0, gt=0)
    gravity_comp: bool = True
    seed: int = Field(default=0, ge=0, lt=2**64)
    arm_gains: Optional[GainSpec] = None
    base_gains: Optional[BaseGainsSpec] = None


class PhaseRecord(BaseModel):
    phase: str
    event: str
    sim_time: float
    details: Dict[str, Any] = {}


class TaskReport(BaseModel):
    """Outcome of one scenario run; holds simulated quantities only."""

    final_state: str
    reason: Optional[str] = None
    events: List[str] = []
    phases: List[PhaseRecord] = []
    total_sim_time: float = 0.0
    seed: int = 0
    gripper: Dict[str, Any] = {}
    object_position: List[float] = []

    @property
    def succeeded(self) -> bool:
        return self.final_state == Phase.DONE.value
