"""Pick-and-place transition table and the gripper model."""

import logging
from typing import Dict, Iterable, Optional, Tuple

from core.errors import InvalidArgumentError
from models.task import FailureReason, GripperState, ObjectSpec, Phase, TaskEvent, TaskState

logger = logging.getLogger(__name__)

TRANSITIONS: Dict[Tuple[Phase, TaskEvent], Phase] = {
    (Phase.CHECK_STATUS, TaskEvent.STATUS_OK): Phase.PLAN_BASE_PATH,
    (Phase.PLAN_BASE_PATH, TaskEvent.PATH_FOUND): Phase.MOVE_BASE_TO_PICK,
    (Phase.MOVE_BASE_TO_PICK, TaskEvent.BASE_ARRIVED): Phase.PLAN_ARM_TO_GRASP,
    (Phase.PLAN_ARM_TO_GRASP, TaskEvent.IK_SOLVED): Phase.EXECUTE_ARM_TRAJECTORY,
    (Phase.EXECUTE_ARM_TRAJECTORY, TaskEvent.ARM_DONE): Phase.CLOSE_GRIPPER,
    (Phase.CLOSE_GRIPPER, TaskEvent.GRASP_SECURED): Phase.TUCK_ARM,
    (Phase.TUCK_ARM, TaskEvent.ARM_DONE): Phase.MOVE_BASE_TO_PLACE,
    (Phase.MOVE_BASE_TO_PLACE, TaskEvent.BASE_ARRIVED): Phase.EXTEND_ARM,
    (Phase.EXTEND_ARM, TaskEvent.ARM_DONE): Phase.OPEN_GRIPPER,
    (Phase.OPEN_GRIPPER, TaskEvent.RELEASE_DONE): Phase.DONE,
}

FAILURES: Dict[TaskEvent, FailureReason] = {
    TaskEvent.PATH_FAILED: FailureReason.PATH_FAILED,
    TaskEvent.BASE_TIMEOUT: FailureReason.BASE_TIMEOUT,
    TaskEvent.IK_FAILED: FailureReason.IK_FAILED,
    TaskEvent.ARM_DIVERGED: FailureReason.ARM_DIVERGED,
    TaskEvent.GRASP_SLIPPED: FailureReason.GRASP_SLIPPED,
}

HAPPY_PATH = (
    TaskEvent.STATUS_OK,
    TaskEvent.PATH_FOUND,
    TaskEvent.BASE_ARRIVED,
    TaskEvent.IK_SOLVED,
    TaskEvent.ARM_DONE,
    TaskEvent.GRASP_SECURED,
    TaskEvent.ARM_DONE,
    TaskEvent.BASE_ARRIVED,
    TaskEvent.ARM_DONE,
    TaskEvent.RELEASE_DONE,
)

INITIAL_STATE = TaskState(Phase.CHECK_STATUS)


def transition(state: TaskState, event: TaskEvent) -> TaskState:
    if state.terminal:
        return state
    if event in FAILURES:
        return TaskState(Phase.FAILED, FAILURES[event])
    nxt = TRANSITIONS.get((state.phase, event))
    if nxt is None:
        logger.warning("event %s ignored in state %s", event.value, state)
        return state
    return TaskState(nxt)


def is_valid_trace(events: Iterable[TaskEvent], start: TaskState = INITIAL_STATE) -> bool:
    """True when every event moves the machine along a table entry or into Failed."""
    state = start
    for event in events:
        if state.terminal:
            return False
        if event not in FAILURES and (state.phase, event) not in TRANSITIONS:
            return False
        state = transition(state, event)
    return True


def gripper_command(
    g: GripperState,
    target_opening: float,
    max_effort: float,
    obj: Optional[ObjectSpec] = None,
) -> GripperState:
    """Position/effort command; `obj` is the object currently between the fingers, if any."""
    if not 0.0 <= target_opening <= g.max_opening:
        raise InvalidArgumentError(f"target opening {target_opening} outside [0, {g.max_opening}]")
    if max_effort < 0:
        raise InvalidArgumentError("max effort must be non-negative")
    if obj is not None and target_opening < obj.width:
        holding = max_effort >= obj.required_effort
        if not holding:
            logger.info("grip effort %.1f N below the %.1f N the object needs", max_effort, obj.required_effort)
        return GripperState(min(obj.width, g.max_opening), max_effort, holding, g.max_opening)
    return GripperState(target_opening, 0.0, False, g.max_opening)
