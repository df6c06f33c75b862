import itertools

import numpy as np
import pytest

from core.errors import InvalidArgumentError
from core.task import FAILURES, HAPPY_PATH, INITIAL_STATE, TRANSITIONS, gripper_command, is_valid_trace, transition
from models.task import FailureReason, GripperState, ObjectSpec, Phase, TaskEvent, TaskState

ALL_STATES = [TaskState(phase) for phase in Phase if phase != Phase.FAILED] + [
    TaskState(Phase.FAILED, reason) for reason in FailureReason
]
OBJECT = ObjectSpec(width=0.05, required_effort=30.0)


def _replay(events, state=INITIAL_STATE):
    for event in events:
        state = transition(state, event)
    return state


def test_happy_path_reaches_done():
    assert _replay(HAPPY_PATH) == TaskState(Phase.DONE)
    assert is_valid_trace(HAPPY_PATH)


def test_happy_path_visits_every_working_phase_once():
    visited, state = [], INITIAL_STATE
    for event in HAPPY_PATH:
        visited.append(state.phase)
        state = transition(state, event)
    assert len(set(visited)) == len(visited) == len(Phase) - 2


@pytest.mark.parametrize("event,reason", list(FAILURES.items()))
def test_failure_events_carry_their_reason(event, reason):
    assert transition(TaskState(Phase.MOVE_BASE_TO_PICK), event) == TaskState(Phase.FAILED, reason)


def test_ik_failure_in_planning():
    state = _replay(HAPPY_PATH[:3])
    assert state.phase == Phase.PLAN_ARM_TO_GRASP
    failed = transition(state, TaskEvent.IK_FAILED)
    assert str(failed) == "Failed(ik_failed)"


def test_every_state_event_pair_is_total():
    for state, event in itertools.product(ALL_STATES, TaskEvent):
        nxt = transition(state, event)
        assert isinstance(nxt, TaskState)
        if state.terminal:
            assert nxt == state
        elif event in FAILURES:
            assert nxt.phase == Phase.FAILED
        elif (state.phase, event) in TRANSITIONS:
            assert nxt.phase == TRANSITIONS[(state.phase, event)]
        else:
            assert nxt == state


def test_random_event_streams_end_in_valid_states():
    rng = np.random.default_rng(5)
    events = list(TaskEvent)
    for _ in range(200):
        state = INITIAL_STATE
        for index in rng.integers(0, len(events), 50):
            state = transition(state, events[index])
        if state.phase == Phase.FAILED:
            assert state.reason is not None
        else:
            assert state.reason is None


def test_out_of_order_trace_is_invalid():
    assert not is_valid_trace([TaskEvent.STATUS_OK, TaskEvent.BASE_ARRIVED])
    assert not is_valid_trace(list(HAPPY_PATH) + [TaskEvent.STATUS_OK])
    assert is_valid_trace([TaskEvent.STATUS_OK, TaskEvent.PATH_FAILED])


def test_failed_state_requires_reason():
    with pytest.raises(ValueError):
        TaskState(Phase.FAILED)
    with pytest.raises(ValueError):
        TaskState(Phase.DONE, FailureReason.IK_FAILED)


def test_closing_on_an_object_with_enough_effort_holds_it():
    g = gripper_command(GripperState(0.1), 0.0, 60.0, OBJECT)
    assert g.opening == pytest.approx(0.05)
    assert g.applied_effort == 60.0 and g.holding


def test_closing_with_too_little_effort_slips():
    g = gripper_command(GripperState(0.1), 0.0, 10.0, OBJECT)
    assert g.opening == pytest.approx(0.05) and not g.holding


def test_closing_on_nothing():
    g = gripper_command(GripperState(0.1), 0.0, 60.0)
    assert g.opening == 0.0 and not g.holding and g.applied_effort == 0.0


def test_opening_releases():
    held = gripper_command(GripperState(0.1), 0.0, 60.0, OBJECT)
    released = gripper_command(held, 0.1, 0.0)
    assert released.opening == 0.1 and not released.holding


def test_commands_outside_the_stroke_are_rejected():
    for target in (-0.01, 0.2):
        with pytest.raises(InvalidArgumentError):
            gripper_command(GripperState(0.1), target, 10.0)


def test_holding_only_with_enough_effort():
    rng = np.random.default_rng(8)
    for _ in range(200):
        effort = rng.uniform(0.0, 60.0)
        obj = ObjectSpec(width=rng.uniform(0.01, 0.09), required_effort=rng.uniform(0.0, 60.0))
        g = gripper_command(GripperState(0.1), rng.uniform(0.0, 0.1), effort, obj)
        assert not g.holding or g.applied_effort >= obj.required_effort
        assert 0.0 <= g.opening <= g.max_opening
