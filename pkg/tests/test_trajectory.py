import math

import numpy as np
import pytest
from numpy.polynomial import polynomial as P

from core.errors import DegenerateDurationError, InvalidArgumentError, JointLimitError
from core.trajectory import (
    evaluate,
    evaluate_trajectory,
    max_jerk,
    peak_acceleration,
    peak_velocity,
    plan_joint_trajectory,
    quintic_coefficients,
    sample_trajectory,
    trajectory_header,
    trajectory_rows,
)
from models.trajectory import BoundaryCondition


def test_unit_rest_to_rest_coefficients():
    seg = quintic_coefficients(BoundaryCondition.rest_to_rest(0.0, 1.0, 0.0, 1.0))
    np.testing.assert_allclose(seg.coeffs, [0, 0, 0, 10, -15, 6], atol=1e-12)


def test_boundary_conditions_hold_for_random_segments():
    rng = np.random.default_rng(11)
    for _ in range(1000):
        q0, v0, a0, qf, vf, af = rng.uniform(-1.0, 1.0, 6)
        t0 = rng.uniform(0.0, 2.0)
        tf = t0 + rng.uniform(0.5, 3.0)
        seg = quintic_coefficients(BoundaryCondition(q0, v0, a0, qf, vf, af, t0, tf))
        start, end = evaluate(seg, t0), evaluate(seg, tf)
        np.testing.assert_allclose([start.q, start.v, start.a], [q0, v0, a0], atol=1e-9)
        np.testing.assert_allclose([end.q, end.v, end.a], [qf, vf, af], atol=1e-9)


def test_local_time_keeps_late_windows_exact():
    seg = quintic_coefficients(BoundaryCondition.rest_to_rest(0.0, 1.0, 1000.0, 1001.0))
    assert evaluate(seg, 1000.5).q == pytest.approx(0.5, abs=1e-12)


def test_invalid_windows():
    with pytest.raises(InvalidArgumentError):
        quintic_coefficients(BoundaryCondition.rest_to_rest(0.0, 1.0, 1.0, 1.0))
    with pytest.raises(InvalidArgumentError):
        quintic_coefficients(BoundaryCondition.rest_to_rest(0.0, 1.0, 2.0, 1.0))
    with pytest.raises(DegenerateDurationError):
        quintic_coefficients(BoundaryCondition.rest_to_rest(0.0, 1.0, 0.0, 1e-8))
    with pytest.raises(InvalidArgumentError):
        quintic_coefficients(BoundaryCondition.rest_to_rest(math.nan, 1.0, 0.0, 1.0))


def test_evaluation_outside_the_window_is_clamped():
    seg = quintic_coefficients(BoundaryCondition.rest_to_rest(0.0, 1.0, 0.0, 1.0))
    after = evaluate(seg, 2.0)
    assert after.clamped and after.q == pytest.approx(1.0) and after.v == pytest.approx(0.0, abs=1e-12)
    before = evaluate(seg, -1.0)
    assert before.clamped and before.q == pytest.approx(0.0)
    assert not evaluate(seg, 0.5).clamped


def test_peaks_of_the_unit_profile():
    seg = quintic_coefficients(BoundaryCondition.rest_to_rest(0.0, 1.0, 0.0, 1.0))
    assert peak_velocity(seg) == pytest.approx(1.875, rel=1e-9)
    assert peak_acceleration(seg) == pytest.approx(10.0 / math.sqrt(3.0), rel=1e-9)
    assert max_jerk(seg) == pytest.approx(60.0, rel=1e-9)


def test_derivatives_are_consistent():
    seg = quintic_coefficients(BoundaryCondition(0.2, -0.5, 1.0, 1.3, 0.4, -2.0, 0.0, 2.0))
    vel = P.polyder(seg.coeffs)
    for t in np.linspace(0.0, 2.0, 9):
        h = 1e-6
        numeric = (P.polyval(t + h, seg.coeffs) - P.polyval(t - h, seg.coeffs)) / (2 * h)
        assert evaluate(seg, t).v == pytest.approx(numeric, abs=1e-6)
        assert evaluate(seg, t).a == pytest.approx(P.polyval(t, P.polyder(vel)), abs=1e-9)


def test_velocity_limit_dilates_the_profile(two_link):
    traj = plan_joint_trajectory(two_link, [0.0, 0.0], [1.0, 0.5], duration=1.0, vel_limits=[0.5, 0.5])
    assert traj.duration == pytest.approx(3.75, rel=1e-9)
    assert peak_velocity(traj.segments[0]) <= 0.5 * (1 + 1e-9)


def test_acceleration_limit_dilates_the_profile(two_link):
    traj = plan_joint_trajectory(two_link, [0.0, 0.0], [1.0, 0.0], duration=1.0, acc_limits=[1.0, 1.0])
    assert traj.duration == pytest.approx(math.sqrt(10.0 / math.sqrt(3.0)), rel=1e-6)
    assert peak_acceleration(traj.segments[0]) <= 1.0 + 1e-6


def test_joints_finish_together(robot, robot_chain):
    traj = plan_joint_trajectory(
        robot_chain,
        robot.poses["tuck"],
        robot.poses["ready"],
        vel_limits=robot.velocity_limits,
        acc_limits=robot.acceleration_limits,
    )
    end = evaluate_trajectory(traj, traj.tf)
    np.testing.assert_allclose(end.q, robot.poses["ready"], atol=1e-9)
    np.testing.assert_allclose(end.v, 0.0, atol=1e-9)
    for seg, v_lim, a_lim in zip(traj.segments, robot.velocity_limits, robot.acceleration_limits):
        assert peak_velocity(seg) <= v_lim * (1 + 1e-9)
        assert peak_acceleration(seg) <= a_lim * (1 + 1e-6)


def test_configurations_outside_limits_are_refused(two_link):
    with pytest.raises(JointLimitError):
        plan_joint_trajectory(two_link, [4.0, 0.0], [0.0, 0.0])
    with pytest.raises(JointLimitError):
        plan_joint_trajectory(two_link, [0.0, 0.0], [0.0, -4.0])


def test_sampling_includes_both_ends(two_link):
    traj = plan_joint_trajectory(two_link, [0.0, 0.0], [1.0, -1.0], duration=1.0)
    times, q, v, a = sample_trajectory(traj, 0.01)
    assert len(times) == 101 and times[0] == 0.0 and times[-1] == pytest.approx(1.0)
    np.testing.assert_allclose(q[-1], [1.0, -1.0], atol=1e-12)
    assert q.shape == v.shape == a.shape == (101, 2)


def test_csv_layout(two_link):
    assert trajectory_header(2) == ["t", "q_0", "v_0", "a_0", "q_1", "v_1", "a_1"]
    traj = plan_joint_trajectory(two_link, [0.0, 0.0], [1.0, -1.0], duration=0.5)
    rows = list(trajectory_rows(traj, 0.1))
    assert len(rows) == 6 and all(len(row) == 7 for row in rows)


def test_rest_at_the_same_position_is_constant():
    seg = quintic_coefficients(BoundaryCondition.rest_to_rest(0.7, 0.7, 0.0, 2.0))
    np.testing.assert_allclose(seg.coeffs, [0.7, 0, 0, 0, 0, 0], atol=1e-12)


def test_constant_velocity_boundaries():
    seg = quintic_coefficients(BoundaryCondition(0.0, 1.0, 0.0, 1.0, 1.0, 0.0, 0.0, 1.0))
    assert evaluate(seg, 0.0).v == pytest.approx(1.0, abs=1e-9)
    assert evaluate(seg, 1.0).v == pytest.approx(1.0, abs=1e-9)


def test_midpoint_of_the_unit_profile():
    sample = evaluate(quintic_coefficients(BoundaryCondition.rest_to_rest(0.0, 1.0, 0.0, 1.0)), 0.5)
    assert sample.q == pytest.approx(0.5) and sample.v == pytest.approx(1.875)


def test_velocity_limits_only_dilate_when_exceeded(one_link):
    relaxed = plan_joint_trajectory(one_link, [0.0], [1.0], duration=1.0, vel_limits=[2.0])
    assert relaxed.duration == pytest.approx(1.0)
    tight = plan_joint_trajectory(one_link, [0.0], [1.0], duration=1.0, vel_limits=[1.0])
    assert tight.duration == pytest.approx(1.875)


def test_zero_motion_has_zero_peak(one_link):
    traj = plan_joint_trajectory(one_link, [0.3], [0.3], vel_limits=[1.0])
    assert peak_velocity(traj.segments[0]) == pytest.approx(0.0, abs=1e-12)


def test_non_positive_limits_are_rejected(two_link):
    with pytest.raises(InvalidArgumentError):
        plan_joint_trajectory(two_link, [0.0, 0.0], [1.0, 0.5], vel_limits=[0.5, 0.0])
    with pytest.raises(InvalidArgumentError):
        plan_joint_trajectory(two_link, [0.0, 0.0], [1.0, 0.5], duration=1.0, acc_limits=[1.0, -1.0])


def test_rest_to_rest_profiles_are_monotone():
    times = np.linspace(0.0, 2.0, 1001)
    for q0, qf in ((0.0, 1.5), (1.0, -2.0)):
        seg = quintic_coefficients(BoundaryCondition.rest_to_rest(q0, qf, 0.0, 2.0))
        q = np.array([evaluate(seg, t).q for t in times])
        steps = np.diff(q) * math.copysign(1.0, qf - q0)
        assert np.all(steps >= -1e-12)


def test_stretching_time_rescales_the_derivatives():
    rng = np.random.default_rng(5)
    for _ in range(20):
        q0, qf = rng.uniform(-2.0, 2.0, 2)
        duration, stretch = rng.uniform(0.5, 3.0), rng.uniform(0.5, 4.0)
        base = quintic_coefficients(BoundaryCondition.rest_to_rest(q0, qf, 0.0, duration))
        slow = quintic_coefficients(BoundaryCondition.rest_to_rest(q0, qf, 0.0, stretch * duration))
        for t in np.linspace(0.0, duration, 11):
            a, b = evaluate(base, t), evaluate(slow, stretch * t)
            assert b.q == pytest.approx(a.q, abs=1e-9)
            assert b.v == pytest.approx(a.v / stretch, abs=1e-9)
            assert b.a == pytest.approx(a.a / stretch**2, abs=1e-9)
