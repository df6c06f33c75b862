import math

import numpy as np
import pytest
from pydantic import ValidationError
from scipy.spatial.transform import Rotation

from conftest import planar_chain
from core.errors import InvalidArgumentError, SingularityError
from core.kinematics import (
    concat_chains,
    damped_pseudoinverse,
    dh_transform,
    end_effector,
    end_effector_twist,
    forward_kinematics,
    jacobian,
    manipulability,
    max_reach,
)
from models.chain import KinematicChain
from models.geometry import RigidTransform
from models.robot import DHRow, JointKind


def test_zero_row_is_identity():
    assert dh_transform(DHRow(), 0.0).almost_equal(RigidTransform.identity(), 1e-12)


def test_link_length_translates_along_x():
    pose = dh_transform(DHRow(a=1.0), 0.0)
    np.testing.assert_allclose(pose.translation, [1.0, 0.0, 0.0], atol=1e-12)
    np.testing.assert_allclose(pose.rotation, np.eye(3), atol=1e-12)


def test_quarter_turn_rotates_the_link():
    pose = dh_transform(DHRow(a=1.0), math.pi / 2)
    np.testing.assert_allclose(pose.translation, [0.0, 1.0, 0.0], atol=1e-12)
    np.testing.assert_allclose(pose.rotation, Rotation.from_euler("z", math.pi / 2).as_matrix(), atol=1e-12)


def test_prismatic_joint_extends_along_z():
    pose = dh_transform(DHRow(d=0.1, kind=JointKind.PRISMATIC), 0.25)
    np.testing.assert_allclose(pose.translation, [0.0, 0.0, 0.35], atol=1e-12)


def test_non_finite_inputs_are_rejected():
    with pytest.raises(InvalidArgumentError):
        dh_transform(DHRow(a=1.0), math.nan)
    with pytest.raises(ValidationError):
        DHRow(a=math.inf)


def test_single_row_chain(one_link):
    frames = forward_kinematics(one_link, [0.0])
    assert len(frames) == 1
    np.testing.assert_allclose(frames[-1].translation, [1.0, 0.0, 0.0], atol=1e-12)


def test_two_link_elbow(two_link):
    pose = end_effector(two_link, [math.pi / 2, -math.pi / 2])
    np.testing.assert_allclose(pose.translation, [1.0, 1.0, 0.0], atol=1e-12)
    np.testing.assert_allclose(pose.rotation, np.eye(3), atol=1e-12)


def test_joint_vector_length_must_match(two_link):
    with pytest.raises(InvalidArgumentError):
        forward_kinematics(two_link, [0.0])


def test_frames_are_rigid(robot_chain):
    rng = np.random.default_rng(7)
    for _ in range(1000):
        frames = forward_kinematics(robot_chain, robot_chain.random_configuration(rng))
        assert len(frames) == len(robot_chain)
        for frame in frames:
            np.testing.assert_allclose(frame.rotation.T @ frame.rotation, np.eye(3), atol=1e-9)
            assert np.linalg.det(frame.rotation) == pytest.approx(1.0, abs=1e-9)


def test_base_frame_is_applied_first():
    base = RigidTransform.from_xyz_rpy([0.5, 0.0, 0.2], [0.0, 0.0, math.pi / 2])
    chain = planar_chain([1.0], base)
    np.testing.assert_allclose(end_effector(chain, [0.0]).translation, [0.5, 1.0, 0.2], atol=1e-12)


def test_two_link_jacobian_at_zero(two_link):
    jac = jacobian(two_link, [0.0, 0.0])
    np.testing.assert_allclose(jac[0], [0.0, 0.0], atol=1e-12)
    np.testing.assert_allclose(jac[1], [2.0, 1.0], atol=1e-12)
    np.testing.assert_allclose(jac[5], [1.0, 1.0], atol=1e-12)


def test_single_revolute_column(one_link):
    np.testing.assert_allclose(jacobian(one_link, [0.0])[:, 0], [0, 1, 0, 0, 0, 1], atol=1e-12)


def _numeric_jacobian(chain, q, h=1e-6):
    jac = np.zeros((6, len(chain)))
    for i in range(len(chain)):
        dq = np.zeros(len(chain))
        dq[i] = h
        plus, minus = end_effector(chain, q + dq), end_effector(chain, q - dq)
        jac[:3, i] = (plus.translation - minus.translation) / (2 * h)
        jac[3:, i] = Rotation.from_matrix(plus.rotation @ minus.rotation.T).as_rotvec() / (2 * h)
    return jac


def test_jacobian_matches_finite_differences(robot_chain):
    rng = np.random.default_rng(0)
    for _ in range(100):
        q = robot_chain.random_configuration(rng)
        jac = jacobian(robot_chain, q)
        error = np.linalg.norm(jac - _numeric_jacobian(robot_chain, q))
        assert error <= 1e-5 * max(1.0, np.linalg.norm(jac))


def test_prismatic_column_is_the_axis():
    chain = KinematicChain((DHRow(kind=JointKind.PRISMATIC),), np.array([[0.0, 1.0]]))
    np.testing.assert_allclose(jacobian(chain, [0.5])[:, 0], [0, 0, 1, 0, 0, 0], atol=1e-12)


def test_end_effector_twist_follows_the_motion(robot_chain):
    rng = np.random.default_rng(8)
    h = 1e-6
    for _ in range(20):
        q = robot_chain.random_configuration(rng)
        qdot = rng.uniform(-1.0, 1.0, len(robot_chain))
        twist = end_effector_twist(robot_chain, q, qdot)
        plus, minus = end_effector(robot_chain, q + h * qdot), end_effector(robot_chain, q - h * qdot)
        np.testing.assert_allclose(twist.linear, (plus.translation - minus.translation) / (2 * h), atol=1e-6)
        angular = Rotation.from_matrix(plus.rotation @ minus.rotation.T).as_rotvec() / (2 * h)
        np.testing.assert_allclose(twist.angular, angular, atol=1e-6)
        np.testing.assert_allclose(twist.as_vector(), jacobian(robot_chain, q) @ qdot, atol=1e-12)


def test_prismatic_joint_has_no_angular_velocity():
    chain = KinematicChain((DHRow(kind=JointKind.PRISMATIC),), np.array([[0.0, 1.0]]))
    np.testing.assert_array_equal(chain.revolute_mask, [False])
    twist = end_effector_twist(chain, [0.5], [2.0])
    np.testing.assert_allclose(twist.linear, [0.0, 0.0, 2.0], atol=1e-12)
    np.testing.assert_allclose(twist.angular, 0.0, atol=1e-12)


def test_pseudoinverse_of_identity_and_diagonal():
    np.testing.assert_allclose(damped_pseudoinverse(np.eye(6)), np.eye(6), atol=1e-12)
    diag = np.diag(np.arange(1.0, 7.0))
    np.testing.assert_allclose(damped_pseudoinverse(diag), np.diag(1.0 / np.arange(1.0, 7.0)), atol=1e-12)


def test_pseudoinverse_reproduces_full_rank_jacobian():
    jac = np.random.default_rng(3).normal(size=(6, 7))
    np.testing.assert_allclose(jac @ damped_pseudoinverse(jac) @ jac, jac, atol=1e-9)


def test_pseudoinverse_satisfies_the_moore_penrose_conditions():
    rng = np.random.default_rng(4)
    for shape in ((6, 7), (6, 6), (3, 5)):
        jac = rng.normal(size=shape)
        pinv = damped_pseudoinverse(jac)
        np.testing.assert_allclose(pinv @ jac @ pinv, pinv, atol=1e-9)
        np.testing.assert_allclose((jac @ pinv).T, jac @ pinv, atol=1e-9)
        np.testing.assert_allclose((pinv @ jac).T, pinv @ jac, atol=1e-9)


def test_zero_row_needs_damping():
    jac = np.eye(6)
    jac[2] = 0.0
    with pytest.raises(SingularityError):
        damped_pseudoinverse(jac, 0.0)
    damped = damped_pseudoinverse(jac, 0.01)
    assert np.all(np.isfinite(damped))
    np.testing.assert_allclose(damped[:, 2], 0.0, atol=1e-12)


def test_negative_damping_is_rejected():
    with pytest.raises(InvalidArgumentError):
        damped_pseudoinverse(np.eye(6), -0.1)


def test_manipulability():
    assert manipulability(np.eye(6)) == pytest.approx(1.0)
    assert manipulability(np.zeros((6, 7))) == 0.0


def test_max_reach(two_link):
    assert max_reach(two_link) == pytest.approx(2.0)
    slide = KinematicChain((DHRow(a=0.5, kind=JointKind.PRISMATIC),), np.array([[-0.2, 0.3]]))
    assert max_reach(slide) == pytest.approx(0.8)


def test_concatenated_chain_composes_poses():
    first = planar_chain([1.0])
    second = KinematicChain((DHRow(a=0.5, alpha=math.pi / 2),), np.array([[-1.0, 1.0]]))
    joined = concat_chains(first, second)
    expected = end_effector(first, [0.3]) @ end_effector(second, [-0.4])
    assert end_effector(joined, [0.3, -0.4]).almost_equal(expected, 1e-12)


def test_chain_rejects_inverted_limits():
    with pytest.raises(ValueError):
        KinematicChain((DHRow(a=1.0),), np.array([[1.0, -1.0]]))
