import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from fsfpid.dynamics_api import (
    attach_payload,
    bias_forces,
    dynamics_terms,
    forward_kinematics,
    inverse_dynamics,
    inverse_kinematics,
    jacobian,
    jacobian_dot,
    mass_matrix,
    model_from_dict,
    model_to_dict,
    point_acceleration,
)
from fsfpid.errors import ConfigValidationError, DimensionMismatch
from tests.conftest import G, I1, I2, L1, L2, LC1, LC2, M1, M2, make_two_link

SINGLE_WIPE_SEED = np.array([0.0, 0.70, 0.0, 1.37, 0.0, 1.0715926535897932, 0.0])


def closed_form_mass(q):
    c2 = np.cos(q[1])
    m11 = I1 + I2 + M1 * LC1 ** 2 + M2 * (L1 ** 2 + LC2 ** 2 + 2 * L1 * LC2 * c2)
    m12 = I2 + M2 * (LC2 ** 2 + L1 * LC2 * c2)
    m22 = I2 + M2 * LC2 ** 2
    return np.array([[m11, m12], [m12, m22]])


def closed_form_bias(q, qdot):
    s2 = np.sin(q[1])
    k = M2 * L1 * LC2 * s2
    coriolis = np.array([-k * (2 * qdot[0] * qdot[1] + qdot[1] ** 2), k * qdot[0] ** 2])
    c1, c12 = np.cos(q[0]), np.cos(q[0] + q[1])
    gravity = np.array([(M1 * LC1 + M2 * L1) * G * c1 + M2 * LC2 * G * c12, M2 * LC2 * G * c12])
    return coriolis + gravity


def potential_energy(model, q):
    frames = forward_kinematics(model, q)
    V = 0.0
    for i, link in enumerate(model.links):
        c = frames.positions[i] + frames.rotations[i] @ link.com
        V -= link.mass * model.gravity @ c
    return V


# =============================================================================
# 2링크 닫힌 해
# =============================================================================

def test_two_link_forward_kinematics(two_link):
    q = np.array([0.3, -0.7])
    frames = forward_kinematics(two_link, q)
    expected = [L1 * np.cos(q[0]) + L2 * np.cos(q[0] + q[1]), L1 * np.sin(q[0]) + L2 * np.sin(q[0] + q[1]), 0.0]
    np.testing.assert_allclose(frames.ee_position, expected, atol=1e-12)
    np.testing.assert_allclose(frames.ee_rotation, Rotation.from_euler("z", q.sum()).as_matrix(), atol=1e-12)


def test_two_link_mass_matrix_matches_closed_form(two_link, rng):
    for _ in range(100):
        q = rng.uniform(-np.pi, np.pi, 2)
        np.testing.assert_allclose(mass_matrix(two_link, q), closed_form_mass(q), atol=1e-9)


def test_two_link_bias_matches_closed_form(two_link, rng):
    for _ in range(100):
        q = rng.uniform(-np.pi, np.pi, 2)
        qdot = rng.uniform(-3.0, 3.0, 2)
        np.testing.assert_allclose(bias_forces(two_link, q, qdot), closed_form_bias(q, qdot), atol=1e-9)


def test_two_link_jacobian(two_link):
    q = np.array([0.4, 0.9])
    s1, c1 = np.sin(q[0]), np.cos(q[0])
    s12, c12 = np.sin(q.sum()), np.cos(q.sum())
    J = jacobian(two_link, q)
    expected_linear = np.array([
        [-L1 * s1 - L2 * s12, -L2 * s12],
        [L1 * c1 + L2 * c12, L2 * c12],
        [0.0, 0.0],
    ])
    np.testing.assert_allclose(J[:3], [[0, 0], [0, 0], [1, 1]], atol=1e-12)
    np.testing.assert_allclose(J[3:], expected_linear, atol=1e-12)


def test_pendulum_static_torque():
    """중력 아래 정지한 링크 하나는 m g lc cos(q) 의 토크가 필요"""
    model = make_two_link()
    tau = inverse_dynamics(model, np.array([0.0, 0.0]), np.zeros(2), np.zeros(2))
    assert tau[0] == pytest.approx((M1 * LC1 + M2 * (L1 + LC2)) * G, abs=1e-9)
    assert tau[1] == pytest.approx(M2 * LC2 * G, abs=1e-9)


# =============================================================================
# 7자유도 팔 수치 검증
# =============================================================================

class TestSpatialArm:
    """7자유도 팔에서 유한 차분과 에너지 관계로 검증"""

    def test_shipped_model_reaches_wipe_start(self, lwr):
        frames = forward_kinematics(lwr, SINGLE_WIPE_SEED)
        np.testing.assert_allclose(frames.ee_position, [0.6, 0.0, 0.25], atol=5e-3)
        np.testing.assert_allclose(frames.ee_rotation[:, 2], [0.0, 0.0, -1.0], atol=1e-6)

    def test_jacobian_matches_finite_difference(self, lwr, rng):
        eps = 1e-6
        for _ in range(10):
            q = rng.uniform(-2.0, 2.0, lwr.dof)
            J = jacobian(lwr, q)
            f0 = forward_kinematics(lwr, q)
            for i in range(lwr.dof):
                dq = np.zeros(lwr.dof)
                dq[i] = eps
                f1 = forward_kinematics(lwr, q + dq)
                lin = (f1.ee_position - f0.ee_position) / eps
                ang = Rotation.from_matrix(f1.ee_rotation @ f0.ee_rotation.T).as_rotvec() / eps
                np.testing.assert_allclose(J[3:, i], lin, atol=1e-5)
                np.testing.assert_allclose(J[:3, i], ang, atol=1e-5)

    def test_jacobian_dot_matches_finite_difference(self, lwr, rng):
        eps = 1e-6
        for _ in range(10):
            q = rng.uniform(-2.0, 2.0, lwr.dof)
            qdot = rng.uniform(-1.0, 1.0, lwr.dof)
            numeric = (jacobian(lwr, q + eps * qdot) - jacobian(lwr, q - eps * qdot)) / (2 * eps)
            np.testing.assert_allclose(jacobian_dot(lwr, q, qdot), numeric, atol=1e-6)

    def test_mass_matrix_symmetric_positive_definite(self, lwr, rng):
        for _ in range(20):
            M = mass_matrix(lwr, rng.uniform(-np.pi, np.pi, lwr.dof))
            np.testing.assert_allclose(M, M.T, atol=1e-12)
            assert np.linalg.eigvalsh(M).min() > 0.0

    def test_gravity_is_potential_gradient(self, lwr, rng):
        eps = 1e-6
        for _ in range(5):
            q = rng.uniform(-2.0, 2.0, lwr.dof)
            grad = np.array([
                (potential_energy(lwr, q + eps * e) - potential_energy(lwr, q - eps * e)) / (2 * eps)
                for e in np.eye(lwr.dof)
            ])
            np.testing.assert_allclose(bias_forces(lwr, q, np.zeros(lwr.dof)), grad, atol=1e-6)

    def test_coriolis_power_matches_mass_matrix_rate(self, lwr, rng):
        """중력이 없을 때 qdotᵀ h = ½ qdotᵀ Ṁ qdot"""
        from dataclasses import replace
        free = replace(lwr, gravity=np.zeros(3))
        eps = 1e-6
        for _ in range(10):
            q = rng.uniform(-2.0, 2.0, lwr.dof)
            qdot = rng.uniform(-1.5, 1.5, lwr.dof)
            M_dot = (mass_matrix(free, q + eps * qdot) - mass_matrix(free, q - eps * qdot)) / (2 * eps)
            power = qdot @ bias_forces(free, q, qdot)
            assert power == pytest.approx(0.5 * qdot @ M_dot @ qdot, abs=1e-6)

    def test_inverse_dynamics_is_mass_times_acceleration_plus_bias(self, lwr, rng):
        q = rng.uniform(-2.0, 2.0, lwr.dof)
        qdot = rng.uniform(-1.0, 1.0, lwr.dof)
        qddot = rng.uniform(-1.0, 1.0, lwr.dof)
        expected = mass_matrix(lwr, q) @ qddot + bias_forces(lwr, q, qdot)
        np.testing.assert_allclose(inverse_dynamics(lwr, q, qdot, qddot), expected, atol=1e-9)

    def test_dynamics_terms_bundle(self, lwr, rng):
        q = rng.uniform(-2.0, 2.0, lwr.dof)
        qdot = rng.uniform(-1.0, 1.0, lwr.dof)
        terms = dynamics_terms(lwr, q, qdot)
        np.testing.assert_allclose(terms.M, mass_matrix(lwr, q), atol=1e-12)
        np.testing.assert_allclose(terms.Jx_dot, jacobian_dot(lwr, q, qdot), atol=1e-12)
        light = dynamics_terms(lwr, q, qdot, with_inertia=False)
        assert light.M is None and light.h is None
        np.testing.assert_allclose(light.Jx, terms.Jx)

    def test_point_acceleration(self, lwr, rng):
        q = rng.uniform(-2.0, 2.0, lwr.dof)
        qdot = rng.uniform(-1.0, 1.0, lwr.dof)
        qddot = rng.uniform(-1.0, 1.0, lwr.dof)
        expected = jacobian(lwr, q) @ qddot + jacobian_dot(lwr, q, qdot) @ qdot
        np.testing.assert_allclose(point_acceleration(lwr, q, qdot, qddot), expected, atol=1e-12)

    def test_placed_model_shifts_end_effector(self, lwr):
        q = SINGLE_WIPE_SEED
        moved = lwr.placed((0.45, 0.75, 0.0), (0.0, 0.0, 0.0))
        delta = forward_kinematics(moved, q).ee_position - forward_kinematics(lwr, q).ee_position
        np.testing.assert_allclose(delta, [0.45, 0.75, 0.0], atol=1e-12)

    def test_wrong_dimension(self, lwr):
        with pytest.raises(DimensionMismatch):
            forward_kinematics(lwr, np.zeros(3))


# =============================================================================
# 부하, 역기구학, 모델 파일
# =============================================================================

def test_attach_zero_payload_returns_same_model(lwr):
    assert attach_payload(lwr, 0.0, np.zeros(3), np.zeros((3, 3))) is lwr


def test_attach_point_payload_adds_gravity_load(lwr, rng):
    mass = 1.2
    loaded = attach_payload(lwr, mass, np.zeros(3), 1e-9 * np.eye(3))
    for _ in range(5):
        q = rng.uniform(-2.0, 2.0, lwr.dof)
        J_lin = jacobian(lwr, q)[3:]
        delta = bias_forces(loaded, q, np.zeros(lwr.dof)) - bias_forces(lwr, q, np.zeros(lwr.dof))
        np.testing.assert_allclose(delta, -J_lin.T @ (mass * lwr.gravity), atol=1e-6)


def test_inverse_kinematics_recovers_pose(lwr, rng):
    q_true = SINGLE_WIPE_SEED + rng.uniform(-0.1, 0.1, lwr.dof)
    target = forward_kinematics(lwr, q_true)
    q = inverse_kinematics(lwr, target.ee_position, target.ee_rotation, SINGLE_WIPE_SEED)
    reached = forward_kinematics(lwr, q)
    np.testing.assert_allclose(reached.ee_position, target.ee_position, atol=1e-8)
    np.testing.assert_allclose(reached.ee_rotation, target.ee_rotation, atol=1e-8)


def test_inverse_kinematics_unreachable(lwr):
    with pytest.raises(ConfigValidationError) as exc:
        inverse_kinematics(lwr, np.array([5.0, 0.0, 0.0]), np.eye(3), SINGLE_WIPE_SEED, max_iter=50)
    assert exc.value.field == "q_seed"


def test_model_dict_round_trip(lwr):
    again = model_from_dict(model_to_dict(lwr))
    q = SINGLE_WIPE_SEED
    np.testing.assert_allclose(mass_matrix(again, q), mass_matrix(lwr, q))


def test_model_missing_axis_names_field(lwr):
    data = model_to_dict(lwr)
    del data["links"][2]["axis"]
    with pytest.raises(ConfigValidationError) as exc:
        model_from_dict(data, path="lwr")
    assert exc.value.field == "lwr.links[2].axis"


def test_model_bad_axis_names_field(lwr):
    data = model_to_dict(lwr)
    data["links"][0]["axis"] = [0.0, 0.0, 2.0]
    with pytest.raises(ConfigValidationError) as exc:
        model_from_dict(data, path="lwr")
    assert exc.value.field == "lwr.links[0].axis"
