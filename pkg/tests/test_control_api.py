from unittest.mock import patch

import numpy as np
import pytest

from fsfpid.config_api import load_scenario
from fsfpid.control_api import (
    SURFACE_CONSTRAINT_ROWS,
    GraspContact,
    SurfaceContact,
    evaluate_terms,
    split_joints,
)
from fsfpid.dynamics_api import forward_kinematics
from fsfpid.errors import InfeasibleQP
from fsfpid.impedance_api import ExternalWrenchEstimate
from fsfpid.scenario_api import build_scenario

from .conftest import DATA_DIR

WIPE_SEED = np.array([0.0, 0.70, 0.0, 1.37, 0.0, 1.0715926535897932, 0.0])


@pytest.fixture(scope="module")
def wipe_run():
    return build_scenario(load_scenario(DATA_DIR / "single_wipe.json"))


@pytest.fixture(scope="module")
def hold_run():
    return build_scenario(load_scenario(DATA_DIR / "dual_hold.json"))


# =============================================================================
# 구속 빌더
# =============================================================================

class TestSurfaceContact:
    """SurfaceContact 테스트"""

    def test_constraint_rows_and_basis(self, lwr):
        frames = forward_kinematics(lwr, WIPE_SEED)
        builder = SurfaceContact(frames.ee_position, frames.ee_rotation)
        terms = evaluate_terms((lwr,), WIPE_SEED, np.zeros(lwr.dof))
        kin = builder.evaluate(terms, [np.zeros(lwr.dof)])
        np.testing.assert_array_equal(kin.constraint.Jc, terms[0].Jx[list(SURFACE_CONSTRAINT_ROWS)])
        # ω_x, ω_y, v_z 행은 m_x, m_y, f_z 렌치 성분과 짝
        expected = np.zeros((6, 3))
        expected[3, 0] = expected[4, 1] = expected[2, 2] = 1.0
        np.testing.assert_array_equal(kin.constraint.basis, expected)
        assert builder.corrects_position

    def test_contact_frame_is_horizontal(self, lwr):
        frames = forward_kinematics(lwr, WIPE_SEED)
        builder = SurfaceContact(frames.ee_position, frames.ee_rotation)
        kin = builder.evaluate(evaluate_terms((lwr,), WIPE_SEED, np.zeros(lwr.dof)), [np.zeros(lwr.dof)])
        R = kin.contacts[0].rotation
        np.testing.assert_allclose(R[:, 2], [0.0, 0.0, 1.0])
        np.testing.assert_allclose(R.T @ R, np.eye(3), atol=1e-12)
        assert R[2, 0] == pytest.approx(0.0, abs=1e-12)

    def test_position_error_vanishes_at_reference(self, lwr):
        frames = forward_kinematics(lwr, WIPE_SEED)
        builder = SurfaceContact(frames.ee_position, frames.ee_rotation)
        kin = builder.evaluate(evaluate_terms((lwr,), WIPE_SEED, np.zeros(lwr.dof), with_inertia=False),
                               [np.zeros(lwr.dof)])
        np.testing.assert_allclose(builder.position_error(kin), 0.0, atol=1e-12)
        assert kin.M is None


class TestGraspContact:
    """GraspContact 테스트"""

    def test_dual_arm_kinematics(self, hold_run):
        run = hold_run
        q, qdot = run.initial_state.q, run.initial_state.qdot
        kin = run.simulator.evaluate(q, qdot)
        assert kin.constraint.Jc.shape == (6, 14)
        assert kin.Jx.shape == (6, 14)
        assert kin.M.shape == (14, 14)
        assert kin.share.shape == (12, 6)
        np.testing.assert_allclose(sum(c.r for c in kin.contacts), 0.0, atol=1e-12)
        assert not run.controller.builder.corrects_position
        assert run.controller.builder.position_error(kin) is None

    def test_contact_normals_point_away_from_center(self, hold_run):
        kin = hold_run.simulator.evaluate(hold_run.initial_state.q, hold_run.initial_state.qdot)
        for contact in kin.contacts:
            normal = contact.rotation[:, 2]
            np.testing.assert_allclose(normal, contact.r / np.linalg.norm(contact.r), atol=1e-6)


def test_split_joints():
    parts = split_joints([type("M", (), {"dof": 2})(), type("M", (), {"dof": 3})()], np.arange(5.0))
    np.testing.assert_array_equal(parts[0], [0.0, 1.0])
    np.testing.assert_array_equal(parts[1], [2.0, 3.0, 4.0])


# =============================================================================
# 제어기
# =============================================================================

class TestProjectedImpedanceController:
    """ProjectedImpedanceController 테스트"""

    def test_torque_split(self, wipe_run):
        run = wipe_run
        run.controller.solver.reset()
        out = run.controller.compute(run.initial_state.q, run.initial_state.qdot, 0.0)
        P = out.proj.P
        np.testing.assert_allclose((np.eye(P.shape[0]) - P) @ out.tau_motion, 0.0, atol=1e-9)
        np.testing.assert_allclose(out.tau_constraint, out.proj.Jc.T @ out.F_c)
        np.testing.assert_allclose(out.tau, out.tau_motion + out.tau_constraint)
        assert not out.qp_failed
        assert out.task.rows == (2, 3, 4)

    def test_on_trajectory_estimate_is_zero(self, wipe_run):
        run = wipe_run
        out = run.controller.compute(run.initial_state.q, run.initial_state.qdot, 0.0)
        np.testing.assert_allclose(out.task.err_pos, 0.0, atol=1e-8)
        np.testing.assert_allclose(out.Fx_hat, 0.0, atol=1e-6)

    def test_expected_wrench_matches_simulated_wrench(self, wipe_run):
        """모델이 같고 외력이 없으면 시뮬레이터의 참 접촉 렌치가 기대 렌치와 같다"""
        run = wipe_run
        state = run.initial_state
        out = run.controller.compute(state.q, state.qdot, 0.0)
        rec = run.simulator.physics(state, out.tau)
        np.testing.assert_allclose(rec.wrench_world, out.expected_wrench, atol=1e-6)
        np.testing.assert_allclose(rec.lambda_true, out.F_e - out.F_c, atol=1e-6)

    def test_commanded_wrench_keeps_contact_in_cone(self, wipe_run):
        run = wipe_run
        out = run.controller.compute(run.initial_state.q, run.initial_state.qdot, 0.0)
        local = out.expected_local[0]
        assert local[2] >= run.config.friction.min_normal_force - 1e-6
        assert np.hypot(local[0], local[1]) <= run.config.friction.mu * local[2] + 1e-9

    def test_qp_failure_holds_previous_command(self, wipe_run):
        run = wipe_run
        state = run.initial_state
        first = run.controller.compute(state.q, state.qdot, 0.0)
        with patch.object(run.controller.solver, "solve", side_effect=InfeasibleQP()):
            held = run.controller.compute(state.q, state.qdot, 0.001)
        assert held.qp_failed
        assert held.qp is None
        np.testing.assert_array_equal(held.F_c, first.F_c)

    def test_squeeze_grows_with_estimated_load(self, hold_run):
        """추정 하중이 커지면 명령 법선력도 커지고, 원뿔 제약이 처음부터 활성이다"""
        run = hold_run
        state = run.initial_state
        run.controller.solver.reset()
        levels = []
        for mass in (0.7, 1.2, 1.7, 2.2, 2.7, 3.2):
            weight = np.array([0.0, 0.0, 0.0, 0.0, 0.0, -9.81 * mass])
            estimate = ExternalWrenchEstimate(wrench=weight, mode="quasi_static")
            with patch("fsfpid.control_api.estimate_external_wrench", return_value=estimate):
                out = run.controller.compute(state.q, state.qdot, 0.0)
            assert not out.qp_failed
            assert len(out.qp.active_set) > 0
            levels.append(out.expected_local[:, 2].min())

        assert levels[0] >= run.config.friction.min_normal_force - 1e-6
        assert all(b > a for a, b in zip(levels, levels[1:]))
