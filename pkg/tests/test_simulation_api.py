from dataclasses import replace

import numpy as np
import pytest

from fsfpid.control_api import SurfaceContact
from fsfpid.dynamics_api import JointState, bias_forces, forward_kinematics
from fsfpid.errors import ConfigValidationError, DriftToleranceExceeded
from fsfpid.projection_api import projection_state
from fsfpid.simulation_api import (
    DisturbanceProfile,
    DisturbanceSegment,
    IntegratorConfig,
    Payload,
    SimState,
    Simulator,
    apply_disturbance,
    constrained_acceleration,
    true_constraint_force,
)

WIPE_SEED = np.array([0.0, 0.70, 0.0, 1.37, 0.0, 1.0715926535897932, 0.0])


def surface_simulator(model, q0, **kwargs):
    frames = forward_kinematics(model, q0)
    builder = SurfaceContact(frames.ee_position, frames.ee_rotation)
    return Simulator((model,), builder, **kwargs)


def consistent_state(sim, q, v):
    kin = sim.evaluate(q, np.zeros_like(q))
    P = projection_state(kin.constraint, kin.M).P
    qdot = P @ v
    return SimState(arms=(JointState(q, qdot),))


def kinetic_energy(sim, state):
    kin = sim.evaluate(state.q, state.qdot)
    return 0.5 * state.qdot @ kin.M @ state.qdot


# =============================================================================
# 구속 일관 순동역학
# =============================================================================

class TestConstrainedDynamics:
    """qddot = Mc⁻¹ (Pτ - Ph + Ṗqdot + P Jxᵀ F_x)"""

    def test_acceleration_satisfies_constraint(self, lwr, rng):
        for _ in range(20):
            q = WIPE_SEED + rng.uniform(-0.2, 0.2, lwr.dof)
            sim = surface_simulator(lwr, q)
            state = consistent_state(sim, q, rng.uniform(-1.0, 1.0, lwr.dof))
            rec = sim.physics(state, rng.normal(size=lwr.dof) * 20.0)
            residual = rec.proj.Jc @ rec.qddot + rec.proj.Jc_dot @ state.qdot
            assert np.linalg.norm(residual) < 1e-6

    def test_matches_lagrange_multiplier_solution(self, lwr, rng):
        q = WIPE_SEED + rng.uniform(-0.1, 0.1, lwr.dof)
        sim = surface_simulator(lwr, q)
        state = consistent_state(sim, q, rng.uniform(-0.5, 0.5, lwr.dof))
        tau = rng.normal(size=lwr.dof) * 10.0
        rec = sim.physics(state, tau)

        kin, proj = rec.kin, rec.proj
        n, k = lwr.dof, proj.Jc.shape[0]
        kkt = np.zeros((n + k, n + k))
        kkt[:n, :n] = kin.M
        kkt[:n, n:] = -proj.Jc.T
        kkt[n:, :n] = proj.Jc
        sol = np.linalg.solve(kkt, np.concatenate([tau - kin.h, -proj.Jc_dot @ state.qdot]))
        np.testing.assert_allclose(rec.qddot, sol[:n], rtol=1e-7, atol=1e-7)
        np.testing.assert_allclose(rec.lambda_true, sol[n:], rtol=1e-7, atol=1e-7)

    def test_unconstrained_limit(self, lwr, rng):
        q = WIPE_SEED + rng.uniform(-0.3, 0.3, lwr.dof)
        qdot = rng.uniform(-0.5, 0.5, lwr.dof)
        frames = forward_kinematics(lwr, q)
        builder = SurfaceContact(frames.ee_position, frames.ee_rotation, constraint_rows=())
        sim = Simulator((lwr,), builder)
        tau = rng.normal(size=lwr.dof)
        rec = sim.physics(SimState(arms=(JointState(q, qdot),)), tau)
        expected = np.linalg.solve(rec.kin.M, tau - bias_forces(lwr, q, qdot))
        np.testing.assert_allclose(rec.qddot, expected, rtol=1e-9, atol=1e-9)
        assert rec.lambda_true.shape == (0,)

    def test_free_functions_agree_with_simulator(self, lwr, rng):
        q = WIPE_SEED
        sim = surface_simulator(lwr, q)
        state = consistent_state(sim, q, rng.uniform(-0.5, 0.5, lwr.dof))
        tau = rng.normal(size=lwr.dof)
        rec = sim.physics(state, tau)
        kin = rec.kin
        qddot = constrained_acceleration(kin.M, kin.h, rec.proj, state.qdot, tau, np.zeros(6), kin.Jx)
        lam = true_constraint_force(kin.M, kin.h, rec.proj, tau, np.zeros(6), kin.Jx, qddot)
        np.testing.assert_allclose(qddot, rec.qddot)
        np.testing.assert_allclose(lam, rec.lambda_true)

    def test_resting_arm_pushes_on_surface(self, lwr):
        """중력 보상 없이 놓인 팔은 평면을 아래로 누른다 (참 법선력 > 0)"""
        q = WIPE_SEED
        sim = surface_simulator(lwr, q)
        rec = sim.physics(SimState(arms=(JointState(q, np.zeros(lwr.dof)),)), np.zeros(lwr.dof))
        assert rec.wrench_local[0, 2] > 0.0


# =============================================================================
# 외란
# =============================================================================

class TestDisturbances:
    """DisturbanceProfile, apply_disturbance 테스트"""

    def test_same_kind_overlap_is_rejected(self):
        with pytest.raises(ConfigValidationError):
            DisturbanceProfile((DisturbanceSegment("mass", 0.0, 2.0, mass=0.5),
                                DisturbanceSegment("mass", 1.0, 3.0, mass=0.5)))

    def test_adjacent_and_mixed_segments(self):
        profile = DisturbanceProfile((
            DisturbanceSegment("mass", 0.0, 1.0, mass=0.5),
            DisturbanceSegment("mass", 1.0, 2.0, mass=1.0),
            DisturbanceSegment("wrench", 0.5, 1.5, wrench=(0, 0, 0, 0, 0, -30.0)),
        ))
        assert profile.added_mass(0.99) == 0.5
        assert profile.added_mass(1.0) == 1.0
        assert profile.added_mass(2.0) == 0.0

        effect = apply_disturbance(profile, 1.2, np.zeros(3), np.zeros(3))
        np.testing.assert_array_equal(effect.wrench, [0, 0, 0, 0, 0, -30.0])
        assert effect.added_mass == 1.0

    def test_clamp_spring(self):
        profile = DisturbanceProfile((DisturbanceSegment("clamp", 0.0, 1.0, target=(0.0, 0.0, 0.0),
                                                         stiffness=100.0, damping=10.0),))
        effect = apply_disturbance(profile, 0.5, np.array([0.01, 0.0, 0.0]), np.array([0.0, 0.1, 0.0]))
        np.testing.assert_allclose(effect.wrench, [0, 0, 0, -1.0, -1.0, 0.0])

    def test_clamp_without_target_needs_anchor(self):
        profile = DisturbanceProfile((DisturbanceSegment("clamp", 0.0, 1.0),))
        with pytest.raises(ValueError):
            apply_disturbance(profile, 0.5, np.zeros(3), np.zeros(3))
        effect = apply_disturbance(profile, 0.5, np.ones(3), np.zeros(3), anchors={0: np.ones(3)})
        np.testing.assert_allclose(effect.wrench, 0.0)

    def test_noise_is_seeded(self):
        profile = DisturbanceProfile((DisturbanceSegment("noise", 0.0, 1.0, std=2.0),))
        a = apply_disturbance(profile, 0.1, np.zeros(3), np.zeros(3), rngs={0: np.random.default_rng(7)})
        b = apply_disturbance(profile, 0.1, np.zeros(3), np.zeros(3), rngs={0: np.random.default_rng(7)})
        np.testing.assert_array_equal(a.wrench, b.wrench)
        np.testing.assert_array_equal(a.wrench[:3], 0.0)
        with pytest.raises(ValueError):
            apply_disturbance(profile, 0.1, np.zeros(3), np.zeros(3))

    @pytest.mark.parametrize("kwargs", [
        dict(kind="gust", t_start=0.0, t_end=1.0),
        dict(kind="mass", t_start=1.0, t_end=1.0),
        dict(kind="mass", t_start=0.0, t_end=1.0, mass=-1.0),
        dict(kind="wrench", t_start=0.0, t_end=1.0, wrench=(0.0, 0.0, 1.0)),
    ])
    def test_segment_validation(self, kwargs):
        with pytest.raises(ConfigValidationError):
            DisturbanceSegment(**kwargs)


# =============================================================================
# 파지 물체
# =============================================================================

class TestPayload:
    """Payload 테스트"""

    def test_box_inertia(self):
        np.testing.assert_allclose(np.diag(Payload.box_inertia(12.0, (1.0, 2.0, 3.0))), [13.0, 10.0, 5.0])

    def test_added_mass_changes_gravity_load(self, lwr):
        q = WIPE_SEED
        payload = Payload(mass=1.0, inertia=np.zeros((3, 3)), com_in_ee=(np.zeros(3),), rotation_in_ee=(np.eye(3),))
        sim = surface_simulator(lwr, q, payload=payload)
        kin = sim.evaluate(q, np.zeros(lwr.dof))
        zero = np.zeros(lwr.dof)
        base = sim.payload_wrench(kin, zero, zero, 0.0)
        heavier = sim.payload_wrench(kin, zero, zero, 0.5)
        np.testing.assert_allclose(base[:3], [0.0, 0.0, -9.81])
        np.testing.assert_allclose(heavier[:3] - base[:3], [0.0, 0.0, -4.905])
        np.testing.assert_allclose(heavier[3:], 0.0, atol=1e-12)

    def test_models_are_cached_per_mass(self, lwr):
        payload = Payload(mass=1.0, inertia=np.eye(3) * 1e-3, com_in_ee=(np.zeros(3),), rotation_in_ee=(np.eye(3),))
        sim = surface_simulator(lwr, WIPE_SEED, payload=payload)
        assert sim.models_for(0.5) is sim.models_for(0.5)
        assert sim.models_for(0.5)[0].links[-1].mass == pytest.approx(lwr.links[-1].mass + 1.5)
        assert surface_simulator(lwr, WIPE_SEED).models_for(1.0)[0] is lwr

    def test_attach_splits_mass_between_arms(self, lwr):
        payload = Payload(mass=2.0, inertia=np.eye(3) * 1e-2, com_in_ee=(np.zeros(3), np.zeros(3)),
                          rotation_in_ee=(np.eye(3), np.eye(3)))
        left, right = payload.attach((lwr, lwr), added_mass=1.0)
        assert left.links[-1].mass == pytest.approx(lwr.links[-1].mass + 1.5)
        assert right.links[-1].mass == pytest.approx(lwr.links[-1].mass + 1.5)


# =============================================================================
# 적분
# =============================================================================

class TestStep:
    """Simulator.step 테스트"""

    @pytest.mark.parametrize("method", ["semi_implicit_euler", "rk4"])
    def test_constraint_is_maintained(self, lwr, rng, method):
        q0 = WIPE_SEED
        sim = surface_simulator(lwr, q0, config=IntegratorConfig(dt=1e-3, method=method))
        z0 = forward_kinematics(lwr, q0).ee_position[2]
        state = consistent_state(sim, q0, rng.uniform(-0.3, 0.3, lwr.dof))
        for _ in range(100):
            kin = sim.evaluate(state.q, state.qdot)
            state, _ = sim.step(state, kin.h)
            assert state.drift <= 1e-6
        assert forward_kinematics(lwr, state.q).ee_position[2] == pytest.approx(z0, abs=1e-8)
        assert state.time == pytest.approx(0.1)

    def test_drift_tolerance(self, lwr, rng):
        sim = surface_simulator(lwr, WIPE_SEED, config=IntegratorConfig(drift_tolerance=-1.0))
        state = consistent_state(sim, WIPE_SEED, rng.uniform(-0.3, 0.3, lwr.dof))
        with pytest.raises(DriftToleranceExceeded):
            sim.step(state, np.zeros(lwr.dof))

    def test_damped_motion_loses_energy(self, lwr, rng):
        """무중력, τ = -D qdot 이면 운동 에너지가 줄어든다"""
        weightless = replace(lwr, gravity=np.zeros(3))
        sim = surface_simulator(weightless, WIPE_SEED)
        state = consistent_state(sim, WIPE_SEED, rng.uniform(-0.5, 0.5, lwr.dof))
        start = kinetic_energy(sim, state)
        energies = []
        for _ in range(500):
            state, _ = sim.step(state, -5.0 * state.qdot)
            energies.append(kinetic_energy(sim, state))
        assert max(energies) <= start * (1.0 + 1e-3)
        assert energies[-1] < 0.8 * start

    @pytest.mark.parametrize("kwargs", [dict(dt=0.0), dict(method="euler"), dict(baumgarte_gain=-1.0)])
    def test_config_validation(self, kwargs):
        with pytest.raises(ConfigValidationError):
            IntegratorConfig(**kwargs)

    def test_correction_fraction(self):
        assert IntegratorConfig(dt=1e-3).correction_fraction == 1.0
        assert IntegratorConfig(dt=1e-3, baumgarte_gain=200.0).correction_fraction == pytest.approx(0.2)
