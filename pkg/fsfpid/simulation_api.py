#
# fsfpid - Projected inverse dynamics control and constrained simulation
#
# Copyright (c) 2025 풀스택패밀리 연구소
#
# Licensed under the Apache License, Version 2.0
# See LICENSE file for the full text of the license.
#

"""
구속 강체 시뮬레이션 모듈

구속 일관 순동역학 qddot = Mc⁻¹ (Pτ - Ph + Ṗqdot + P Jxᵀ F_x) 을 적분하고,
속도 투영과 (평면 접촉의) 위치 보정으로 drift 를 막으며, 센서 대신
참 구속력 λ_true 와 참 접촉 렌치를 계산합니다.

파지된 물체는 별도 강체로 시뮬레이션하지 않고 질량/관성을 팔 개수로 나누어
각 팔의 마지막 링크에 붙입니다 (시뮬레이터 쪽 모델에만).
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from fsfpid.control_api import SystemKinematics, evaluate_terms, split_joints
from fsfpid.dynamics_api import JointState, ManipulatorModel, attach_payload
from fsfpid.errors import ConfigValidationError, DriftToleranceExceeded
from fsfpid.projection_api import ProjectionState, projection_state, pseudoinverse, projector
from fsfpid.wrench_api import local_contact_wrenches

logger = logging.getLogger(__name__)

INTEGRATION_METHODS = ("semi_implicit_euler", "rk4")
DISTURBANCE_KINDS = ("wrench", "mass", "clamp", "noise")


@dataclass(frozen=True)
class IntegratorConfig:
    """
    적분기 설정

    Attributes:
        dt (float): 적분 주기 [s]
        method (str): "semi_implicit_euler" 또는 "rk4"
        baumgarte_gain (float, optional): 위치 보정 이득 [1/s], None 이면 1/dt
        drift_tolerance (float): 허용 |Jc qdot|
        position_correction (bool): 평면 접촉 위치 보정 사용 여부
    """
    dt: float = 1e-3
    method: str = "semi_implicit_euler"
    baumgarte_gain: Optional[float] = None
    drift_tolerance: float = 1e-6
    position_correction: bool = True

    def __post_init__(self) -> None:
        if not self.dt > 0.0:
            raise ConfigValidationError("dt 는 양수여야 합니다", field="integrator.dt")
        if self.method not in INTEGRATION_METHODS:
            raise ConfigValidationError(f"지원하지 않는 적분 방식입니다: {self.method}",
                                        field="integrator.method")
        if self.baumgarte_gain is not None and not self.baumgarte_gain > 0.0:
            raise ConfigValidationError("baumgarte_gain 은 양수여야 합니다",
                                        field="integrator.baumgarte_gain")

    @property
    def correction_fraction(self) -> float:
        gain = 1.0 / self.dt if self.baumgarte_gain is None else self.baumgarte_gain
        return min(1.0, gain * self.dt)


@dataclass(frozen=True)
class DisturbanceSegment:
    """
    외란 구간 [t_start, t_end)

    Attributes:
        kind (str): "wrench" (작업 프레임 상수 렌치), "mass" (물체 추가 질량),
            "clamp" (고정 위치로 당기는 스프링), "noise" (시드 백색 잡음 힘)
        wrench (Tuple[float, ...]): [모멘트; 힘] 6 성분
        mass (float): 추가 질량 [kg]
        target (Tuple[float, ...], optional): clamp 목표 위치, None 이면 구간 시작 위치
        stiffness (float): clamp 강성 [N/m]
        damping (float): clamp 감쇠 [N·s/m]
        std (float): noise 힘 표준편차 [N]
        seed (int, optional): noise 시드, None 이면 시나리오 시드
    """
    kind: str
    t_start: float
    t_end: float
    wrench: Tuple[float, ...] = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
    mass: float = 0.0
    target: Optional[Tuple[float, ...]] = None
    stiffness: float = 1e4
    damping: float = 200.0
    std: float = 0.0
    seed: Optional[int] = None

    def __post_init__(self) -> None:
        if self.kind not in DISTURBANCE_KINDS:
            raise ConfigValidationError(f"알 수 없는 외란 종류입니다: {self.kind}", field="kind")
        if not self.t_end > self.t_start:
            raise ConfigValidationError("t_end 는 t_start 보다 커야 합니다", field="t_end")
        if len(self.wrench) != 6:
            raise ConfigValidationError("wrench 는 6 성분이어야 합니다", field="wrench")
        if self.mass < 0.0 or self.std < 0.0:
            raise ConfigValidationError("mass, std 는 음수일 수 없습니다", field="mass")

    def active(self, t: float) -> bool:
        return self.t_start <= t < self.t_end


@dataclass(frozen=True)
class DisturbanceProfile:
    segments: Tuple[DisturbanceSegment, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "segments", tuple(self.segments))
        for kind in DISTURBANCE_KINDS:
            spans = sorted((s.t_start, s.t_end) for s in self.segments if s.kind == kind)
            for (_, end), (start, _) in zip(spans, spans[1:]):
                if start < end:
                    raise ConfigValidationError(f"'{kind}' 외란 구간이 겹칩니다", field="disturbances")

    def added_mass(self, t: float) -> float:
        return float(sum(s.mass for s in self.segments if s.kind == "mass" and s.active(t)))


@dataclass(frozen=True, eq=False)
class DisturbanceEffect:
    wrench: np.ndarray
    added_mass: float


def apply_disturbance(
    profile: DisturbanceProfile,
    t: float,
    position: np.ndarray,
    velocity: np.ndarray,
    anchors: Optional[Dict[int, np.ndarray]] = None,
    rngs: Optional[Dict[int, np.random.Generator]] = None
) -> DisturbanceEffect:
    """
    시각 t 의 외란을 계산합니다.

    Args:
        profile (DisturbanceProfile): 외란 프로파일
        t (float): 시각 [s]
        position (np.ndarray): 작업 프레임 위치
        velocity (np.ndarray): 작업 프레임 선속도
        anchors (dict, optional): 목표가 없는 clamp 구간 인덱스 -> 고정 위치
        rngs (dict, optional): noise 구간 인덱스 -> 난수 생성기

    Returns:
        DisturbanceEffect: 작업 프레임 렌치 [모멘트; 힘] 과 물체 추가 질량
    """
    wrench = np.zeros(6)
    for i, seg in enumerate(profile.segments):
        if not seg.active(t):
            continue
        if seg.kind == "wrench":
            wrench += np.asarray(seg.wrench, dtype=float)
        elif seg.kind == "clamp":
            target = seg.target if seg.target is not None else (anchors or {}).get(i)
            if target is None:
                raise ValueError(f"clamp 구간 {i} 의 목표 위치가 없습니다")
            wrench[3:] += (-seg.stiffness * (np.asarray(position) - np.asarray(target))
                           - seg.damping * np.asarray(velocity))
        elif seg.kind == "noise":
            if rngs is None or i not in rngs:
                raise ValueError(f"noise 구간 {i} 의 난수 생성기가 없습니다")
            wrench[3:] += rngs[i].normal(0.0, seg.std, 3)
    return DisturbanceEffect(wrench=wrench, added_mass=profile.added_mass(t))


@dataclass(frozen=True, eq=False)
class Payload:
    """
    파지 물체

    Attributes:
        mass (float): 기본 질량 [kg]
        inertia (np.ndarray): 물체 프레임, 질량 중심 기준 관성 [kg·m²]
        com_in_ee (Tuple[np.ndarray, ...]): 각 손 말단 프레임 기준 질량 중심
        rotation_in_ee (Tuple[np.ndarray, ...]): 각 손 말단 프레임 기준 물체 자세
    """
    mass: float
    inertia: np.ndarray
    com_in_ee: Tuple[np.ndarray, ...]
    rotation_in_ee: Tuple[np.ndarray, ...]

    @staticmethod
    def box_inertia(mass: float, dims: Sequence[float]) -> np.ndarray:
        a, b, c = dims
        return mass / 12.0 * np.diag([b * b + c * c, a * a + c * c, a * a + b * b])

    def attach(self, models: Sequence[ManipulatorModel], added_mass: float = 0.0) -> Tuple[ManipulatorModel, ...]:
        """물체 질량 (추가 질량 포함) 을 팔마다 균등하게 붙인 모델"""
        K = len(models)
        mass = (self.mass + added_mass) / K
        out = []
        for model, com, R in zip(models, self.com_in_ee, self.rotation_in_ee):
            inertia = R @ self.inertia @ R.T / K
            out.append(attach_payload(model, mass, com, inertia))
        return tuple(out)


@dataclass(frozen=True, eq=False)
class SimState:
    """
    시뮬레이션 상태

    Attributes:
        arms (Tuple[JointState, ...]): 팔별 관절 상태
        time (float): 시각 [s]
        drift (float): 마지막 스텝 후 |Jc qdot|
        object_position (np.ndarray, optional): 작업 프레임 (물체) 위치
        object_rotation (np.ndarray, optional): 작업 프레임 (물체) 자세
    """
    arms: Tuple[JointState, ...]
    time: float = 0.0
    drift: float = 0.0
    object_position: Optional[np.ndarray] = None
    object_rotation: Optional[np.ndarray] = None

    @property
    def q(self) -> np.ndarray:
        return np.concatenate([a.q for a in self.arms])

    @property
    def qdot(self) -> np.ndarray:
        return np.concatenate([a.qdot for a in self.arms])


@dataclass(frozen=True, eq=False)
class PhysicsRecord:
    """한 주기의 참값 (시뮬레이터가 센서 대신 측정하는 양)"""
    qddot: np.ndarray
    lambda_true: np.ndarray
    wrench_world: np.ndarray
    wrench_local: np.ndarray
    Fx: np.ndarray
    added_mass: float
    kin: SystemKinematics = field(repr=False)
    proj: ProjectionState = field(repr=False)


def constrained_acceleration(
    M: np.ndarray,
    h: np.ndarray,
    proj: ProjectionState,
    qdot: np.ndarray,
    tau: np.ndarray,
    Fx: np.ndarray,
    Jx: np.ndarray
) -> np.ndarray:
    """qddot = Mc⁻¹ (P τ - P h + Ṗ qdot + P Jxᵀ F_x)"""
    P = proj.P
    rhs = P @ tau - P @ h + proj.P_dot @ qdot + P @ (Jx.T @ Fx)
    return proj.Mc_inv @ rhs


def true_constraint_force(
    M: np.ndarray,
    h: np.ndarray,
    proj: ProjectionState,
    tau: np.ndarray,
    Fx: np.ndarray,
    Jx: np.ndarray,
    qddot: np.ndarray
) -> np.ndarray:
    """λ_true = Jc⁺ᵀ (I - P)(M qddot + h - τ - Jxᵀ F_x)"""
    if proj.Jc.shape[0] == 0:
        return np.zeros(0)
    Q = np.eye(proj.P.shape[0]) - proj.P
    return proj.Jc_pinv.T @ (Q @ (M @ qddot + h - tau - Jx.T @ Fx))


class Simulator:
    """
    구속 강체 시뮬레이터

    Args:
        models (Sequence[ManipulatorModel]): 참 팔 모델 (물체 질량 제외)
        builder: SurfaceContact 또는 GraspContact
        config (IntegratorConfig): 적분기 설정
        disturbances (DisturbanceProfile): 외란
        payload (Payload, optional): 파지 물체
        seed (int): noise 구간 기본 시드
    """

    def __init__(
        self,
        models: Sequence[ManipulatorModel],
        builder,
        config: IntegratorConfig = IntegratorConfig(),
        disturbances: DisturbanceProfile = DisturbanceProfile(),
        payload: Optional[Payload] = None,
        seed: int = 0
    ):
        self.base_models = tuple(models)
        self.builder = builder
        self.config = config
        self.disturbances = disturbances
        self.payload = payload
        self._models: Dict[float, Tuple[ManipulatorModel, ...]] = {}
        self._anchors: Dict[int, np.ndarray] = {}
        self._rngs: Dict[int, np.random.Generator] = {
            i: np.random.default_rng(seg.seed if seg.seed is not None else seed)
            for i, seg in enumerate(disturbances.segments) if seg.kind == "noise"
        }

    def models_for(self, added_mass: float = 0.0) -> Tuple[ManipulatorModel, ...]:
        key = round(float(added_mass), 9)
        if key not in self._models:
            if self.payload is None:
                self._models[key] = self.base_models
            else:
                self._models[key] = self.payload.attach(self.base_models, key)
        return self._models[key]

    def evaluate(self, q: np.ndarray, qdot: np.ndarray, added_mass: float = 0.0,
                 with_inertia: bool = True) -> SystemKinematics:
        models = self.models_for(added_mass)
        terms = evaluate_terms(models, q, qdot, with_inertia=with_inertia)
        return self.builder.evaluate(terms, split_joints(models, qdot))

    def _disturbance(self, t: float, kin: SystemKinematics) -> np.ndarray:
        for i, seg in enumerate(self.disturbances.segments):
            if seg.kind == "clamp" and seg.target is None:
                if seg.active(t) and i not in self._anchors:
                    self._anchors[i] = kin.position.copy()
                    logger.info("t=%.3f clamp 시작, 고정 위치 %s", t, np.round(kin.position, 4))
        effect = apply_disturbance(self.disturbances, t, kin.position, kin.twist[3:],
                                   self._anchors, self._rngs)
        return effect.wrench

    def payload_wrench(self, kin: SystemKinematics, qdot: np.ndarray, qddot: np.ndarray,
                       added_mass: float) -> np.ndarray:
        """
        물체가 손에 가하는 렌치 중 물체 자신의 중력/관성에 의한 부분 (월드, 접촉별 [f; m])
        """
        K = len(kin.contacts)
        out = np.zeros(6 * K)
        if self.payload is None:
            return out
        gravity = self.base_models[0].gravity
        acc = kin.Jx @ qddot + kin.Jx_dot @ qdot
        alpha, a_com = acc[:3], acc[3:]
        omega = kin.twist[:3]
        mass = (self.payload.mass + added_mass) / K
        inertia = kin.rotation @ self.payload.inertia @ kin.rotation.T / K
        f = mass * (gravity - a_com)
        m = -(inertia @ alpha + np.cross(omega, inertia @ omega))
        for i, contact in enumerate(kin.contacts):
            out[6 * i:6 * i + 3] = f
            out[6 * i + 3:6 * i + 6] = m - np.cross(contact.r, f)
        return out

    def physics(self, state: SimState, tau: np.ndarray) -> PhysicsRecord:
        """현재 상태에서 가속도, 참 구속력, 참 접촉 렌치를 계산합니다."""
        q, qdot, t = state.q, state.qdot, state.time
        added_mass = self.disturbances.added_mass(t)
        kin = self.evaluate(q, qdot, added_mass)
        Fx = self._disturbance(t, kin)
        proj = projection_state(kin.constraint, kin.M)
        qddot = constrained_acceleration(kin.M, kin.h, proj, qdot, tau, Fx, kin.Jx)
        lam = true_constraint_force(kin.M, kin.h, proj, tau, Fx, kin.Jx, qddot)
        wrench = kin.constraint.basis @ lam + kin.share @ Fx
        wrench = wrench + self.payload_wrench(kin, qdot, qddot, added_mass)
        return PhysicsRecord(
            qddot=qddot,
            lambda_true=lam,
            wrench_world=wrench,
            wrench_local=local_contact_wrenches(wrench, kin.contacts),
            Fx=Fx,
            added_mass=added_mass,
            kin=kin,
            proj=proj,
        )

    def _acceleration(self, q: np.ndarray, qdot: np.ndarray, tau: np.ndarray,
                      Fx: np.ndarray, added_mass: float) -> np.ndarray:
        kin = self.evaluate(q, qdot, added_mass)
        proj = projection_state(kin.constraint, kin.M)
        return constrained_acceleration(kin.M, kin.h, proj, qdot, tau, Fx, kin.Jx)

    def step(self, state: SimState, tau: np.ndarray) -> Tuple[SimState, PhysicsRecord]:
        """
        한 주기 적분

        τ 와 외란은 주기 동안 고정(zero-order hold)합니다. 적분 후 평면 접촉이면
        위치 오차를 Gauss-Newton 한 번으로 보정하고, 속도를 P 로 투영해
        Jc qdot = 0 을 복원합니다.

        Returns:
            Tuple[SimState, PhysicsRecord]: 다음 상태와 현재 상태의 참값

        Raises:
            DriftToleranceExceeded: 투영 후에도 drift 가 허용치를 넘을 때
        """
        tau = np.asarray(tau, dtype=float)
        rec = self.physics(state, tau)
        dt = self.config.dt
        q, qdot = state.q, state.qdot

        if self.config.method == "rk4":
            def f(qq: np.ndarray, vv: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
                return vv, self._acceleration(qq, vv, tau, rec.Fx, rec.added_mass)

            k1 = (qdot, rec.qddot)
            k2 = f(q + 0.5 * dt * k1[0], qdot + 0.5 * dt * k1[1])
            k3 = f(q + 0.5 * dt * k2[0], qdot + 0.5 * dt * k2[1])
            k4 = f(q + dt * k3[0], qdot + dt * k3[1])
            q_new = q + dt / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
            qdot_new = qdot + dt / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        else:
            qdot_new = qdot + dt * rec.qddot
            q_new = q + dt * qdot_new

        if self.config.position_correction and getattr(self.builder, "corrects_position", False):
            kin = self.evaluate(q_new, qdot_new, rec.added_mass, with_inertia=False)
            pinv, _ = pseudoinverse(kin.constraint.Jc)
            q_new = q_new - self.config.correction_fraction * (pinv @ self.builder.position_error(kin))

        kin = self.evaluate(q_new, qdot_new, rec.added_mass, with_inertia=False)
        Jc = kin.constraint.Jc
        qdot_new = projector(Jc) @ qdot_new
        drift = float(np.linalg.norm(Jc @ qdot_new)) if Jc.shape[0] else 0.0
        if drift > self.config.drift_tolerance:
            raise DriftToleranceExceeded(drift=drift, tolerance=self.config.drift_tolerance)

        models = self.base_models
        arms = tuple(JointState(qi, qdi, state.time + dt) for qi, qdi in
                     zip(split_joints(models, q_new), split_joints(models, qdot_new)))
        new_state = SimState(
            arms=arms,
            time=state.time + dt,
            drift=drift,
            object_position=kin.position,
            object_rotation=kin.rotation,
        )
        return new_state, rec
