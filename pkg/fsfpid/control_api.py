#
# fsfpid - Projected inverse dynamics control and constrained simulation
#
# Copyright (c) 2025 풀스택패밀리 연구소
#
# Licensed under the Apache License, Version 2.0
# See LICENSE file for the full text of the license.
#

"""
제어기 조립 모듈

구속 종류별 빌더(단일 팔 평면 접촉, 다중 팔 파지)가 팔별 동역학 항으로부터
시스템 단위의 구속/작업 기구학을 만들고, ProjectedImpedanceController 가
운동 공간 임피던스 제어와 구속 공간 렌치 QP 를 한 주기씩 실행합니다.
"""

import logging
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg
from scipy.spatial.transform import Rotation

from fsfpid.dynamics_api import DynamicsTerms, ManipulatorModel, dynamics_terms
from fsfpid.errors import InfeasibleQP, QPMaxIteration
from fsfpid.grasp_api import (
    ContactFrame,
    grasp_map,
    grasp_map_dot,
    load_share,
    multiarm_constraint_jacobian,
    object_frame,
    object_task_jacobian,
)
from fsfpid.impedance_api import (
    ImpedanceGains,
    TaskState,
    TrajectorySample,
    control_force,
    estimate_external_wrench,
    motion_torque,
    nullspace_torque,
    task_state,
)
from fsfpid.projection_api import ConstraintJacobian, ProjectionState, projection_state, task_space_terms
from fsfpid.wrench_api import (
    DEFAULT_EDGES,
    ActiveSetQP,
    FrictionParams,
    QPResult,
    aggregate_external_wrench,
    build_wrench_qp,
    constraint_torque,
    local_contact_wrenches,
)

logger = logging.getLogger(__name__)

# 평면 접촉: [ω_x, ω_y, v_z] 는 구속, [ω_z, v_x, v_y] 는 작업
SURFACE_CONSTRAINT_ROWS = (0, 1, 5)
SURFACE_TASK_ROWS = (2, 3, 4)


@dataclass(frozen=True, eq=False)
class SystemKinematics:
    """
    한 상태에서의 시스템 구속/작업 기구학

    Attributes:
        constraint (ConstraintJacobian): 축약 구속 야코비안과 접촉 렌치 기저
        contacts (Tuple[ContactFrame, ...]): 접촉 프레임
        share (np.ndarray): (6K, 6) 작업 렌치가 접촉 렌치로 전달되는 분배 행렬
        M, h: 블록 대각 질량 행렬과 바이어스 (기구학만 계산하면 None)
        Jx, Jx_dot: (6, N) 작업 야코비안 [각; 선]
        position, rotation, twist: 작업 프레임 자세와 트위스트
    """
    constraint: ConstraintJacobian
    contacts: Tuple[ContactFrame, ...]
    share: np.ndarray
    M: Optional[np.ndarray]
    h: Optional[np.ndarray]
    Jx: np.ndarray
    Jx_dot: np.ndarray
    position: np.ndarray
    rotation: np.ndarray
    twist: np.ndarray


def split_joints(models: Sequence[ManipulatorModel], x: np.ndarray) -> List[np.ndarray]:
    offsets = np.cumsum([0] + [m.dof for m in models])
    return [x[offsets[i]:offsets[i + 1]] for i in range(len(models))]


def evaluate_terms(models: Sequence[ManipulatorModel], q: np.ndarray, qdot: np.ndarray,
                   with_inertia: bool = True) -> List[DynamicsTerms]:
    qs = split_joints(models, q)
    qds = split_joints(models, qdot)
    return [dynamics_terms(m, qi, qdi, with_inertia=with_inertia)
            for m, qi, qdi in zip(models, qs, qds)]


def _stack_inertia(terms: Sequence[DynamicsTerms]) -> Tuple[Optional[np.ndarray], Optional[np.ndarray]]:
    if terms[0].M is None:
        return None, None
    return scipy.linalg.block_diag(*[t.M for t in terms]), np.concatenate([t.h for t in terms])


def _wrench_index(row: int) -> int:
    # 트위스트 행 [ω; v] 에 일을 하는 렌치 성분 [f; m]
    return row + 3 if row < 3 else row - 3


class SurfaceContact:
    """
    단일 팔 평면 접촉 구속

    말단 야코비안의 선택된 행(기본: z 병진, x/y 회전)을 그대로 Jc 로 씁니다.
    접촉 프레임의 z 는 평면 법선(월드 +z), x 는 손의 x 축을 수평면에 투영한 방향입니다.

    Args:
        reference_position (np.ndarray): 초기 말단 위치 (위치 보정 기준)
        reference_rotation (np.ndarray): 초기 말단 자세 (위치 보정 기준)
        constraint_rows (Sequence[int]): 구속 행
        normal (Sequence[float]): 평면 법선
    """

    def __init__(
        self,
        reference_position: np.ndarray,
        reference_rotation: np.ndarray,
        constraint_rows: Sequence[int] = SURFACE_CONSTRAINT_ROWS,
        normal: Sequence[float] = (0.0, 0.0, 1.0)
    ):
        self.reference_position = np.asarray(reference_position, dtype=float)
        self.reference_rotation = np.asarray(reference_rotation, dtype=float)
        self.rows = tuple(int(r) for r in constraint_rows)
        self.normal = np.asarray(normal, dtype=float) / np.linalg.norm(normal)
        basis = np.zeros((6, len(self.rows)))
        for j, row in enumerate(self.rows):
            basis[_wrench_index(row), j] = 1.0
        self.basis = basis
        self.corrects_position = True

    def _contact_rotation(self, ee_rotation: np.ndarray) -> np.ndarray:
        z = self.normal
        x = ee_rotation[:, 0] - np.dot(ee_rotation[:, 0], z) * z
        if np.linalg.norm(x) < 1e-6:
            x = np.array([1.0, 0.0, 0.0]) - z[0] * z
        x = x / np.linalg.norm(x)
        return np.column_stack([x, np.cross(z, x), z])

    def evaluate(self, terms: Sequence[DynamicsTerms], qdots: Sequence[np.ndarray]) -> SystemKinematics:
        t = terms[0]
        idx = list(self.rows)
        constraint = ConstraintJacobian(Jc=t.Jx[idx], Jc_dot=t.Jx_dot[idx], basis=self.basis)
        contact = ContactFrame(
            position=t.ee_position,
            rotation=self._contact_rotation(t.ee_rotation),
            r=np.zeros(3),
        )
        M, h = _stack_inertia(terms)
        return SystemKinematics(
            constraint=constraint,
            contacts=(contact,),
            share=np.zeros((6, 6)),
            M=M,
            h=h,
            Jx=t.Jx,
            Jx_dot=t.Jx_dot,
            position=t.ee_position,
            rotation=t.ee_rotation,
            twist=t.Jx @ qdots[0],
        )

    def position_error(self, kin: SystemKinematics) -> np.ndarray:
        """구속 행에 해당하는 자세 오차 (일차 근사로 Jc 와 대응)"""
        rot = Rotation.from_matrix(kin.rotation @ self.reference_rotation.T).as_rotvec()
        err = np.concatenate([rot, kin.position - self.reference_position])
        return err[list(self.rows)]


class GraspContact:
    """
    다중 팔 강체 파지 구속

    접촉점 평균을 물체 질량 중심으로, 첫 번째 손 자세 x 고정 오프셋을 물체 자세로 씁니다.

    Args:
        contact_rotations (Sequence[np.ndarray]): 각 손 말단 프레임 기준 접촉 프레임 회전
        rotation_offset (np.ndarray): 첫 번째 손 자세 기준 물체 자세
    """

    def __init__(self, contact_rotations: Sequence[np.ndarray], rotation_offset: np.ndarray):
        self.contact_rotations = tuple(np.asarray(R, dtype=float) for R in contact_rotations)
        self.rotation_offset = np.asarray(rotation_offset, dtype=float)
        K = len(self.contact_rotations)
        self.share = np.column_stack([load_share(e, K) for e in np.eye(6)])
        self.corrects_position = False

    @property
    def K(self) -> int:
        return len(self.contact_rotations)

    def evaluate(self, terms: Sequence[DynamicsTerms], qdots: Sequence[np.ndarray]) -> SystemKinematics:
        twists = np.array([t.Jx @ qd for t, qd in zip(terms, qdots)])
        positions = np.array([t.ee_position for t in terms])
        obj = object_frame(positions, twists[:, 3:], twists[:, :3],
                           terms[0].ee_rotation, self.rotation_offset)
        contacts = tuple(
            ContactFrame(position=t.ee_position, rotation=t.ee_rotation @ Rc, r=r)
            for t, Rc, r in zip(terms, self.contact_rotations, obj.r)
        )
        grasp = grasp_map(contacts)
        _, N_G_dot = grasp_map_dot(grasp, obj.r_dot)
        constraint = multiarm_constraint_jacobian(
            grasp, [t.Jx for t in terms], [t.Jx_dot for t in terms], N_G_dot)
        Jx, Jx_dot = object_task_jacobian([t.Jx for t in terms], [t.Jx_dot for t in terms])
        M, h = _stack_inertia(terms)
        return SystemKinematics(
            constraint=constraint,
            contacts=contacts,
            share=self.share,
            M=M,
            h=h,
            Jx=Jx,
            Jx_dot=Jx_dot,
            position=obj.position,
            rotation=obj.rotation,
            twist=obj.twist,
        )

    def position_error(self, kin: SystemKinematics) -> Optional[np.ndarray]:
        return None


@dataclass(frozen=True, eq=False)
class ControlOutput:
    """
    한 제어 주기의 출력

    expected_wrench 는 제어기가 기대하는 월드 접촉 렌치 (share F̂_x + basis (F_e - F_c)) 입니다.
    """
    tau: np.ndarray
    tau_motion: np.ndarray
    tau_constraint: np.ndarray
    F: np.ndarray
    Fx_hat: np.ndarray
    F_e: np.ndarray
    F_c: np.ndarray
    expected_wrench: np.ndarray
    expected_local: np.ndarray
    task: TaskState
    Lambda_c: np.ndarray
    kin: SystemKinematics
    proj: ProjectionState
    qp: Optional[QPResult]
    qp_failed: bool


class ProjectedImpedanceController:
    """
    투영 역동역학 임피던스 제어기

    운동 공간에서는 관성 성형 없는 임피던스 제어력 F 를 P Jxᵀ F 로, 남는 운동 공간
    자유도는 자세 토크로 안정화하고, 구속 공간에서는 마찰 제약 QP 로 F_c 를 골라
    Jcᵀ F_c 를 더합니다. 제어기 모델은 물체 질량을 모릅니다.

    Args:
        models (Sequence[ManipulatorModel]): 제어기가 아는 팔 모델
        builder: SurfaceContact 또는 GraspContact
        trajectory (Callable[[float], TrajectorySample]): 목표 궤적
        gains (ImpedanceGains): 6x6 이득 ([각; 선] 순서)
        friction (FrictionParams): 마찰 파라미터
        task_rows (Sequence[int]): 제어할 작업 행
        q_rest (np.ndarray): 자세 제어 기준 관절 각도
        posture_stiffness (float): 자세 강성 [N·m/rad]
        posture_damping (float): 자세 감쇠 [N·m·s/rad]
        edges (int): 원뿔 선형화 모서리 수
        epsilon (float, optional): QP 정규화 계수
        estimator_mode (str): "quasi_static" 또는 "full"
        dt (float): 제어 주기 (full 추정 모드의 가속도 차분에 사용)
    """

    def __init__(
        self,
        models: Sequence[ManipulatorModel],
        builder,
        trajectory: Callable[[float], TrajectorySample],
        gains: ImpedanceGains,
        friction: FrictionParams,
        task_rows: Sequence[int],
        q_rest: np.ndarray,
        posture_stiffness: float = 10.0,
        posture_damping: float = 1.0,
        edges: int = DEFAULT_EDGES,
        epsilon: Optional[float] = None,
        estimator_mode: str = "quasi_static",
        dt: float = 1e-3
    ):
        self.models = tuple(models)
        self.builder = builder
        self.trajectory = trajectory
        self.task_rows = tuple(int(r) for r in task_rows)
        self.gains = gains.select(self.task_rows) if len(self.task_rows) < 6 else gains
        self.friction = friction
        self.q_rest = np.asarray(q_rest, dtype=float)
        self.posture_stiffness = posture_stiffness
        self.posture_damping = posture_damping
        self.edges = edges
        self.epsilon = epsilon
        self.estimator_mode = estimator_mode
        self.dt = dt
        self.solver = ActiveSetQP()
        self._last_Fc: Optional[np.ndarray] = None
        self._last_twist: Optional[np.ndarray] = None

    def compute(self, q: np.ndarray, qdot: np.ndarray, t: float) -> ControlOutput:
        q = np.asarray(q, dtype=float)
        qdot = np.asarray(qdot, dtype=float)
        terms = evaluate_terms(self.models, q, qdot)
        kin = self.builder.evaluate(terms, split_joints(self.models, qdot))
        proj = projection_state(kin.constraint, kin.M)

        rows = list(self.task_rows)
        Jx, Jx_dot = kin.Jx[rows], kin.Jx_dot[rows]
        Lambda_c, h_c = task_space_terms(Jx, Jx_dot, proj.Mc_inv, proj.P, proj.P_dot, kin.h, qdot)
        proj = proj.with_task(Lambda_c, h_c)

        task = task_state(kin.position, kin.rotation, kin.twist, self.trajectory(t))
        if len(rows) < 6:
            task = task.select(rows)
        F = control_force(task, self.gains, Lambda_c, h_c)

        tau0 = kin.h - self.posture_stiffness * (q - self.q_rest) - self.posture_damping * qdot
        tau_motion = (motion_torque(F, Jx, proj.P)
                      + nullspace_torque(Jx, Lambda_c, proj.Mc_inv, proj.P, tau0)).tau

        xddot = None
        if self.estimator_mode == "full":
            xddot = np.zeros(len(rows)) if self._last_twist is None else \
                (kin.twist[rows] - self._last_twist) / self.dt
            self._last_twist = kin.twist[rows].copy()
        Fx_hat = estimate_external_wrench(task, self.gains, Lambda_c, xddot, self.estimator_mode).wrench

        F_e = aggregate_external_wrench(qdot, kin.M, proj, tau_motion, kin.h, Fx_hat, Jx)

        Fx_full = np.zeros(6)
        Fx_full[rows] = Fx_hat
        offset = kin.share @ Fx_full
        problem = build_wrench_qp(kin.constraint, kin.contacts, self.friction, F_e,
                                  offset=offset, edges=self.edges, epsilon=self.epsilon,
                                  warm_start=self._last_Fc)
        qp: Optional[QPResult] = None
        qp_failed = False
        try:
            qp = self.solver.solve(problem)
            F_c = qp.x
        except (InfeasibleQP, QPMaxIteration) as e:
            qp_failed = True
            if self._last_Fc is not None and self._last_Fc.shape == F_e.shape:
                F_c = self._last_Fc
            else:
                F_c = np.zeros_like(F_e)
            logger.warning("t=%.4f QP 실패 (%s), 이전 F_c 유지", t, e)
        self._last_Fc = F_c.copy()

        tau_constraint = constraint_torque(F_c, proj.Jc).tau
        expected = offset + kin.constraint.basis @ (F_e - F_c)
        return ControlOutput(
            tau=tau_motion + tau_constraint,
            tau_motion=tau_motion,
            tau_constraint=tau_constraint,
            F=F,
            Fx_hat=Fx_hat,
            F_e=F_e,
            F_c=F_c,
            expected_wrench=expected,
            expected_local=local_contact_wrenches(expected, kin.contacts),
            task=task,
            Lambda_c=Lambda_c,
            kin=kin,
            proj=proj,
            qp=qp,
            qp_failed=qp_failed,
        )
