#
# fsfpid - Projected inverse dynamics control and constrained simulation
#
# Copyright (c) 2025 풀스택패밀리 연구소
#
# Licensed under the Apache License, Version 2.0
# See LICENSE file for the full text of the license.
#

"""
구속 일관 직교좌표 임피던스 제어 모듈

관성 성형 없이(Λ_d = Λ_c) 운동 공간에서 임피던스를 구현하는 제어력,
관절 토크 사상, 변위 기반 외력 추정을 제공합니다.
"""

import logging
from dataclasses import dataclass, field, replace
from typing import NamedTuple, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg
from scipy.spatial.transform import Rotation

from fsfpid.dynamics_api import JointTorque
from fsfpid.errors import DimensionMismatch

logger = logging.getLogger(__name__)

ESTIMATOR_MODES = ("quasi_static", "full")
FULL_ROWS = (0, 1, 2, 3, 4, 5)


def _require_spd(name: str, A: np.ndarray) -> np.ndarray:
    A = np.atleast_2d(np.asarray(A, dtype=float))
    if A.shape[0] != A.shape[1] or not np.allclose(A, A.T, atol=1e-12):
        raise ValueError(f"{name} 는 대칭 행렬이어야 합니다")
    try:
        scipy.linalg.cholesky(A)
    except scipy.linalg.LinAlgError:
        raise ValueError(f"{name} 는 양의 정부호여야 합니다")
    return A


@dataclass(frozen=True, eq=False)
class ImpedanceGains:
    """
    임피던스 이득

    Attributes:
        Kd (np.ndarray): 강성 [N/m, N·m/rad]
        Dd (np.ndarray): 감쇠 [N·s/m, N·m·s/rad]
        Lambda_d (np.ndarray, optional): 목표 관성. 제어 경로에서는 쓰지 않고
            관성 성형 비교에만 사용합니다.
    """
    Kd: np.ndarray
    Dd: np.ndarray
    Lambda_d: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "Kd", _require_spd("Kd", self.Kd))
        object.__setattr__(self, "Dd", _require_spd("Dd", self.Dd))
        if self.Kd.shape != self.Dd.shape:
            raise DimensionMismatch(what="Dd", expected=self.Kd.shape, got=self.Dd.shape)
        if self.Lambda_d is not None:
            object.__setattr__(self, "Lambda_d", _require_spd("Lambda_d", self.Lambda_d))

    @classmethod
    def from_diagonal(cls, stiffness: Sequence[float], damping: Sequence[float]) -> "ImpedanceGains":
        return cls(Kd=np.diag(stiffness), Dd=np.diag(damping))

    def select(self, rows: Sequence[int]) -> "ImpedanceGains":
        idx = np.ix_(rows, rows)
        Lambda_d = None if self.Lambda_d is None else self.Lambda_d[idx]
        return ImpedanceGains(Kd=self.Kd[idx], Dd=self.Dd[idx], Lambda_d=Lambda_d)


@dataclass(frozen=True, eq=False)
class TrajectorySample:
    """한 시각의 목표 작업 자세와 [각; 선] 트위스트/가속도"""
    position: np.ndarray
    rotation: np.ndarray
    twist: np.ndarray
    acceleration: np.ndarray


def pose_error(position: np.ndarray, rotation: np.ndarray,
               position_d: np.ndarray, rotation_d: np.ndarray) -> np.ndarray:
    """
    자세 오차 [회전 벡터(월드); 위치 오차]

    자세 오차는 R R_dᵀ 의 회전 벡터로, 크기는 π 이하입니다.
    """
    rot = Rotation.from_matrix(np.asarray(rotation) @ np.asarray(rotation_d).T).as_rotvec()
    return np.concatenate([rot, np.asarray(position, dtype=float) - np.asarray(position_d, dtype=float)])


@dataclass(frozen=True, eq=False)
class TaskState:
    """
    작업 공간 상태

    err_pos, err_vel, xdot, xdot_d, xddot_d 는 rows 가 고른 방향만 담습니다.
    """
    position: np.ndarray
    rotation: np.ndarray
    position_d: np.ndarray
    rotation_d: np.ndarray
    xdot: np.ndarray
    xdot_d: np.ndarray
    xddot_d: np.ndarray
    err_pos: np.ndarray
    err_vel: np.ndarray
    rows: Tuple[int, ...] = field(default=FULL_ROWS)

    @property
    def x(self) -> np.ndarray:
        """자세 (위치 + 쿼터니언 [x, y, z, w])"""
        return np.concatenate([self.position, Rotation.from_matrix(self.rotation).as_quat()])

    @property
    def x_d(self) -> np.ndarray:
        return np.concatenate([self.position_d, Rotation.from_matrix(self.rotation_d).as_quat()])

    def select(self, rows: Sequence[int]) -> "TaskState":
        """작업 방향 중 일부 행만 남긴 상태를 반환합니다."""
        if self.rows != FULL_ROWS:
            raise ValueError("이미 축약된 작업 상태입니다")
        rows = tuple(int(r) for r in rows)
        idx = list(rows)
        return replace(
            self,
            xdot=self.xdot[idx], xdot_d=self.xdot_d[idx], xddot_d=self.xddot_d[idx],
            err_pos=self.err_pos[idx], err_vel=self.err_vel[idx], rows=rows,
        )


def task_state(position: np.ndarray, rotation: np.ndarray, twist: np.ndarray,
               desired: TrajectorySample) -> TaskState:
    twist = np.asarray(twist, dtype=float)
    return TaskState(
        position=np.asarray(position, dtype=float),
        rotation=np.asarray(rotation, dtype=float),
        position_d=np.asarray(desired.position, dtype=float),
        rotation_d=np.asarray(desired.rotation, dtype=float),
        xdot=twist,
        xdot_d=np.asarray(desired.twist, dtype=float),
        xddot_d=np.asarray(desired.acceleration, dtype=float),
        err_pos=pose_error(position, rotation, desired.position, desired.rotation),
        err_vel=twist - desired.twist,
    )


class ExternalWrenchEstimate(NamedTuple):
    wrench: np.ndarray
    mode: str


@dataclass(frozen=True, eq=False)
class TaskWrench:
    F: np.ndarray
    Fx_ext: np.ndarray
    estimator_mode: str = "quasi_static"


def control_force(task: TaskState, gains: ImpedanceGains,
                  Lambda_c: np.ndarray, h_c: np.ndarray) -> np.ndarray:
    """
    관성 성형 없는 임피던스 제어력

    F = h_c + Λ_c ẍ_d - D_d x̃̇ - K_d x̃

    Args:
        task (TaskState): 작업 상태 (축약 행과 이득 차원이 같아야 함)
        gains (ImpedanceGains): 강성/감쇠
        Lambda_c (np.ndarray): 구속 하의 작업 공간 관성
        h_c (np.ndarray): 작업 공간 바이어스

    Returns:
        np.ndarray: 작업점 제어력
    """
    if gains.Kd.shape[0] != task.err_pos.shape[0]:
        raise DimensionMismatch(what="gains", expected=task.err_pos.shape[0], got=gains.Kd.shape[0])
    return h_c + Lambda_c @ task.xddot_d - gains.Dd @ task.err_vel - gains.Kd @ task.err_pos


def motion_torque(F: np.ndarray, Jx: np.ndarray, P: np.ndarray) -> JointTorque:
    """τ_motion = P Jxᵀ F"""
    return JointTorque(P @ (Jx.T @ F))


def nullspace_torque(
    Jx: np.ndarray,
    Lambda_c: np.ndarray,
    Mc_inv: np.ndarray,
    P: np.ndarray,
    tau0: np.ndarray
) -> JointTorque:
    """
    작업 가속도에 영향을 주지 않는 운동 공간 자세 토크

    τ_null = P (I - Jxᵀ Λ_c Jx Mc⁻¹ P) τ0

    운동 공간의 자유도가 작업 차원보다 크면 (7자유도 팔의 팔꿈치 등) 남는 방향을
    관절 공간 자세 제어로 안정화합니다.
    """
    n = P.shape[0]
    Nt = np.eye(n) - Jx.T @ Lambda_c @ Jx @ Mc_inv @ P
    return JointTorque(P @ (Nt @ tau0))


def estimate_external_wrench(
    task: TaskState,
    gains: ImpedanceGains,
    Lambda_c: np.ndarray,
    xddot: Optional[np.ndarray] = None,
    mode: str = "quasi_static"
) -> ExternalWrenchEstimate:
    """
    변위 기반 외력 추정

    F̂_x = Λ_c (ẍ - ẍ_d) + D_d x̃̇ + K_d x̃, 준정적 모드에서는 가속도 항을 생략합니다.

    Raises:
        ValueError: 알 수 없는 모드이거나 full 모드에서 ẍ 가 없을 때
    """
    if mode not in ESTIMATOR_MODES:
        raise ValueError(f"알 수 없는 추정 모드입니다: {mode}")
    F = gains.Dd @ task.err_vel + gains.Kd @ task.err_pos
    if mode == "full":
        if xddot is None:
            raise ValueError("full 모드에는 작업 가속도가 필요합니다")
        F = F + Lambda_c @ (np.asarray(xddot) - task.xddot_d)
    return ExternalWrenchEstimate(wrench=F, mode=mode)


def full_impedance_force_with_inertia_shaping(
    task: TaskState,
    gains: ImpedanceGains,
    Lambda_c: np.ndarray,
    h_c: np.ndarray,
    Fx_measured: np.ndarray
) -> np.ndarray:
    """
    관성 성형을 포함한 임피던스 제어력 (비교용)

    F = h_c + Λ_c ẍ_d - Λ_c Λ_d⁻¹ (D_d x̃̇ + K_d x̃) + (Λ_c Λ_d⁻¹ - I) F_x
    """
    if gains.Lambda_d is None:
        raise ValueError("Lambda_d 가 필요합니다")
    # Λ_c Λ_d⁻¹ = (Λ_d⁻¹ Λ_c)ᵀ, Λ 들은 대칭
    ratio = scipy.linalg.solve(gains.Lambda_d, Lambda_c, assume_a="pos").T
    feedback = gains.Dd @ task.err_vel + gains.Kd @ task.err_pos
    eye = np.eye(ratio.shape[0])
    return h_c + Lambda_c @ task.xddot_d - ratio @ feedback + (ratio - eye) @ np.asarray(Fx_measured)
