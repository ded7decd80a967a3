#
# fsfpid - Projected inverse dynamics control and constrained simulation
#
# Copyright (c) 2025 풀스택패밀리 연구소
#
# Licensed under the Apache License, Version 2.0
# See LICENSE file for the full text of the license.
#

"""
구속 공간 투영 모듈

의사역행렬, 직교 투영 행렬 P = I - Jc⁺Jc 와 그 시간미분, 구속 일관 관성 M_c,
구속 하의 작업 공간 관성 Λ_c 와 바이어스 h_c 를 계산합니다.
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Optional, Tuple

import numpy as np
import scipy.linalg

from fsfpid.errors import (
    DimensionMismatch,
    RankDeficiency,
    SingularConstraintInertia,
    TaskSingularity,
    linalg_error_handler,
)

logger = logging.getLogger(__name__)

RANK_TOL = 1e-10
TASK_COND_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class ConstraintJacobian:
    """
    구속 야코비안

    Attributes:
        Jc (np.ndarray): (k, Q) 독립 구속 행
        Jc_dot (np.ndarray): (k, Q) 시간미분
        basis (np.ndarray): (n, k) 축약 구속 좌표 λ 를 물리 접촉 렌치(월드, 접촉별 [f; m])로
            옮기는 행렬. 구속력은 basis @ λ 로 해석됩니다.
    """
    Jc: np.ndarray
    Jc_dot: np.ndarray
    basis: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        Jc = np.atleast_2d(np.asarray(self.Jc, dtype=float))
        Jc_dot = np.atleast_2d(np.asarray(self.Jc_dot, dtype=float))
        if Jc.shape != Jc_dot.shape:
            raise DimensionMismatch(what="Jc_dot", expected=Jc.shape, got=Jc_dot.shape)
        object.__setattr__(self, "Jc", Jc)
        object.__setattr__(self, "Jc_dot", Jc_dot)
        if self.basis is None:
            object.__setattr__(self, "basis", np.eye(Jc.shape[0]))

    @property
    def k(self) -> int:
        return self.Jc.shape[0]


@dataclass(frozen=True, eq=False)
class ProjectionState:
    """한 제어 주기의 투영 스냅샷"""
    Jc: np.ndarray
    Jc_dot: np.ndarray
    P: np.ndarray
    P_dot: np.ndarray
    Jc_pinv: np.ndarray
    Mc: np.ndarray
    Mc_inv: np.ndarray
    Lambda_c: Optional[np.ndarray] = field(default=None)
    h_c: Optional[np.ndarray] = field(default=None)

    def with_task(self, Lambda_c: np.ndarray, h_c: np.ndarray) -> "ProjectionState":
        return replace(self, Lambda_c=Lambda_c, h_c=h_c)


def pseudoinverse(A: np.ndarray, rank_tol: float = RANK_TOL) -> Tuple[np.ndarray, int]:
    """
    SVD 기반 Moore-Penrose 의사역행렬

    Args:
        A (np.ndarray): (m, n) 행렬
        rank_tol (float): σ_max 대비 상대 특이값 임계값

    Returns:
        Tuple[np.ndarray, int]: (n, m) 의사역행렬과 유효 랭크

    Examples:
        >>> pinv, rank = pseudoinverse(np.array([[1.0, 0.0, 0.0]]))
        >>> rank
        1
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    m, n = A.shape
    if m == 0 or n == 0:
        return np.zeros((n, m)), 0
    if not np.all(np.isfinite(A)):
        raise ValueError("유한하지 않은 원소가 있습니다")

    U, s, Vt = np.linalg.svd(A, full_matrices=False)
    if s[0] == 0.0:
        return np.zeros((n, m)), 0
    keep = s > rank_tol * s[0]
    rank = int(np.count_nonzero(keep))
    pinv = (Vt[keep].T / s[keep]) @ U[:, keep].T
    return pinv, rank


def _full_row_rank_pinv(Jc: np.ndarray, rank_tol: float) -> np.ndarray:
    pinv, rank = pseudoinverse(Jc, rank_tol)
    if rank < Jc.shape[0]:
        raise RankDeficiency(rank=rank, rows=Jc.shape[0])
    return pinv


def projector(Jc: np.ndarray, rank_tol: float = RANK_TOL) -> np.ndarray:
    """
    직교 투영 행렬 P = I - Jc⁺Jc

    Raises:
        RankDeficiency: Jc 의 행 랭크가 부족할 때
    """
    Jc = np.atleast_2d(np.asarray(Jc, dtype=float))
    pinv = _full_row_rank_pinv(Jc, rank_tol)
    P = np.eye(Jc.shape[1]) - pinv @ Jc
    return 0.5 * (P + P.T)


@linalg_error_handler(RankDeficiency, rank=-1, rows=-1)
def projector_dot(Jc: np.ndarray, Jc_dot: np.ndarray, rank_tol: float = RANK_TOL) -> np.ndarray:
    """
    투영 행렬의 시간미분

    Ṗ = -d/dt(Jc⁺) Jc - Jc⁺ Jc_dot,
    d/dt(Jc⁺) = -Jc⁺ Jc_dot Jc⁺ + (I - Jc⁺Jc) Jc_dotᵀ (Jc Jcᵀ)⁻¹
    """
    Jc = np.atleast_2d(np.asarray(Jc, dtype=float))
    Jc_dot = np.atleast_2d(np.asarray(Jc_dot, dtype=float))
    n = Jc.shape[1]
    if Jc.shape[0] == 0:
        return np.zeros((n, n))
    pinv = _full_row_rank_pinv(Jc, rank_tol)
    P = np.eye(n) - pinv @ Jc

    # (Jc Jcᵀ)⁻¹ Jc_dot 를 대칭 solve 로
    gram = scipy.linalg.cho_factor(Jc @ Jc.T)
    pinv_dot = -pinv @ Jc_dot @ pinv + P @ scipy.linalg.cho_solve(gram, Jc_dot).T
    return -(pinv_dot @ Jc + pinv @ Jc_dot)


def constraint_inertia(M: np.ndarray, P: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    구속 일관 관성 Mc = P M + I - P 와 그 역행렬

    Raises:
        SingularConstraintInertia: Mc 가 특이할 때 (SPD M 에서는 내부 오류)
    """
    n = M.shape[0]
    if P.shape != M.shape:
        raise DimensionMismatch(what="P", expected=M.shape, got=P.shape)
    eye = np.eye(n)
    Mc = P @ M + eye - P
    try:
        Mc_inv = scipy.linalg.lu_solve(scipy.linalg.lu_factor(Mc, check_finite=True), eye)
    except (ValueError, scipy.linalg.LinAlgError):
        raise SingularConstraintInertia()
    if not np.all(np.isfinite(Mc_inv)) or np.abs(Mc @ Mc_inv - eye).max() > 1e-8:
        raise SingularConstraintInertia()
    return Mc, Mc_inv


def task_space_terms(
    Jx: np.ndarray,
    Jx_dot: np.ndarray,
    Mc_inv: np.ndarray,
    P: np.ndarray,
    P_dot: np.ndarray,
    h: np.ndarray,
    qdot: np.ndarray
) -> Tuple[np.ndarray, np.ndarray]:
    """
    구속 하의 작업 공간 관성과 바이어스

    Λ_c = (Jx Mc⁻¹ P Jxᵀ)⁻¹
    h_c = Λ_c Jx Mc⁻¹ (P h - Ṗ qdot) - Λ_c Jx_dot qdot

    Args:
        Jx (np.ndarray): (m, Q) 작업 야코비안 (축약된 행일 수 있음)
        Jx_dot (np.ndarray): (m, Q)
        Mc_inv, P, P_dot (np.ndarray): (Q, Q)
        h (np.ndarray): 바이어스 토크
        qdot (np.ndarray): 관절 속도

    Returns:
        Tuple[np.ndarray, np.ndarray]: (Λ_c, h_c)

    Raises:
        TaskSingularity: 작업 방향이 구속 공간에 흡수되어 역행렬이 존재하지 않을 때
    """
    A = Jx @ Mc_inv @ P @ Jx.T
    A = 0.5 * (A + A.T)
    eig = np.linalg.eigvalsh(A)
    scale = np.linalg.norm(Jx, 2) ** 2 * np.linalg.norm(Mc_inv, 2)
    if eig[0] <= TASK_COND_TOL * scale:
        raise TaskSingularity()
    try:
        factor = scipy.linalg.cho_factor(A)
    except scipy.linalg.LinAlgError:
        raise TaskSingularity()

    m = A.shape[0]
    Lambda_c = scipy.linalg.cho_solve(factor, np.eye(m))
    Lambda_c = 0.5 * (Lambda_c + Lambda_c.T)
    rhs = Jx @ Mc_inv @ (P @ h - P_dot @ qdot) - Jx_dot @ qdot
    h_c = scipy.linalg.cho_solve(factor, rhs)
    return Lambda_c, h_c


def prune_rows(
    J: np.ndarray,
    J_dot: np.ndarray,
    rank_tol: float = RANK_TOL
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    SVD 로 행 랭크를 복원합니다.

    행이 이미 독립이면 그대로 반환하고, 아니면 주요 좌특이벡터 U_r 로
    J_r = U_rᵀ J, J_dot_r = U_rᵀ J_dot 를 만듭니다. U_r 의 시간미분은 무시해도
    Ṗ 이 J_dot P 에만 의존하므로 투영에는 정확합니다.

    Returns:
        Tuple[np.ndarray, np.ndarray, np.ndarray]: (J_r, J_dot_r, U_r)

    Raises:
        RankDeficiency: 랭크가 0 일 때
    """
    J = np.atleast_2d(np.asarray(J, dtype=float))
    J_dot = np.atleast_2d(np.asarray(J_dot, dtype=float))
    rows = J.shape[0]
    U, s, _ = np.linalg.svd(J, full_matrices=False)
    rank = 0 if s.size == 0 or s[0] == 0.0 else int(np.count_nonzero(s > rank_tol * s[0]))
    if rank == 0:
        raise RankDeficiency(rank=0, rows=rows)
    if rank == rows:
        return J, J_dot, np.eye(rows)
    U_r = U[:, :rank]
    logger.debug("구속 행 축약: %d -> %d", rows, rank)
    return U_r.T @ J, U_r.T @ J_dot, U_r


def projection_state(
    constraint: ConstraintJacobian,
    M: np.ndarray,
    rank_tol: float = RANK_TOL
) -> ProjectionState:
    """한 주기의 P, Ṗ, Jc⁺, Mc, Mc⁻¹ 를 계산합니다."""
    Jc = constraint.Jc
    n = M.shape[0]
    if Jc.shape[1] != n:
        raise DimensionMismatch(what="Jc columns", expected=n, got=Jc.shape[1])
    if constraint.k == 0:
        pinv = np.zeros((n, 0))
        P = np.eye(n)
        P_dot = np.zeros((n, n))
    else:
        pinv = _full_row_rank_pinv(Jc, rank_tol)
        P = np.eye(n) - pinv @ Jc
        P = 0.5 * (P + P.T)
        P_dot = projector_dot(Jc, constraint.Jc_dot, rank_tol)
    Mc, Mc_inv = constraint_inertia(M, P)
    return ProjectionState(
        Jc=Jc, Jc_dot=constraint.Jc_dot, P=P, P_dot=P_dot,
        Jc_pinv=pinv, Mc=Mc, Mc_inv=Mc_inv,
    )
