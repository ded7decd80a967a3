#
# fsfpid - Projected inverse dynamics control and constrained simulation
#
# Copyright (c) 2025 풀스택패밀리 연구소
#
# Licensed under the Apache License, Version 2.0
# See LICENSE file for the full text of the license.
#

"""
파지 맵(grasp map) 모듈

접촉별 grasp 행렬, grasp 맵과 내부 렌치 영공간 투영, 다중 팔 구속 야코비안,
물체 프레임(질량 중심, 자세, 트위스트)과 물체 작업 야코비안을 다룹니다.

렌치는 [힘; 모멘트] 순서, 트위스트/야코비안 행은 [각; 선] 순서입니다.
두 순서의 변환은 이 모듈의 경계(twist_to_wrench_order)에서만 일어납니다.
"""

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from fsfpid.errors import DimensionMismatch
from fsfpid.projection_api import (
    RANK_TOL,
    ConstraintJacobian,
    projector_dot,
    prune_rows,
    pseudoinverse,
)


def skew(r: Sequence[float]) -> np.ndarray:
    """skew(r) @ v == r x v 인 3x3 반대칭 행렬"""
    x, y, z = np.asarray(r, dtype=float).reshape(3)
    return np.array([
        [0.0, -z, y],
        [z, 0.0, -x],
        [-y, x, 0.0],
    ])


def grasp_matrix(r: Sequence[float]) -> np.ndarray:
    """
    접촉 하나의 grasp 행렬 [[I, 0], [skew(r), I]]

    접촉 렌치 [f; m] 을 물체 질량 중심 기준 렌치 [f; m + r x f] 로 옮깁니다.
    """
    G = np.eye(6)
    G[3:, :3] = skew(r)
    return G


def twist_to_wrench_order(J: np.ndarray) -> np.ndarray:
    """[각; 선] 행 순서의 야코비안을 [선; 각] 순서로 바꿉니다."""
    J = np.asarray(J, dtype=float)
    if J.shape[0] != 6:
        raise DimensionMismatch(what="jacobian rows", expected=6, got=J.shape[0])
    return np.vstack([J[3:], J[:3]])


@dataclass(frozen=True, eq=False)
class ContactFrame:
    """
    접촉 프레임

    Attributes:
        position (np.ndarray): 월드 좌표 접촉점 [m]
        rotation (np.ndarray): 접촉 프레임 -> 월드 회전; 로컬 z 는 접촉 법선으로,
            접촉면에서 손 쪽을 향합니다 (밀어내는 힘이 f_z > 0)
        r (np.ndarray): 접촉점 - 물체 질량 중심 [m]
    """
    position: np.ndarray
    rotation: np.ndarray
    r: np.ndarray

    def __post_init__(self) -> None:
        R = np.asarray(self.rotation, dtype=float).reshape(3, 3)
        if np.abs(R.T @ R - np.eye(3)).max() > 1e-10 or np.linalg.det(R) < 0.0:
            raise ValueError("접촉 프레임 회전이 정규직교가 아닙니다")
        object.__setattr__(self, "rotation", R)
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float).reshape(3))
        object.__setattr__(self, "r", np.asarray(self.r, dtype=float).reshape(3))


@dataclass(frozen=True, eq=False)
class GraspMap:
    matrices: Tuple[np.ndarray, ...]
    G: np.ndarray
    G_pinv: np.ndarray
    N_G: np.ndarray

    @property
    def K(self) -> int:
        return len(self.matrices)


def grasp_map(contacts: Sequence[ContactFrame]) -> GraspMap:
    """
    grasp 맵 G = [G_1 ... G_K] 와 내부 렌치 투영 N_G = I - G⁺G

    Args:
        contacts (Sequence[ContactFrame]): 접촉 프레임 목록 (K >= 1)

    Returns:
        GraspMap: grasp 맵

    Examples:
        >>> gm = grasp_map([ContactFrame(p1, R1, r1), ContactFrame(p2, R2, r2)])
        >>> gm.N_G.shape
        (12, 12)
    """
    if len(contacts) < 1:
        raise ValueError("접촉이 최소 하나 필요합니다")
    matrices = tuple(grasp_matrix(c.r) for c in contacts)
    G = np.hstack(matrices)
    G_pinv, _ = pseudoinverse(G)
    N_G = np.eye(G.shape[1]) - G_pinv @ G
    return GraspMap(matrices=matrices, G=G, G_pinv=G_pinv, N_G=0.5 * (N_G + N_G.T))


def grasp_map_dot(grasp: GraspMap, r_dot: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    grasp 맵과 내부 렌치 투영의 시간미분

    Args:
        grasp (GraspMap): 현재 grasp 맵
        r_dot (np.ndarray): (K, 3) 접촉점 속도 - 물체 질량 중심 속도

    Returns:
        Tuple[np.ndarray, np.ndarray]: (Ġ, Ṅ_G)
    """
    r_dot = np.asarray(r_dot, dtype=float).reshape(grasp.K, 3)
    blocks = []
    for rd in r_dot:
        block = np.zeros((6, 6))
        block[3:, :3] = skew(rd)
        blocks.append(block)
    G_dot = np.hstack(blocks)
    # N_G 는 G 의 영공간 투영이므로 구속 투영과 같은 미분 공식을 쓴다
    return G_dot, projector_dot(grasp.G, G_dot)


def multiarm_constraint_jacobian(
    grasp: GraspMap,
    arm_jacobians: Sequence[np.ndarray],
    arm_jacobian_dots: Optional[Sequence[np.ndarray]] = None,
    N_G_dot: Optional[np.ndarray] = None,
    rank_tol: float = RANK_TOL
) -> ConstraintJacobian:
    """
    다중 팔 구속 야코비안 Jc = N_G blockdiag(J_1 ... J_K)

    각 팔 야코비안은 접촉점에서 월드 좌표로 표현된 [각; 선] 행 순서여야 합니다.
    행 랭크가 부족하면 SVD 로 축약하며, 축약 기저는 ConstraintJacobian.basis 에
    담겨 λ 를 물리 접촉 렌치 (접촉별 [f; m]) 로 되돌립니다.

    Raises:
        DimensionMismatch: 팔 개수가 접촉 개수와 다를 때
        RankDeficiency: 축약 후에도 유효한 구속 행이 없을 때 (K=1, r=0 등)
    """
    if len(arm_jacobians) != grasp.K:
        raise DimensionMismatch(what="arm_jacobians", expected=grasp.K, got=len(arm_jacobians))

    blk = scipy.linalg.block_diag(*[twist_to_wrench_order(J) for J in arm_jacobians])
    Jc_full = grasp.N_G @ blk

    if arm_jacobian_dots is None:
        blk_dot = np.zeros_like(blk)
    else:
        blk_dot = scipy.linalg.block_diag(*[twist_to_wrench_order(Jd) for Jd in arm_jacobian_dots])
    Jc_full_dot = grasp.N_G @ blk_dot
    if N_G_dot is not None:
        Jc_full_dot = Jc_full_dot + N_G_dot @ blk

    Jc, Jc_dot, basis = prune_rows(Jc_full, Jc_full_dot, rank_tol)
    return ConstraintJacobian(Jc=Jc, Jc_dot=Jc_dot, basis=basis)


@dataclass(frozen=True, eq=False)
class ObjectFrame:
    """
    강체로 파지된 물체의 프레임

    Attributes:
        position (np.ndarray): 질량 중심 (접촉점 평균) [m]
        rotation (np.ndarray): 물체 자세 (첫 번째 손 자세 x 고정 오프셋)
        twist (np.ndarray): [각속도; 질량 중심 선속도]
        r (np.ndarray): (K, 3) 접촉점 - 질량 중심
        r_dot (np.ndarray): (K, 3) 그 시간미분
    """
    position: np.ndarray
    rotation: np.ndarray
    twist: np.ndarray
    r: np.ndarray
    r_dot: np.ndarray


def object_frame(
    contact_positions: np.ndarray,
    contact_velocities: np.ndarray,
    contact_angular_velocities: np.ndarray,
    reference_rotation: np.ndarray,
    rotation_offset: np.ndarray
) -> ObjectFrame:
    """접촉점 평균을 질량 중심으로 하는 물체 프레임을 계산합니다."""
    p = np.asarray(contact_positions, dtype=float)
    v = np.asarray(contact_velocities, dtype=float)
    w = np.asarray(contact_angular_velocities, dtype=float)
    com = p.mean(axis=0)
    com_dot = v.mean(axis=0)
    twist = np.concatenate([w.mean(axis=0), com_dot])
    return ObjectFrame(
        position=com,
        rotation=np.asarray(reference_rotation) @ np.asarray(rotation_offset),
        twist=twist,
        r=p - com,
        r_dot=v - com_dot,
    )


def object_task_jacobian(
    arm_jacobians: Sequence[np.ndarray],
    arm_jacobian_dots: Sequence[np.ndarray]
) -> Tuple[np.ndarray, np.ndarray]:
    """
    물체 작업 야코비안 Jx = [J_1 ... J_K] / K

    선속도 행은 접촉점 속도의 평균(= 질량 중심 속도), 각속도 행은 손 각속도의
    평균으로, 구속을 만족하는 운동에서 물체의 트위스트와 정확히 같습니다.
    """
    K = len(arm_jacobians)
    Jx = np.hstack([np.asarray(J, dtype=float) / K for J in arm_jacobians])
    Jx_dot = np.hstack([np.asarray(Jd, dtype=float) / K for Jd in arm_jacobian_dots])
    return Jx, Jx_dot


def load_share(wrench: np.ndarray, K: int) -> np.ndarray:
    """
    물체 작업 렌치를 접촉별 렌치 (월드, 접촉별 [f; m]) 로 나눕니다.

    object_task_jacobian 의 전치가 작용시키는 분배와 같으며, 접촉점 평균이
    질량 중심이므로 G @ load_share(w) 는 w 를 [f; m] 순서로 되돌립니다.

    Args:
        wrench (np.ndarray): 물체 작업 렌치 [모멘트; 힘]
        K (int): 접촉 개수
    """
    wrench = np.asarray(wrench, dtype=float).reshape(6)
    share = np.concatenate([wrench[3:], wrench[:3]]) / K
    return np.tile(share, K)


def contact_frames(
    positions: Sequence[np.ndarray],
    rotations: Sequence[np.ndarray],
    com: np.ndarray
) -> List[ContactFrame]:
    return [ContactFrame(position=p, rotation=R, r=np.asarray(p) - com)
            for p, R in zip(positions, rotations)]
