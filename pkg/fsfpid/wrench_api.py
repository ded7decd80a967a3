#
# fsfpid - Projected inverse dynamics control and constrained simulation
#
# Copyright (c) 2025 풀스택패밀리 연구소
#
# Licensed under the Apache License, Version 2.0
# See LICENSE file for the full text of the license.
#

"""
구속 공간 토크 합성 모듈

구속 공간 외력 F_e 집계, 선형화 마찰 원뿔/모멘트 제약 아래에서 구속 토크 크기를
최소화하는 명령 렌치 F_c 의 QP, 그리고 (I-P)τ = Jcᵀ F_c 복원을 담당합니다.
구속력은 λ_c = F_e - F_c 로 분해됩니다.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import linprog

from fsfpid.dynamics_api import JointTorque
from fsfpid.errors import DimensionMismatch, InfeasibleQP, QPMaxIteration
from fsfpid.grasp_api import ContactFrame
from fsfpid.projection_api import ConstraintJacobian, ProjectionState

logger = logging.getLogger(__name__)

DEFAULT_EDGES = 8
ROW_TOL = 1e-12


@dataclass(frozen=True)
class FrictionParams:
    """
    접촉 마찰 파라미터

    Attributes:
        mu (float): 접선 마찰 계수
        gamma (float): 비틀림 마찰 계수 [m]
        delta_x (float): 접촉 패치 x 방향 반폭 [m]
        delta_y (float): 접촉 패치 y 방향 반폭 [m]
        min_normal_force (float): 원뿔 꼭짓점을 법선 방향으로 옮기는 최소 법선력 [N].
            0 이면 원래 원뿔과 같습니다.
    """
    mu: float
    gamma: float
    delta_x: float
    delta_y: float
    min_normal_force: float = 0.0

    def __post_init__(self) -> None:
        for name in ("mu", "gamma", "delta_x", "delta_y"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} 는 양수여야 합니다")
        if self.min_normal_force < 0.0:
            raise ValueError("min_normal_force 는 음수일 수 없습니다")


@dataclass(frozen=True, eq=False)
class ContactWrench:
    """접촉 프레임에서 표현한 렌치 (z 는 접촉 법선)"""
    f: np.ndarray
    m: np.ndarray

    @classmethod
    def from_vector(cls, w: np.ndarray) -> "ContactWrench":
        w = np.asarray(w, dtype=float).reshape(6)
        return cls(f=w[:3].copy(), m=w[3:].copy())

    @property
    def vector(self) -> np.ndarray:
        return np.concatenate([self.f, self.m])


@dataclass(frozen=True, eq=False)
class WrenchDecomposition:
    F_e: np.ndarray
    F_c: np.ndarray

    @property
    def lambda_c(self) -> np.ndarray:
        return self.F_e - self.F_c


@dataclass(frozen=True, eq=False)
class QPProblem:
    """
    min xᵀ H x  s.t.  A_ineq x <= b_ineq
    """
    H: np.ndarray
    A_ineq: np.ndarray
    b_ineq: np.ndarray
    warm_start: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        H = np.atleast_2d(np.asarray(self.H, dtype=float))
        n = H.shape[0]
        A = np.asarray(self.A_ineq, dtype=float).reshape(-1, n)
        b = np.asarray(self.b_ineq, dtype=float).reshape(-1)
        if A.shape[0] != b.shape[0]:
            raise DimensionMismatch(what="b_ineq", expected=A.shape[0], got=b.shape[0])
        if not np.allclose(H, H.T, atol=1e-10):
            raise ValueError("H 는 대칭이어야 합니다")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
            raise ValueError("제약 행에 유한하지 않은 값이 있습니다")
        object.__setattr__(self, "H", 0.5 * (H + H.T))
        object.__setattr__(self, "A_ineq", A)
        object.__setattr__(self, "b_ineq", b)

    @property
    def n(self) -> int:
        return self.H.shape[0]


@dataclass(frozen=True, eq=False)
class QPResult:
    x: np.ndarray
    active_set: Tuple[int, ...]
    iterations: int
    objective: float
    multipliers: np.ndarray
    kkt_residual: float
    phase_one: bool = field(default=False)


class ActiveSetQP:
    """
    조밀 행렬 primal active-set QP 솔버

    이전 해로 warm start 하며, 시작점이 실행 불가능하면 scipy.optimize.linprog 로
    실행 가능한 점을 찾습니다. 제어 루프마다 하나의 인스턴스를 사용합니다.

    Args:
        max_iter (int): 최대 반복 횟수
        tol (float): 실행 가능성/승수 허용 오차
    """

    def __init__(self, max_iter: int = 200, tol: float = 1e-10):
        self.max_iter = max_iter
        self.tol = tol
        self.last_solution: Optional[np.ndarray] = None
        self.solves = 0
        self.total_iterations = 0

    def reset(self) -> None:
        self.last_solution = None

    def _feasible(self, A: np.ndarray, b: np.ndarray, x: np.ndarray) -> bool:
        return A.shape[0] == 0 or float(np.max(A @ x - b)) <= self.tol

    def _phase_one(self, A: np.ndarray, b: np.ndarray) -> np.ndarray:
        # 최대 여유 s 를 갖는 내부점: A x + s |A_i| <= b, s <= 1
        n = A.shape[1]
        norms = np.linalg.norm(A, axis=1)
        c = np.zeros(n + 1)
        c[-1] = -1.0
        A_ub = np.hstack([A, norms[:, None]])
        bounds = [(None, None)] * n + [(None, 1.0)]
        res = linprog(c, A_ub=A_ub, b_ub=b, bounds=bounds, method="highs")
        if res.status != 0 or res.x[-1] < -self.tol:
            raise InfeasibleQP()
        return np.asarray(res.x[:n], dtype=float)

    def _initial_point(self, problem: QPProblem) -> Tuple[np.ndarray, bool]:
        A, b, n = problem.A_ineq, problem.b_ineq, problem.n
        for candidate in (problem.warm_start, self.last_solution, np.zeros(n)):
            if candidate is None:
                continue
            candidate = np.asarray(candidate, dtype=float).reshape(-1)
            if candidate.shape[0] == n and self._feasible(A, b, candidate):
                return candidate.copy(), False
        logger.debug("warm start 실행 불가능, phase one 실행")
        return self._phase_one(A, b), True

    def _initial_working_set(self, A: np.ndarray, b: np.ndarray, x: np.ndarray) -> List[int]:
        working: List[int] = []
        if A.shape[0] == 0:
            return working
        slack = b - A @ x
        for i in np.flatnonzero(np.abs(slack) <= self.tol):
            if len(working) >= A.shape[1]:
                break
            trial = A[working + [int(i)]]
            if np.linalg.matrix_rank(trial) == len(working) + 1:
                working.append(int(i))
        return working

    @staticmethod
    def _equality_step(H: np.ndarray, Aw: np.ndarray, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        n, m = H.shape[0], Aw.shape[0]
        kkt = np.zeros((n + m, n + m))
        kkt[:n, :n] = H
        kkt[:n, n:] = Aw.T
        kkt[n:, :n] = Aw
        rhs = np.concatenate([-H @ x, np.zeros(m)])
        try:
            sol = np.linalg.solve(kkt, rhs)
        except np.linalg.LinAlgError:
            sol = np.linalg.lstsq(kkt, rhs, rcond=None)[0]
        return sol[:n], sol[n:]

    def solve(self, problem: QPProblem) -> QPResult:
        """
        QP 를 풉니다.

        Returns:
            QPResult: 해, 활성 집합, 반복 횟수, 목적값, 승수, KKT 잔차

        Raises:
            InfeasibleQP: 실행 가능한 점이 없을 때
            QPMaxIteration: 최대 반복을 넘었을 때
        """
        H, A, b = problem.H, problem.A_ineq, problem.b_ineq
        x, phase_one = self._initial_point(problem)
        working = self._initial_working_set(A, b, x)

        for iteration in range(1, self.max_iter + 1):
            Aw = A[working] if working else np.zeros((0, problem.n))
            p, nu = self._equality_step(H, Aw, x)

            if np.linalg.norm(p, np.inf) <= 1e-12 * (1.0 + np.linalg.norm(x, np.inf)):
                if not working or nu.min() >= -self.tol:
                    return self._finish(problem, x, working, nu, iteration, phase_one)
                working.pop(int(np.argmin(nu)))
                continue

            alpha, blocking = 1.0, None
            Ap = A @ p
            slack = b - A @ x
            for i in range(A.shape[0]):
                if i in working or Ap[i] <= 1e-14:
                    continue
                ratio = max(slack[i], 0.0) / Ap[i]
                if ratio < alpha:
                    alpha, blocking = ratio, i
            x = x + alpha * p
            if blocking is not None:
                working.append(blocking)

        raise QPMaxIteration(iterations=self.max_iter)

    def _finish(self, problem: QPProblem, x: np.ndarray, working: List[int],
                nu: np.ndarray, iterations: int, phase_one: bool) -> QPResult:
        multipliers = np.zeros(problem.A_ineq.shape[0])
        if working:
            multipliers[working] = np.maximum(nu, 0.0)
        stationarity = problem.H @ x + problem.A_ineq.T @ multipliers
        self.last_solution = x.copy()
        self.solves += 1
        self.total_iterations += iterations
        return QPResult(
            x=x,
            active_set=tuple(sorted(working)),
            iterations=iterations,
            objective=float(x @ problem.H @ x),
            multipliers=multipliers,
            kkt_residual=float(np.linalg.norm(stationarity, np.inf)),
            phase_one=phase_one,
        )


def aggregate_external_wrench(
    qdot: np.ndarray,
    M: np.ndarray,
    proj: ProjectionState,
    tau_motion: np.ndarray,
    h: np.ndarray,
    Fx: np.ndarray,
    Jx: np.ndarray
) -> np.ndarray:
    """
    구속 공간 외력 집계

    F_e = Jc⁺ᵀ [ (I-P) M Mc⁻¹ (P τ - P h + Ṗ qdot + P Jxᵀ F_x) + (I-P) h - (I-P) Jxᵀ F_x ]

    외력 항은 두 곳에서 흔히 쓰는 식과 다릅니다. 괄호 안에서는 Jxᵀ F_x 대신
    시뮬레이터의 운동 방정식과 같은 P Jxᵀ F_x 를 쓰고, 외력 중 구속 공간으로
    향하는 성분 (I-P) Jxᵀ F_x 는 구속이 그대로 받으므로 -(I-P) Jxᵀ F_x 를 더합니다.
    F_x = 0 이면 두 식은 같고, F_x ≠ 0 이면 이 형태만 라그랑주 승수와 일치합니다.

    Args:
        qdot (np.ndarray): 관절 속도
        M (np.ndarray): 질량 행렬
        proj (ProjectionState): 이번 주기의 투영 스냅샷
        tau_motion (np.ndarray): 운동 공간 토크
        h (np.ndarray): 바이어스 토크
        Fx (np.ndarray): 추정 외력 (작업 공간)
        Jx (np.ndarray): 작업 야코비안

    Returns:
        np.ndarray: 축약 구속 좌표의 F_e
    """
    P = proj.P
    Q = np.eye(P.shape[0]) - P
    ext = Jx.T @ np.asarray(Fx, dtype=float)
    inner = P @ tau_motion - P @ h + proj.P_dot @ qdot + P @ ext
    return proj.Jc_pinv.T @ (Q @ M @ proj.Mc_inv @ inner + Q @ h - Q @ ext)


def linearize_friction_cone(params: FrictionParams,
                            edges: int = DEFAULT_EDGES) -> Tuple[np.ndarray, np.ndarray]:
    """
    접촉 하나의 선형화 제약 A w <= b (로컬 [f; m])

    내접 다각뿔 cos θ_j f_x + sin θ_j f_y <= μ cos(π/edges) f_z, 일방향 f_z >= 0,
    모멘트 |m_z| <= γ f_z, |m_x| <= δx f_z, |m_y| <= δy f_z 를 담습니다.
    min_normal_force 가 있으면 모든 행에서 f_z 대신 f_z - f_min 을 씁니다.

    Examples:
        >>> A, b = linearize_friction_cone(FrictionParams(0.5, 0.01, 0.05, 0.05))
        >>> bool(np.all(A @ np.array([0, 0, 1.0, 0, 0, 0]) <= b))
        True
    """
    if edges < 3:
        raise ValueError("edges 는 3 이상이어야 합니다")
    rows = [[0.0, 0.0, -1.0, 0.0, 0.0, 0.0]]
    scale = params.mu * np.cos(np.pi / edges)
    for j in range(edges):
        theta = 2.0 * np.pi * j / edges
        rows.append([np.cos(theta), np.sin(theta), -scale, 0.0, 0.0, 0.0])
    for sign in (1.0, -1.0):
        rows.append([0.0, 0.0, -params.gamma, 0.0, 0.0, sign])
        rows.append([0.0, 0.0, -params.delta_x, sign, 0.0, 0.0])
        rows.append([0.0, 0.0, -params.delta_y, 0.0, sign, 0.0])
    A = np.array(rows)
    b = params.min_normal_force * A[:, 2]
    return A, b


def contact_constraint_rows(
    contacts: Sequence[ContactFrame],
    params: FrictionParams,
    edges: int = DEFAULT_EDGES
) -> Tuple[np.ndarray, np.ndarray]:
    """월드 접촉 렌치 벡터 (접촉별 [f; m], 길이 6K) 에 대한 제약 행"""
    A_local, b_local = linearize_friction_cone(params, edges)
    K = len(contacts)
    A = np.zeros((K * A_local.shape[0], 6 * K))
    for i, contact in enumerate(contacts):
        Rt = contact.rotation.T
        rows = slice(i * A_local.shape[0], (i + 1) * A_local.shape[0])
        A[rows, 6 * i:6 * i + 3] = A_local[:, :3] @ Rt
        A[rows, 6 * i + 3:6 * i + 6] = A_local[:, 3:] @ Rt
    return A, np.tile(b_local, K)


def _reduce_rows(C: np.ndarray, d: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    norms = np.linalg.norm(C, axis=1)
    scale = max(float(norms.max(initial=0.0)), 1.0)
    kept_C: List[np.ndarray] = []
    kept_d: List[float] = []
    for row, rhs, norm in zip(C, d, norms):
        if norm <= ROW_TOL * scale:
            # 0 <= rhs 는 항상 만족, 아니면 실행 불가능 행으로 남긴다
            if rhs >= -ROW_TOL * scale:
                continue
            kept_C.append(row)
            kept_d.append(rhs)
            continue
        unit, unit_rhs = row / norm, rhs / norm
        duplicate = False
        for j, (other, other_rhs) in enumerate(zip(kept_C, kept_d)):
            other_norm = np.linalg.norm(other)
            if other_norm > 0.0 and np.allclose(other / other_norm, unit, atol=1e-9):
                # 평행한 행은 더 강한 쪽만 남긴다
                if unit_rhs < other_rhs / other_norm:
                    kept_C[j], kept_d[j] = unit, unit_rhs
                duplicate = True
                break
        if not duplicate:
            kept_C.append(unit)
            kept_d.append(unit_rhs)
    n = C.shape[1]
    return np.array(kept_C).reshape(-1, n), np.array(kept_d)


def build_wrench_qp(
    constraint: ConstraintJacobian,
    contacts: Sequence[ContactFrame],
    params: FrictionParams,
    F_e: np.ndarray,
    offset: Optional[np.ndarray] = None,
    edges: int = DEFAULT_EDGES,
    epsilon: Optional[float] = None,
    warm_start: Optional[np.ndarray] = None
) -> QPProblem:
    """
    명령 렌치 QP 를 구성합니다.

    접촉 렌치는 w = offset + basis (F_e - F_c) 이며, 제약 A w <= b 를 F_c 에 대한
    행 -A basis F_c <= b - A offset - A basis F_e 로 바꿉니다. 사상 후 사라지거나
    평행하게 겹치는 행은 제거합니다. 목적 함수 헤시안은 Jc Jcᵀ + εI 입니다.

    Args:
        constraint (ConstraintJacobian): 축약 구속 야코비안과 렌치 기저
        contacts (Sequence[ContactFrame]): 접촉 프레임
        params (FrictionParams): 마찰 파라미터
        F_e (np.ndarray): 구속 공간 외력
        offset (np.ndarray, optional): 물체 하중 분배 등 구속력 외의 접촉 렌치
        edges (int): 원뿔 선형화 모서리 수
        epsilon (float, optional): 정규화 계수, 기본 1e-8 trace(JcJcᵀ)/k
        warm_start (np.ndarray, optional): 이전 해
    """
    basis = constraint.basis
    A_phys, b_phys = contact_constraint_rows(contacts, params, edges)
    if A_phys.shape[1] != basis.shape[0]:
        raise DimensionMismatch(what="contact wrench size", expected=basis.shape[0], got=A_phys.shape[1])
    w0 = np.zeros(basis.shape[0]) if offset is None else np.asarray(offset, dtype=float)

    a_lambda = A_phys @ basis
    C = -a_lambda
    d = b_phys - A_phys @ w0 - a_lambda @ np.asarray(F_e, dtype=float)
    C, d = _reduce_rows(C, d)

    JJt = constraint.Jc @ constraint.Jc.T
    k = JJt.shape[0]
    if epsilon is None:
        epsilon = 1e-8 * float(np.trace(JJt)) / k
    H = JJt + epsilon * np.eye(k)
    return QPProblem(H=H, A_ineq=C, b_ineq=d, warm_start=warm_start)


def solve_commanded_wrench(problem: QPProblem, solver: Optional[ActiveSetQP] = None) -> QPResult:
    """QP 를 풀어 F_c* 를 구합니다. solver 를 넘기면 warm start 상태가 이어집니다."""
    if solver is None:
        solver = ActiveSetQP()
    result = solver.solve(problem)
    logger.debug("QP 해: iterations=%d active=%d objective=%.3e",
                 result.iterations, len(result.active_set), result.objective)
    return result


def constraint_torque(F_c: np.ndarray, Jc: np.ndarray) -> JointTorque:
    """τ_constraint = Jcᵀ F_c"""
    return JointTorque(Jc.T @ np.asarray(F_c, dtype=float))


def local_contact_wrenches(w_world: np.ndarray, contacts: Sequence[ContactFrame]) -> np.ndarray:
    """월드 접촉 렌치 벡터를 (K, 6) 로컬 [f; m] 로 바꿉니다."""
    w = np.asarray(w_world, dtype=float).reshape(len(contacts), 6)
    out = np.empty_like(w)
    for i, contact in enumerate(contacts):
        Rt = contact.rotation.T
        out[i, :3] = Rt @ w[i, :3]
        out[i, 3:] = Rt @ w[i, 3:]
    return out


def cone_margin(w_local: np.ndarray, params: FrictionParams) -> float:
    """
    정확한(이차) 마찰 원뿔과 모멘트 제약의 최소 여유

    음수이면 일방향, 원뿔, 모멘트 제약 중 하나를 위반합니다.
    """
    f = np.asarray(w_local, dtype=float).reshape(6)
    fz = f[2]
    return float(min(
        fz,
        params.mu * fz - np.hypot(f[0], f[1]),
        params.gamma * fz - abs(f[5]),
        params.delta_x * fz - abs(f[3]),
        params.delta_y * fz - abs(f[4]),
    ))
