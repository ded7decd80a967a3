#
# fsfpid - Projected inverse dynamics control and constrained simulation
#
# Copyright (c) 2025 풀스택패밀리 연구소
#
# Licensed under the Apache License, Version 2.0
# See LICENSE file for the full text of the license.
#

import functools
from typing import Any, Callable, Optional

import numpy as np
import scipy.linalg

__all__ = [
    # 기본 예외
    "PidErrorMixin",
    "ConfigValidationError",
    "SimulationError",
    # 수치 계산 에러 (1xx)
    "DimensionMismatch",
    "RankDeficiency",
    "TaskSingularity",
    "SingularConstraintInertia",
    # 최적화 에러 (2xx)
    "InfeasibleQP",
    "QPMaxIteration",
    # 적분 에러 (3xx)
    "DriftToleranceExceeded",
    "linalg_error_handler",
]


class PidErrorMixin(Exception):
    name: str
    code: int
    msg: str

    def __init__(self, **ctx: Any) -> None:
        self.__dict__ = ctx

    def __str__(self) -> str:
        return self.msg.format(**self.__dict__)


class ConfigValidationError(Exception):
    """
    설정 검증 에러

    시나리오/로봇 설정 파일의 값이 유효하지 않을 때 발생합니다.

    Attributes:
        message (str): 에러 메시지
        field (str, optional): 점(.)으로 구분된 설정 경로 (예: "friction.mu")

    Examples:
        >>> raise ConfigValidationError("필수 항목입니다", field="friction")
    """

    def __init__(self, message: str, field: Optional[str] = None):
        self.message = message
        self.field = field
        super().__init__(message)

    def __str__(self) -> str:
        if self.field:
            return f"{self.field}: {self.message}"
        return self.message


class SimulationError(Exception):
    """
    시뮬레이션 루프 에러

    제어/적분 루프 도중 발생한 에러를 tick 번호와 함께 감쌉니다.

    Attributes:
        message (str): 에러 메시지
        tick (int, optional): 에러가 발생한 제어 주기 번호
        time (float, optional): 시뮬레이션 시간 [s]
    """

    def __init__(
        self,
        message: str,
        tick: Optional[int] = None,
        time: Optional[float] = None
    ):
        self.message = message
        self.tick = tick
        self.time = time
        super().__init__(message)

    def __str__(self) -> str:
        parts = [self.message]
        if self.tick is not None:
            parts.append(f"tick={self.tick}")
        if self.time is not None:
            parts.append(f"t={self.time:.4f}")
        return " | ".join(parts)


class NumericalError(PidErrorMixin):
    pass


class SolverError(PidErrorMixin):
    pass


class IntegrationError(PidErrorMixin):
    pass


class DimensionMismatch(NumericalError):
    name = "dimension_mismatch"
    code = 100
    msg = "차원이 맞지 않습니다: {what} (expected {expected}, got {got})"


class RankDeficiency(NumericalError):
    name = "rank_deficiency"
    code = 101
    msg = "구속 야코비안의 행 랭크가 부족합니다: rank={rank}, rows={rows}"


class TaskSingularity(NumericalError):
    name = "task_singularity"
    code = 102
    msg = "작업 공간 관성 행렬이 특이합니다 (task direction annihilated by constraints)."


class SingularConstraintInertia(NumericalError):
    name = "singular_constraint_inertia"
    code = 103
    msg = "구속 일관 관성 행렬 M_c 가 특이합니다."


class InfeasibleQP(SolverError):
    name = "infeasible_qp"
    code = 200
    msg = "접촉 렌치 QP 의 제약 조건을 만족하는 해가 없습니다."


class QPMaxIteration(SolverError):
    name = "qp_max_iteration"
    code = 201
    msg = "Active-set QP 가 최대 반복 횟수({iterations})를 초과했습니다."


class DriftToleranceExceeded(IntegrationError):
    name = "drift_tolerance_exceeded"
    code = 300
    msg = "구속 drift 가 허용치를 초과했습니다: |Jc qdot|={drift:.3e} > {tolerance:.1e}"


NUMERICAL_ERRORS = tuple(err for err in (DimensionMismatch, RankDeficiency, TaskSingularity,
                                         SingularConstraintInertia) if 100 <= err.code < 200)
SOLVER_ERRORS = tuple(err for err in (InfeasibleQP, QPMaxIteration) if 200 <= err.code < 300)
INTEGRATION_ERRORS = tuple(err for err in (DriftToleranceExceeded,) if 300 <= err.code < 400)


def linalg_error_handler(error_cls: type, **ctx: Any) -> Callable:
    """선형대수 예외를 도메인 예외로 변환하는 데코레이터

    Args:
        error_cls (type): 변환할 PidErrorMixin 하위 클래스
        ctx: 에러 메시지 포맷에 사용할 값
    """
    def decorator(func: Callable) -> Callable:
        @functools.wraps(func)
        def wrapper(*args: Any, **kwargs: Any) -> Any:
            try:
                return func(*args, **kwargs)
            except (np.linalg.LinAlgError, scipy.linalg.LinAlgError):
                raise error_cls(**ctx)
        return wrapper
    return decorator
