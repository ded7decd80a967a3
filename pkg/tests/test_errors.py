import numpy as np
import pytest
import scipy.linalg

from fsfpid.errors import *
from fsfpid.errors import (
    PidErrorMixin,
    NumericalError,
    SolverError,
    IntegrationError,
    NUMERICAL_ERRORS,
    SOLVER_ERRORS,
    INTEGRATION_ERRORS,
)

numerical_errors = [err.name for err in NUMERICAL_ERRORS]
solver_errors = [err.name for err in SOLVER_ERRORS]
integration_errors = [err.name for err in INTEGRATION_ERRORS]


def test_error_groups_follow_code_ranges():
    assert numerical_errors == [
        "dimension_mismatch",
        "rank_deficiency",
        "task_singularity",
        "singular_constraint_inertia",
    ]
    assert solver_errors == ["infeasible_qp", "qp_max_iteration"]
    assert integration_errors == ["drift_tolerance_exceeded"]

    for err in NUMERICAL_ERRORS:
        assert 100 <= err.code < 200
        assert issubclass(err, NumericalError)
    for err in SOLVER_ERRORS:
        assert 200 <= err.code < 300
        assert issubclass(err, SolverError)
    for err in INTEGRATION_ERRORS:
        assert 300 <= err.code < 400
        assert issubclass(err, IntegrationError)


def test_raise_error_with_context():
    with pytest.raises(PidErrorMixin) as exc:
        raise RankDeficiency(rank=2, rows=3)

    assert exc.value.name == "rank_deficiency"
    assert exc.value.code == 101
    assert exc.value.rank == 2
    assert "rank=2" in str(exc.value)
    assert "rows=3" in str(exc.value)


def test_drift_message_formats_numbers():
    error = DriftToleranceExceeded(drift=2.5e-5, tolerance=1e-6)
    assert "2.500e-05" in str(error)
    assert "1.0e-06" in str(error)


def test_linalg_error_handler_maps_numpy_error():
    @linalg_error_handler(SingularConstraintInertia)
    def func(A):
        return np.linalg.inv(A)

    with pytest.raises(SingularConstraintInertia):
        func(np.zeros((3, 3)))


def test_linalg_error_handler_maps_scipy_error():
    @linalg_error_handler(TaskSingularity)
    def func(A):
        return scipy.linalg.cho_factor(A)

    with pytest.raises(TaskSingularity):
        func(-np.eye(2))


def test_linalg_error_handler_passes_result():
    @linalg_error_handler(TaskSingularity)
    def func(A):
        return np.linalg.inv(A)

    np.testing.assert_allclose(func(2.0 * np.eye(2)), 0.5 * np.eye(2))


# =============================================================================
# 설정/시뮬레이션 예외
# =============================================================================

class TestConfigValidationError:
    """ConfigValidationError 테스트"""

    def test_basic_creation(self):
        """기본 생성 테스트"""
        error = ConfigValidationError("필수 항목입니다")
        assert error.message == "필수 항목입니다"
        assert error.field is None
        assert str(error) == "필수 항목입니다"

    def test_with_field(self):
        """설정 경로 포함 생성 테스트"""
        error = ConfigValidationError("양수여야 합니다", field="friction.mu")
        assert error.field == "friction.mu"
        assert str(error) == "friction.mu: 양수여야 합니다"

    def test_raise_and_catch(self):
        """예외 발생 및 캐치 테스트"""
        with pytest.raises(ConfigValidationError) as exc_info:
            raise ConfigValidationError("필수 항목입니다", field="object")
        assert exc_info.value.field == "object"


class TestSimulationError:
    """SimulationError 테스트"""

    def test_basic_creation(self):
        """기본 생성 테스트"""
        error = SimulationError("루프 실패")
        assert error.tick is None
        assert str(error) == "루프 실패"

    def test_with_tick_and_time(self):
        """tick, 시각 포함 생성 테스트"""
        error = SimulationError("루프 실패", tick=42, time=0.042)
        assert error.tick == 42
        assert str(error) == "루프 실패 | tick=42 | t=0.0420"

    def test_chained_cause(self):
        """원인 예외 연결 테스트"""
        try:
            try:
                raise InfeasibleQP()
            except InfeasibleQP as e:
                raise SimulationError(str(e), tick=3) from e
        except SimulationError as wrapped:
            assert isinstance(wrapped.__cause__, InfeasibleQP)
            assert wrapped.tick == 3
