import shutil
from unittest.mock import MagicMock, patch

import pytest

from fsfpid.__main__ import EXIT_CONFIG, EXIT_FAILED, EXIT_OK, _is_scenario, build_parser, main
from fsfpid.errors import SimulationError

from .conftest import DATA_DIR

WIPE = str(DATA_DIR / "single_wipe.json")


def metrics(passed):
    result = MagicMock()
    result.passed = passed
    return result


# =============================================================================
# 단일 시나리오
# =============================================================================

class TestRunConfig:
    """run --config 종료 코드 테스트"""

    @patch("fsfpid.__main__.build_scenario")
    @patch("fsfpid.__main__.run_and_report")
    def test_passed(self, mock_report, mock_build, tmp_path):
        mock_report.return_value = metrics(True)
        code = main(["run", "--config", WIPE, "--out", str(tmp_path), "--duration", "0.5", "--seed", "3"])
        assert code == EXIT_OK

        config = mock_build.call_args[0][0]
        assert config.name == "single_wipe"
        assert config.duration == 0.5
        assert config.seed == 3
        mock_report.assert_called_once_with(mock_build.return_value, tmp_path)

    @patch("fsfpid.__main__.build_scenario")
    @patch("fsfpid.__main__.run_and_report")
    def test_failed_checks(self, mock_report, mock_build, tmp_path):
        mock_report.return_value = metrics(False)
        assert main(["run", "--config", WIPE, "--out", str(tmp_path)]) == EXIT_FAILED

    @patch("fsfpid.__main__.build_scenario")
    @patch("fsfpid.__main__.run_and_report")
    def test_simulation_error(self, mock_report, mock_build, tmp_path):
        mock_report.side_effect = SimulationError("TaskSingularity: 작업 관성 특이", tick=12, time=0.012)
        assert main(["run", "--config", WIPE, "--out", str(tmp_path)]) == EXIT_FAILED

    def test_missing_config(self, tmp_path):
        assert main(["run", "--config", str(tmp_path / "none.json"), "--out", str(tmp_path)]) == EXIT_CONFIG

    def test_invalid_override(self, tmp_path):
        assert main(["run", "--config", WIPE, "--out", str(tmp_path), "--dt", "-0.001"]) == EXIT_CONFIG

    def test_requires_source(self, tmp_path):
        with pytest.raises(SystemExit) as exc:
            build_parser().parse_args(["run", "--out", str(tmp_path)])
        assert exc.value.code == 2


# =============================================================================
# 배치
# =============================================================================

class TestRunBatch:
    """run --batch 테스트"""

    @patch("fsfpid.__main__.run_batch")
    def test_batch_skips_model_files(self, mock_batch, tmp_path):
        mock_batch.return_value = {"single_wipe": metrics(True), "dual_hold": metrics(True)}
        code = main(["run", "--batch", str(DATA_DIR), "--out", str(tmp_path), "--workers", "3"])
        assert code == EXIT_OK

        paths, out = mock_batch.call_args[0]
        assert [p.name for p in paths] == ["dual_circle.json", "dual_hold.json", "single_wipe.json"]
        assert out == tmp_path
        assert mock_batch.call_args[1] == {"workers": 3, "duration": None, "dt": None, "seed": None}

    @patch("fsfpid.__main__.run_batch")
    def test_batch_any_failure(self, mock_batch, tmp_path):
        mock_batch.return_value = {"single_wipe": metrics(True), "dual_hold": metrics(False)}
        assert main(["run", "--batch", str(DATA_DIR), "--out", str(tmp_path)]) == EXIT_FAILED

    def test_empty_batch(self, tmp_path):
        shutil.copy(DATA_DIR / "lwr.json", tmp_path / "lwr.json")
        assert main(["run", "--batch", str(tmp_path), "--out", str(tmp_path / "out")]) == EXIT_CONFIG


def test_is_scenario(tmp_path):
    assert _is_scenario(DATA_DIR / "dual_hold.json")
    assert not _is_scenario(DATA_DIR / "lwr.json")
    broken = tmp_path / "broken.json"
    broken.write_text("{", encoding="utf-8")
    # 읽을 수 없는 파일은 시나리오로 보고 load_scenario 가 에러를 내게 둔다
    assert _is_scenario(broken)
