"""Tests for exception types, stage tagging and the logger."""

import pytest

from src.config import Settings
from src.utils.errors import CsvFormatError, FeatureMismatchError, StageError, stage
from src.utils.logger import app_logger


class TestStage:
    """Test cases for the stage context manager."""

    def test_wraps_failures(self):
        with pytest.raises(StageError) as excinfo:
            with stage("prepare:join"):
                raise KeyError("TransactionID")

        assert excinfo.value.stage == "prepare:join"
        assert "TransactionID" in excinfo.value.detail
        assert isinstance(excinfo.value.__cause__, KeyError)

    def test_inner_stage_wins(self):
        with pytest.raises(StageError) as excinfo:
            with stage("train:load"):
                with stage("train:stacking"):
                    raise ValueError("boom")

        assert excinfo.value.stage == "train:stacking"

    def test_records_carry_stage(self):
        records = []
        sink = app_logger.add(records.append, format="{extra[stage]}|{message}", level="INFO")
        try:
            app_logger.info("outside")
            with stage("evaluate:test"):
                app_logger.info("inside")
        finally:
            app_logger.remove(sink)

        assert [r.strip() for r in records] == ["-|outside", "evaluate:test|inside"]


class TestErrorTypes:
    """Test cases for error messages."""

    def test_csv_line_number(self):
        error = CsvFormatError("wrong field count", line_number=3)

        assert str(error) == "line 3: wrong field count"
        assert error.line_number == 3

    def test_feature_mismatch_diff(self):
        error = FeatureMismatchError(["a", "b", "c"], ["c", "a", "x"])

        assert error.missing == ["b"]
        assert error.unexpected == ["x"]
        assert isinstance(error, ValueError)


class TestSettings:
    """Test cases for environment-driven settings."""

    def test_defaults(self, tmp_path):
        settings = Settings(log_file=tmp_path / "logs" / "run.log")

        assert settings.seed == 42
        assert settings.pdp_grid == 20
        assert settings.lime_kernel_scale == 0.75
        assert (tmp_path / "logs").is_dir()

    def test_environment_override(self, monkeypatch, tmp_path):
        monkeypatch.setenv("FRAUDX_JOBS", "3")
        monkeypatch.setenv("FRAUDX_LIME_SAMPLES", "100")
        monkeypatch.setenv("FRAUDX_LIME_KERNEL_SCALE", "1.25")
        settings = Settings(log_file=tmp_path / "run.log")

        assert settings.effective_jobs == 3
        assert settings.lime_samples == 100
        assert settings.lime_kernel_scale == 1.25

    def test_zero_jobs_uses_all_cores(self, tmp_path):
        assert Settings(jobs=0, log_file=tmp_path / "run.log").effective_jobs >= 1
