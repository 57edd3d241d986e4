"""Tests for settings and logging setup."""

import logging

import pytest
from pydantic import ValidationError as PydanticValidationError

from config import RUN_SUBDIRS, Settings, get_logger, setup_logging


def test_defaults(monkeypatch):
    for name in ("MINER_DEFAULT_FOLDS", "MINER_DEFAULT_JOBS", "MINER_LOG_LEVEL"):
        monkeypatch.delenv(name, raising=False)
    settings = Settings(_env_file=None)
    assert settings.default_folds == 10
    assert settings.default_jobs == 1
    assert settings.log_level == "INFO"


def test_environment_overrides(monkeypatch):
    monkeypatch.setenv("MINER_DEFAULT_FOLDS", "5")
    monkeypatch.setenv("miner_log_level", "debug")
    settings = Settings(_env_file=None)
    assert settings.default_folds == 5
    assert settings.log_level == "debug"


def test_invalid_environment_value(monkeypatch):
    monkeypatch.setenv("MINER_DEFAULT_JOBS", "0")
    with pytest.raises(PydanticValidationError):
        Settings(_env_file=None)


def test_run_layout_creates_directories(tmp_path):
    layout = Settings(_env_file=None).run_layout("demo", tmp_path)
    assert layout["root"] == tmp_path / "demo"
    for sub in RUN_SUBDIRS:
        assert layout[sub].is_dir()


def test_file_log_receives_debug_lines(tmp_path):
    log_file = tmp_path / "logs" / "run.log"
    setup_logging("WARNING", log_file)
    logger = get_logger("tests.config")
    assert logger.name == "spectral_miner.tests.config"

    logger.debug("fine detail")
    for handler in logging.getLogger("spectral_miner").handlers:
        handler.flush()
    assert "fine detail" in log_file.read_text()

    setup_logging("INFO")
    assert len(logging.getLogger("spectral_miner").handlers) == 1
