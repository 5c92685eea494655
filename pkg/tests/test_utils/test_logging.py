"""Tests for logging configuration."""

import json

import structlog

from signbox.utils.logging import (
    bind_run_context,
    clear_run_context,
    configure_logging,
    get_logger,
)


def test_json_logs_carry_run_context(capsys):
    configure_logging(level="INFO", json=True)
    bind_run_context(seed=3, model="stacked_gru", fold=1)
    get_logger("test").info("Epoch finished", epoch=4)

    record = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert record["event"] == "Epoch finished"
    assert record["level"] == "info"
    assert record["epoch"] == 4
    assert (record["seed"], record["model"], record["fold"]) == (3, "stacked_gru", 1)
    assert "timestamp" in record


def test_clear_run_context():
    bind_run_context(seed=3, fold=1)
    clear_run_context("fold")
    assert structlog.contextvars.get_contextvars() == {"seed": 3}
    clear_run_context()
    assert structlog.contextvars.get_contextvars() == {}


def test_level_filtering(capsys):
    configure_logging(level="warning", json=True)
    logger = get_logger("test")
    logger.info("hidden")
    logger.warning("shown")

    lines = capsys.readouterr().err.strip().splitlines()
    assert [json.loads(line)["event"] for line in lines] == ["shown"]


def test_module_loggers_follow_reconfiguration(capsys):
    logger = get_logger("module")
    configure_logging(level="ERROR", json=True)
    logger.warning("dropped")
    configure_logging(level="DEBUG", json=True)
    logger.debug("kept")

    lines = capsys.readouterr().err.strip().splitlines()
    assert [json.loads(line)["event"] for line in lines] == ["kept"]
