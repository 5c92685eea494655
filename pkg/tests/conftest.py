"""Pytest configuration and fixtures for signbox tests."""

import numpy as np
import pytest
import structlog
from rich.console import Console

from signbox.core.dataset import GestureRecording, synth_generate
from signbox.core.types import (
    DenseRnnConfig,
    EncoderConfig,
    RnnCellKind,
    StackedRnnConfig,
    TrainConfig,
)


def _fresh_logging_and_console() -> None:
    structlog.reset_defaults()
    structlog.contextvars.clear_contextvars()

    from signbox.utils.logging import configure_logging

    configure_logging()

    import signbox.cli

    signbox.cli.console = Console(force_terminal=False, width=120)
    signbox.cli.logger = structlog.get_logger()


@pytest.fixture(autouse=True)
def reset_logging_and_console():
    """Reset structlog and the CLI console between tests.

    CliRunner swaps stdout/stderr for the duration of an invocation; loggers
    and consoles created during one test must not keep writing to streams
    that a later test has closed. Bound run context (seed, model, fold) is
    cleared as well.
    """
    _fresh_logging_and_console()
    yield
    _fresh_logging_and_console()


@pytest.fixture
def rng():
    """A seeded generator for test inputs."""
    return np.random.default_rng(1234)


@pytest.fixture
def tiny_stacked_gru():
    """A small stacked GRU that keeps forward passes fast."""
    return StackedRnnConfig(cell=RnnCellKind.GRU, hidden=8, head_hidden=6, num_classes=4)


@pytest.fixture
def tiny_stacked_lstm():
    return StackedRnnConfig(cell=RnnCellKind.LSTM, hidden=8, head_hidden=6, num_classes=4)


@pytest.fixture
def tiny_dense_lstm():
    return DenseRnnConfig(
        cell=RnnCellKind.LSTM, dense_out=6, hidden=7, head_hidden=5, num_classes=4
    )


@pytest.fixture
def tiny_dense_gru():
    return DenseRnnConfig(cell=RnnCellKind.GRU, dense_out=6, hidden=7, head_hidden=5, num_classes=4)


@pytest.fixture
def tiny_dense_stacked_gru():
    return DenseRnnConfig(
        cell=RnnCellKind.GRU,
        stacked=True,
        dense_out=6,
        hidden=7,
        head_hidden=5,
        num_classes=4,
    )


@pytest.fixture
def tiny_encoder():
    return EncoderConfig(
        embed_dim=8, num_layers=2, num_heads=2, mlp_hidden=12, max_len=12, num_classes=4
    )


@pytest.fixture
def make_recording():
    """Factory for recordings of random readings in the active range."""

    def make(label: int, length: int, seed: int = 0, recording_id: str | None = None):
        values = np.random.default_rng(seed).integers(100, 900, size=(length, 5))
        return GestureRecording(recording_id or f"rec-{label}-{seed}", label, values)

    return make


@pytest.fixture
def small_dataset():
    """Four synthetic classes, ten recordings each."""
    return synth_generate(10, 10.0, seed=3, num_classes=4)


@pytest.fixture
def quick_train_config(tiny_stacked_gru):
    """Two-epoch training on the tiny GRU."""
    return TrainConfig(
        model=tiny_stacked_gru,
        batch_size=8,
        max_epochs=2,
        folds=2,
        seed=5,
    )
