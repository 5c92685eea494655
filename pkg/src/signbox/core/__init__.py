"""Core functionality for Signbox."""

from signbox.core.checkpoint import Checkpoint, CheckpointManager, Provenance
from signbox.core.errors import (
    ConfigurationError,
    DataError,
    SignboxError,
    TrainingError,
)
from signbox.core.types import (
    ModelName,
    RunConfig,
    SegmenterConfig,
    StreamSettings,
    TrainConfig,
    model_config_for,
)

__all__ = [
    "Checkpoint",
    "CheckpointManager",
    "ConfigurationError",
    "DataError",
    "ModelName",
    "Provenance",
    "RunConfig",
    "SegmenterConfig",
    "SignboxError",
    "StreamSettings",
    "TrainConfig",
    "TrainingError",
    "model_config_for",
]
