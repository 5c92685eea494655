"""Core configuration types for Signbox."""

from __future__ import annotations

from enum import Enum
import sys
from typing import Annotated, Literal

if sys.version_info >= (3, 11):
    from typing import Self
else:
    from typing_extensions import Self

from pydantic import BaseModel, ConfigDict, Field, model_validator

NUM_CHANNELS = 5
NUM_CLASSES = 36
MAX_TIME_STEPS = 79
SENSOR_MAX = 1023


class RnnCellKind(str, Enum):
    """Recurrent cell types."""

    LSTM = "lstm"
    GRU = "gru"

    @property
    def gate_count(self) -> int:
        """Number of gate blocks sharing one weight matrix (i,f,g,o / z,r,n)."""
        return 4 if self is RnnCellKind.LSTM else 3


class ReadoutMode(str, Enum):
    """Which hidden state an RNN classifier reads out."""

    LAST_VALID = "last_valid"  # state at each sequence's last unpadded step
    LAST_INDEX = "last_index"  # state at the final padded index


class ModelName(str, Enum):
    """The seven benchmarked architectures."""

    DENSE_LSTM = "dense_lstm"
    DENSE_GRU = "dense_gru"
    STACKED_LSTM = "stacked_lstm"
    STACKED_GRU = "stacked_gru"
    DENSE_STACKED_LSTM = "dense_stacked_lstm"
    DENSE_STACKED_GRU = "dense_stacked_gru"
    ENCODER = "encoder"


# Published sizes of the benchmark models, as printed in the results table.
REFERENCE_SIZES: dict[ModelName, str] = {
    ModelName.DENSE_LSTM: "63K",
    ModelName.DENSE_GRU: "51K",
    ModelName.STACKED_LSTM: "64K",
    ModelName.STACKED_GRU: "51K",
    ModelName.DENSE_STACKED_LSTM: "96K",
    ModelName.DENSE_STACKED_GRU: "76K",
    ModelName.ENCODER: "67K",
}


class StackedRnnConfig(BaseModel):
    """Two RNN layers in series, then a 2-layer MLP head."""

    family: Literal["stacked_rnn"] = "stacked_rnn"
    cell: RnnCellKind
    num_layers: int = Field(default=2, gt=0)
    input_channels: int = Field(default=NUM_CHANNELS, gt=0)
    hidden: int = Field(default=64, gt=0)
    head_hidden: int = Field(default=128, gt=0)
    num_classes: int = Field(default=NUM_CLASSES, gt=0)
    dropout_p: float = Field(default=0.2, ge=0.0, lt=1.0)
    readout: ReadoutMode = ReadoutMode.LAST_VALID

    model_config = ConfigDict(frozen=True)


class DenseRnnConfig(BaseModel):
    """Shared per-step MLP projection, then one RNN (or two when stacked)."""

    family: Literal["dense_rnn"] = "dense_rnn"
    cell: RnnCellKind
    stacked: bool = False
    input_channels: int = Field(default=NUM_CHANNELS, gt=0)
    dense_out: int = Field(default=128, gt=0)
    hidden: int = Field(default=64, gt=0)
    head_hidden: int = Field(default=128, gt=0)
    num_classes: int = Field(default=NUM_CLASSES, gt=0)
    dropout_p: float = Field(default=0.2, ge=0.0, lt=1.0)
    readout: ReadoutMode = ReadoutMode.LAST_VALID

    model_config = ConfigDict(frozen=True)

    @property
    def num_layers(self) -> int:
        return 2 if self.stacked else 1


class EncoderConfig(BaseModel):
    """Pre-LN transformer encoder with a learnable [CLS] token."""

    family: Literal["encoder"] = "encoder"
    embed_dim: int = Field(default=32, gt=0)
    num_layers: int = Field(default=5, gt=0)
    num_heads: int = Field(default=4, gt=0)
    mlp_hidden: int = Field(default=128, gt=0)
    max_len: int = Field(default=MAX_TIME_STEPS, gt=0)
    input_channels: int = Field(default=NUM_CHANNELS, gt=0)
    num_classes: int = Field(default=NUM_CLASSES, gt=0)
    dropout_p: float = Field(default=0.2, ge=0.0, lt=1.0)

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def _heads_divide_embedding(self) -> Self:
        if self.embed_dim % self.num_heads != 0:
            raise ValueError(
                f"embed_dim {self.embed_dim} is not divisible by num_heads {self.num_heads}"
            )
        return self

    @property
    def head_dim(self) -> int:
        return self.embed_dim // self.num_heads


ModelConfig = Annotated[
    StackedRnnConfig | DenseRnnConfig | EncoderConfig,
    Field(discriminator="family"),
]


def model_config_for(name: ModelName) -> StackedRnnConfig | DenseRnnConfig | EncoderConfig:
    """Return the benchmark configuration for a named architecture."""
    match name:
        case ModelName.STACKED_LSTM:
            return StackedRnnConfig(cell=RnnCellKind.LSTM)
        case ModelName.STACKED_GRU:
            return StackedRnnConfig(cell=RnnCellKind.GRU)
        case ModelName.DENSE_LSTM:
            return DenseRnnConfig(cell=RnnCellKind.LSTM)
        case ModelName.DENSE_GRU:
            return DenseRnnConfig(cell=RnnCellKind.GRU)
        case ModelName.DENSE_STACKED_LSTM:
            return DenseRnnConfig(cell=RnnCellKind.LSTM, stacked=True)
        case ModelName.DENSE_STACKED_GRU:
            return DenseRnnConfig(cell=RnnCellKind.GRU, stacked=True)
        case ModelName.ENCODER:
            return EncoderConfig()
    raise ValueError(f"Unknown model name: {name}")


def model_name_for(config: StackedRnnConfig | DenseRnnConfig | EncoderConfig) -> ModelName:
    """Inverse of ``model_config_for`` on the family and cell."""
    if isinstance(config, EncoderConfig):
        return ModelName.ENCODER
    if isinstance(config, DenseRnnConfig):
        prefix = "dense_stacked" if config.stacked else "dense"
    else:
        prefix = "stacked"
    return ModelName(f"{prefix}_{config.cell.value}")


def default_batch_size(config: StackedRnnConfig | DenseRnnConfig | EncoderConfig) -> int:
    """RNN families train with batches of 64, the encoder with 256."""
    return 256 if isinstance(config, EncoderConfig) else 64


class TrainSettings(BaseModel):
    """Optimiser, scheduler and protocol hyperparameters."""

    batch_size: int | None = Field(
        default=None,
        gt=0,
        description="Batch size; defaults to 64 for RNNs and 256 for the encoder",
    )
    max_epochs: int = Field(default=300, gt=0)
    lr0: float = Field(default=0.001, gt=0.0)
    lr_min: float = Field(default=0.0001, gt=0.0)
    plateau_factor: float = Field(default=0.5, gt=0.0, lt=1.0)
    plateau_patience: int = Field(default=20, ge=1)
    beta1: float = Field(default=0.9, ge=0.0, lt=1.0)
    beta2: float = Field(default=0.999, ge=0.0, lt=1.0)
    eps: float = Field(default=1e-8, gt=0.0)
    weight_decay: float = Field(default=0.01, ge=0.0)
    folds: int = Field(default=5, ge=2)
    eval_batch_size: int = Field(default=512, gt=0)

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def _lr_floor_below_start(self) -> Self:
        if self.lr_min > self.lr0:
            raise ValueError(f"lr_min ({self.lr_min}) must not exceed lr0 ({self.lr0})")
        return self


class TrainConfig(TrainSettings):
    """Everything needed to train one fold deterministically."""

    model: ModelConfig
    batch_size: int = Field(gt=0)
    seed: int = 0

    model_config = ConfigDict(frozen=True, protected_namespaces=())

    @classmethod
    def for_model(cls, name: ModelName, **overrides: object) -> TrainConfig:
        """Benchmark defaults for a named architecture, with keyword overrides."""
        config = model_config_for(name)
        values: dict[str, object] = {
            "model": config,
            "batch_size": default_batch_size(config),
        }
        values.update(overrides)
        return cls.model_validate(values)


class SegmenterConfig(BaseModel):
    """Activation rule and retention window for the live stream."""

    activation_threshold: int = Field(
        default=5000,
        gt=0,
        le=NUM_CHANNELS * SENSOR_MAX,
        description="A frame is active when its channel sum is strictly below this",
    )
    min_len: int = Field(default=50, gt=0)
    max_len: int = Field(default=80, gt=0)
    sample_rate_hz: float = Field(default=36.0, gt=0.0)

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def _window_ordered(self) -> Self:
        if self.min_len > self.max_len:
            raise ValueError(
                f"min_len ({self.min_len}) must not exceed max_len ({self.max_len})"
            )
        return self


class StreamSettings(BaseModel):
    """Replay harness settings."""

    rate_hz: float = Field(default=36.0, ge=0.0, description="0 replays unthrottled")
    rest_frames: int = Field(default=5, ge=1)
    rest_value: int = Field(default=SENSOR_MAX, ge=0, le=SENSOR_MAX)
    queue_size: int = Field(default=64, gt=0)

    model_config = ConfigDict(frozen=True)


class ModelSettings(BaseModel):
    """Architecture choice plus the knobs the CLI exposes."""

    name: ModelName = ModelName.STACKED_GRU
    dropout_p: float | None = Field(default=None, ge=0.0, lt=1.0)
    readout: ReadoutMode | None = None

    model_config = ConfigDict(frozen=True)

    def resolve(self) -> StackedRnnConfig | DenseRnnConfig | EncoderConfig:
        config = model_config_for(self.name)
        update: dict[str, object] = {}
        if self.dropout_p is not None:
            update["dropout_p"] = self.dropout_p
        if self.readout is not None and not isinstance(config, EncoderConfig):
            update["readout"] = self.readout
        return config.model_copy(update=update) if update else config


class RunConfig(BaseModel):
    """Fully resolved command configuration, echoed into every artifact."""

    seed: int = 0
    workers: int | None = Field(default=None, gt=0)
    model: ModelSettings = Field(default_factory=ModelSettings)
    train: TrainSettings = Field(default_factory=TrainSettings)
    segmenter: SegmenterConfig = Field(default_factory=SegmenterConfig)
    stream: StreamSettings = Field(default_factory=StreamSettings)

    model_config = ConfigDict(frozen=True, protected_namespaces=())

    def train_config(self) -> TrainConfig:
        model = self.model.resolve()
        values = self.train.model_dump()
        values["batch_size"] = self.train.batch_size or default_batch_size(model)
        return TrainConfig(model=model, seed=self.seed, **values)

    def flat(self) -> dict[str, str]:
        """Dotted-key view of the config, as written in config files."""
        flat: dict[str, str] = {}

        def walk(prefix: str, value: object) -> None:
            if isinstance(value, dict):
                for key, inner in value.items():
                    walk(f"{prefix}.{key}" if prefix else key, inner)
            elif value is not None:
                flat[prefix] = str(value).lower() if isinstance(value, bool) else str(value)

        walk("", self.model_dump(mode="json"))
        return dict(sorted(flat.items()))

    def provenance_lines(self) -> list[str]:
        return [f"{key}={value}" for key, value in self.flat().items()]
