"""Model families: stacked RNN, dense RNN and the [CLS] encoder."""

from __future__ import annotations

import numpy as np

from signbox.core.models.encoder import forward_encoder
from signbox.core.models.params import (
    AnyModelConfig,
    ModelParams,
    ParamSpec,
    build,
    count_parameters,
    parameter_specs,
    params_from_arrays,
    round_to_thousands,
)
from signbox.core.models.rnn import (
    RnnLayer,
    dense_projection,
    forward_dense_rnn,
    forward_stacked_rnn,
    gru_cell_step,
    lstm_cell_step,
    run_rnn_layer,
)
from signbox.core.tensor import Mode, Tensor, no_grad, softmax
from signbox.core.types import DenseRnnConfig, EncoderConfig, StackedRnnConfig


def forward(
    params: ModelParams,
    batch: Tensor | np.ndarray,
    mask: Tensor | np.ndarray,
    mode: Mode = Mode.EVAL,
    rng: np.random.Generator | None = None,
) -> Tensor:
    """Dispatch to the forward pass of the params' model family."""
    config = params.config
    if isinstance(config, StackedRnnConfig):
        return forward_stacked_rnn(params, batch, mask, mode, rng)
    if isinstance(config, DenseRnnConfig):
        return forward_dense_rnn(params, batch, mask, mode, rng)
    return forward_encoder(params, batch, mask, mode, rng)


def predict_proba(
    params: ModelParams,
    data: np.ndarray,
    mask: np.ndarray,
    *,
    batch_size: int = 512,
) -> np.ndarray:
    """Class probabilities (N×classes) from an eval-mode, no-grad pass."""
    chunks: list[np.ndarray] = []
    with no_grad():
        for start in range(0, data.shape[0], batch_size):
            stop = start + batch_size
            logits = forward(params, data[start:stop], mask[start:stop], Mode.EVAL)
            chunks.append(softmax(logits, axis=-1).data)
    return np.concatenate(chunks, axis=0)


def predict(
    params: ModelParams,
    data: np.ndarray,
    mask: np.ndarray,
    *,
    batch_size: int = 512,
) -> np.ndarray:
    """Predicted class indices; ties go to the lowest index."""
    return predict_proba(params, data, mask, batch_size=batch_size).argmax(axis=1)


__all__ = [
    "AnyModelConfig",
    "DenseRnnConfig",
    "EncoderConfig",
    "ModelParams",
    "ParamSpec",
    "RnnLayer",
    "StackedRnnConfig",
    "build",
    "count_parameters",
    "dense_projection",
    "forward",
    "forward_dense_rnn",
    "forward_encoder",
    "forward_stacked_rnn",
    "gru_cell_step",
    "lstm_cell_step",
    "params_from_arrays",
    "parameter_specs",
    "predict",
    "predict_proba",
    "round_to_thousands",
    "run_rnn_layer",
]
