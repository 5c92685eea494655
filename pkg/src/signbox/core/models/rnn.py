"""Recurrent classifiers: stacked RNN and dense (projected) RNN families.

Gate blocks share one weight matrix per layer, laid out side by side:
LSTM as ``i, f, g, o`` and GRU as ``z, r, n``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from signbox.core.errors import InputError
from signbox.core.models.params import ModelParams
from signbox.core.tensor import (
    Mode,
    Tensor,
    dropout,
    is_grad_enabled,
    sigmoid,
    stack,
    tanh,
    where,
)
from signbox.core.tensor.functional import stable_sigmoid
from signbox.core.types import DenseRnnConfig, ReadoutMode, RnnCellKind, StackedRnnConfig


@dataclass(frozen=True)
class RnnLayer:
    """Weights of one recurrent layer."""

    w_input: Tensor
    w_hidden: Tensor
    bias: Tensor

    @property
    def hidden(self) -> int:
        return self.w_hidden.shape[0]

    @classmethod
    def from_params(cls, params: ModelParams, index: int) -> RnnLayer:
        prefix = f"rnn.{index}"
        return cls(
            w_input=params[f"{prefix}.w_input"],
            w_hidden=params[f"{prefix}.w_hidden"],
            bias=params[f"{prefix}.bias"],
        )


def _lstm_update(
    x_proj: Tensor, hidden_proj: Tensor, c_prev: Tensor, size: int
) -> tuple[Tensor, Tensor]:
    gates = x_proj + hidden_proj
    i = sigmoid(gates[:, 0:size])
    f = sigmoid(gates[:, size : 2 * size])
    g = tanh(gates[:, 2 * size : 3 * size])
    o = sigmoid(gates[:, 3 * size : 4 * size])
    c = f * c_prev + i * g
    return o * tanh(c), c


def _gru_update(
    x_proj: Tensor,
    h_prev: Tensor,
    w_gates: Tensor,
    w_candidate: Tensor,
    size: int,
) -> Tensor:
    zr = sigmoid(x_proj[:, 0 : 2 * size] + h_prev @ w_gates)
    z = zr[:, 0:size]
    r = zr[:, size : 2 * size]
    candidate = tanh(x_proj[:, 2 * size : 3 * size] + (r * h_prev) @ w_candidate)
    return (1.0 - z) * h_prev + z * candidate


def lstm_cell_step(
    layer: RnnLayer, x_t: Tensor, h_prev: Tensor, c_prev: Tensor
) -> tuple[Tensor, Tensor]:
    """One LSTM step on a batch: ``x_t`` is B×I, states are B×H."""
    x_proj = x_t @ layer.w_input + layer.bias
    return _lstm_update(x_proj, h_prev @ layer.w_hidden, c_prev, layer.hidden)


def gru_cell_step(layer: RnnLayer, x_t: Tensor, h_prev: Tensor) -> Tensor:
    """One GRU step on a batch; the reset gate scales ``h_prev`` inside the candidate."""
    size = layer.hidden
    x_proj = x_t @ layer.w_input + layer.bias
    return _gru_update(
        x_proj,
        h_prev,
        layer.w_hidden[:, 0 : 2 * size],
        layer.w_hidden[:, 2 * size : 3 * size],
        size,
    )


def valid_steps(mask: Tensor | np.ndarray, batch_size: int) -> np.ndarray:
    """Boolean B×T view of a mask, rejecting rows without any valid step."""
    values = mask.data if isinstance(mask, Tensor) else np.asarray(mask)
    if values.ndim != 2 or values.shape[0] != batch_size:
        raise InputError(f"mask shape {values.shape} does not match batch size {batch_size}")
    valid = values > 0.5
    empty = np.flatnonzero(~valid.any(axis=1))
    if empty.size:
        raise InputError(f"mask has no valid steps for batch rows {empty.tolist()}")
    return valid


def as_batch(batch: Tensor | np.ndarray, dtype: np.dtype) -> Tensor:
    if isinstance(batch, Tensor):
        return batch
    return Tensor(np.asarray(batch, dtype=dtype), dtype=dtype)


def _run_layer_arrays(
    cell: RnnCellKind,
    layer: RnnLayer,
    inputs: np.ndarray,
    keep: np.ndarray | None,
    final_only: bool,
) -> np.ndarray:
    """Inference loop over raw arrays, with the same arithmetic as the recorded loop."""
    batch_size, steps, _ = inputs.shape
    size = layer.hidden
    w_hidden = layer.w_hidden.data
    x_proj = inputs @ layer.w_input.data + layer.bias.data
    h = np.zeros((batch_size, size), dtype=inputs.dtype)
    c = np.zeros_like(h)
    outputs = None if final_only else np.empty((batch_size, steps, size), dtype=inputs.dtype)

    for t in range(steps):
        x_t = x_proj[:, t, :]
        if cell is RnnCellKind.LSTM:
            gates = x_t + h @ w_hidden
            act = stable_sigmoid(gates)
            c_new = act[:, size : 2 * size] * c + act[:, 0:size] * np.tanh(
                gates[:, 2 * size : 3 * size]
            )
            h_new = act[:, 3 * size : 4 * size] * np.tanh(c_new)
        else:
            zr = stable_sigmoid(x_t[:, 0 : 2 * size] + h @ w_hidden[:, 0 : 2 * size])
            z = zr[:, 0:size]
            r = zr[:, size : 2 * size]
            candidate = np.tanh(
                x_t[:, 2 * size : 3 * size] + (r * h) @ w_hidden[:, 2 * size : 3 * size]
            )
            h_new = (1.0 - z) * h + z * candidate
            c_new = c
        if keep is not None and not keep[:, t].all():
            column = keep[:, t : t + 1]
            h_new = np.where(column, h_new, h)
            c_new = np.where(column, c_new, c)
        h, c = h_new, c_new
        if outputs is not None:
            outputs[:, t, :] = h
    return h if outputs is None else outputs


def run_rnn_layer(
    cell: RnnCellKind,
    layer: RnnLayer,
    inputs: Tensor,
    keep: np.ndarray | None,
    *,
    final_only: bool = False,
) -> Tensor:
    """Run one layer over a B×T×I sequence.

    Returns the B×T×H outputs, or only the B×H state after the last step
    when ``final_only`` is set. Where ``keep[b, t]`` is False the state of
    row ``b`` is carried forward unchanged, so the state after the last step
    equals the state at each row's last valid step. Outside a recorded pass
    the loop runs on plain arrays.
    """
    if not is_grad_enabled():
        data = _run_layer_arrays(cell, layer, inputs.data, keep, final_only)
        return Tensor(data, dtype=inputs.dtype)

    batch_size, steps, _ = inputs.shape
    size = layer.hidden
    x_proj = inputs @ layer.w_input + layer.bias
    zeros = np.zeros((batch_size, size), dtype=inputs.dtype)
    h = Tensor(zeros, dtype=inputs.dtype)
    c = Tensor(zeros, dtype=inputs.dtype)
    if cell is RnnCellKind.GRU:
        w_gates = layer.w_hidden[:, 0 : 2 * size]
        w_candidate = layer.w_hidden[:, 2 * size : 3 * size]

    outputs: list[Tensor] = []
    for t in range(steps):
        x_t = x_proj[:, t, :]
        if cell is RnnCellKind.LSTM:
            h_new, c_new = _lstm_update(x_t, h @ layer.w_hidden, c, size)
        else:
            h_new = _gru_update(x_t, h, w_gates, w_candidate, size)
            c_new = c
        if keep is not None and not keep[:, t].all():
            column = keep[:, t : t + 1]
            h_new = where(column, h_new, h)
            c_new = where(column, c_new, c) if cell is RnnCellKind.LSTM else c_new
        h, c = h_new, c_new
        if not final_only:
            outputs.append(h)
    return h if final_only else stack(outputs, axis=1)


def _run_recurrent_stack(
    params: ModelParams,
    config: StackedRnnConfig | DenseRnnConfig,
    sequence: Tensor,
    valid: np.ndarray,
) -> Tensor:
    """Apply every RNN layer and return the B×H readout."""
    if config.readout is ReadoutMode.LAST_VALID:
        steps = int(valid.sum(axis=1).max())
        sequence = sequence[:, 0:steps, :]
        keep: np.ndarray | None = valid[:, :steps]
    else:
        keep = None
    top = config.num_layers - 1
    for index in range(config.num_layers):
        sequence = run_rnn_layer(
            config.cell,
            RnnLayer.from_params(params, index),
            sequence,
            keep,
            final_only=index == top,
        )
    return sequence


def _classifier_head(
    params: ModelParams,
    readout: Tensor,
    p: float,
    mode: Mode,
    rng: np.random.Generator | None,
) -> Tensor:
    hidden = dropout(readout, p, mode, rng)
    hidden = tanh(hidden @ params["head.hidden.weight"] + params["head.hidden.bias"])
    return hidden @ params["head.out.weight"] + params["head.out.bias"]


def forward_stacked_rnn(
    params: ModelParams,
    batch: Tensor | np.ndarray,
    mask: Tensor | np.ndarray,
    mode: Mode = Mode.EVAL,
    rng: np.random.Generator | None = None,
) -> Tensor:
    """Logits (B×classes) of a stacked RNN over a zero-padded B×T×C batch.

    Raises:
        InputError: If a mask row has no valid step.
    """
    config = params.config
    if not isinstance(config, StackedRnnConfig):
        raise InputError(f"forward_stacked_rnn needs a stacked RNN config, got {config.family}")
    data = as_batch(batch, params.dtype)
    valid = valid_steps(mask, data.shape[0])
    readout = _run_recurrent_stack(params, config, data, valid)
    return _classifier_head(params, readout, config.dropout_p, mode, rng)


def dense_projection(params: ModelParams, batch: Tensor) -> Tensor:
    """Shared per-step projection ``tanh(x_t W + b)`` applied to every step."""
    return tanh(batch @ params["dense.weight"] + params["dense.bias"])


def forward_dense_rnn(
    params: ModelParams,
    batch: Tensor | np.ndarray,
    mask: Tensor | np.ndarray,
    mode: Mode = Mode.EVAL,
    rng: np.random.Generator | None = None,
) -> Tensor:
    """Logits of a dense RNN: per-step projection, one or two RNN layers, head."""
    config = params.config
    if not isinstance(config, DenseRnnConfig):
        raise InputError(f"forward_dense_rnn needs a dense RNN config, got {config.family}")
    data = as_batch(batch, params.dtype)
    valid = valid_steps(mask, data.shape[0])
    readout = _run_recurrent_stack(params, config, dense_projection(params, data), valid)
    return _classifier_head(params, readout, config.dropout_p, mode, rng)
