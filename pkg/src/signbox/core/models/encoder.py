"""Pre-LN transformer encoder classifier with a learnable [CLS] token."""

from __future__ import annotations

import math

import numpy as np

from signbox.core.errors import InputError
from signbox.core.models.params import ModelParams
from signbox.core.models.rnn import as_batch, valid_steps
from signbox.core.tensor import (
    Mode,
    Tensor,
    concat,
    dropout,
    gelu,
    layer_norm,
    matmul,
    softmax,
)
from signbox.core.types import EncoderConfig


def _linear(params: ModelParams, prefix: str, x: Tensor) -> Tensor:
    return x @ params[f"{prefix}.weight"] + params[f"{prefix}.bias"]


def _split_heads(x: Tensor, heads: int) -> Tensor:
    batch, steps, dim = x.shape
    return x.reshape(batch, steps, heads, dim // heads).transpose(0, 2, 1, 3)


def self_attention(
    params: ModelParams,
    prefix: str,
    x: Tensor,
    key_mask: np.ndarray,
    heads: int,
    trace: list[np.ndarray] | None = None,
) -> Tensor:
    """Masked multi-head self-attention over a B×S×D input.

    ``key_mask`` is B×S; False keys get probability exactly 0 for every query.
    """
    batch, steps, dim = x.shape
    head_dim = dim // heads
    q = _split_heads(_linear(params, f"{prefix}.q", x), heads)
    k = _split_heads(_linear(params, f"{prefix}.k", x), heads)
    v = _split_heads(_linear(params, f"{prefix}.v", x), heads)
    scores = matmul(q, k.transpose(0, 1, 3, 2)) * (1.0 / math.sqrt(head_dim))
    weights = softmax(scores, axis=-1, mask=key_mask[:, None, None, :])
    if trace is not None:
        trace.append(weights.data.copy())
    context = matmul(weights, v).transpose(0, 2, 1, 3).reshape(batch, steps, dim)
    return _linear(params, f"{prefix}.out", context)


def encoder_block(
    params: ModelParams,
    index: int,
    x: Tensor,
    key_mask: np.ndarray,
    config: EncoderConfig,
    mode: Mode,
    rng: np.random.Generator | None,
    trace: list[np.ndarray] | None = None,
) -> Tensor:
    prefix = f"blocks.{index}"
    normed = layer_norm(x, params[f"{prefix}.ln1.gain"], params[f"{prefix}.ln1.bias"])
    attended = self_attention(
        params, f"{prefix}.attn", normed, key_mask, config.num_heads, trace
    )
    x = x + dropout(attended, config.dropout_p, mode, rng)

    normed = layer_norm(x, params[f"{prefix}.ln2.gain"], params[f"{prefix}.ln2.bias"])
    hidden = gelu(_linear(params, f"{prefix}.mlp.hidden", normed))
    return x + dropout(_linear(params, f"{prefix}.mlp.out", hidden), config.dropout_p, mode, rng)


def embed(params: ModelParams, data: Tensor) -> Tensor:
    """Project frames, prepend the [CLS] row and add positions 0..T."""
    batch, steps, _ = data.shape
    dim = params["embed.cls"].shape[0]
    frames = data @ params["embed.weight"]
    ones = Tensor(np.ones((batch, 1, 1), dtype=data.dtype), dtype=data.dtype)
    cls = params["embed.cls"].reshape(1, 1, dim) * ones
    return concat([cls, frames], axis=1) + params["embed.position"][0 : steps + 1, :]


def forward_encoder(
    params: ModelParams,
    batch: Tensor | np.ndarray,
    mask: Tensor | np.ndarray,
    mode: Mode = Mode.EVAL,
    rng: np.random.Generator | None = None,
    attention_trace: list[np.ndarray] | None = None,
) -> Tensor:
    """Logits (B×classes) of the encoder over a zero-padded B×T×C batch.

    Padding beyond the longest valid row is dropped before embedding, and
    padded keys are masked out of every attention softmax.

    Args:
        attention_trace: If given, receives one B×heads×S×S weight array per
            layer, where S is the trimmed length plus one for [CLS].

    Raises:
        InputError: If a sequence is longer than ``max_len`` or a mask row
            is empty.
    """
    config = params.config
    if not isinstance(config, EncoderConfig):
        raise InputError(f"forward_encoder needs an encoder config, got {config.family}")
    data = as_batch(batch, params.dtype)
    valid = valid_steps(mask, data.shape[0])
    lengths = valid.sum(axis=1)
    steps = int(lengths.max())
    if steps > config.max_len:
        raise InputError(
            f"sequence length {steps} exceeds encoder max_len {config.max_len}"
        )

    x = embed(params, data[:, 0:steps, :])
    x = dropout(x, config.dropout_p, mode, rng)
    cls_column = np.ones((data.shape[0], 1), dtype=bool)
    key_mask = np.concatenate([cls_column, valid[:, :steps]], axis=1)
    for index in range(config.num_layers):
        x = encoder_block(params, index, x, key_mask, config, mode, rng, attention_trace)

    cls_out = layer_norm(x[:, 0, :], params["final_ln.gain"], params["final_ln.bias"])
    return cls_out @ params["head.weight"] + params["head.bias"]
