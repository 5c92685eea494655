"""Differentiable activations, normalisation and regularisation ops."""

from __future__ import annotations

import math

import numpy as np

from signbox.core.errors import ConfigurationError, ShapeError
from signbox.core.tensor.tensor import Mode, Tensor, unbroadcast

# GELU uses the tanh approximation rather than the exact erf form.
_GELU_SCALE = math.sqrt(2.0 / math.pi)
_GELU_CUBIC = 0.044715

LAYER_NORM_EPS = 1e-5


def stable_sigmoid(x: np.ndarray) -> np.ndarray:
    # exp of a non-positive argument never overflows
    e = np.exp(-np.abs(x))
    return np.where(x >= 0, 1.0 / (1.0 + e), e / (1.0 + e)).astype(x.dtype)


def sigmoid(x: Tensor) -> Tensor:
    """Elementwise logistic function."""
    y = stable_sigmoid(x.data)

    def backward(g: np.ndarray) -> None:
        x.accumulate(g * y * (1.0 - y))

    return Tensor.from_op(y, (x,), backward, "sigmoid")


def tanh(x: Tensor) -> Tensor:
    """Elementwise hyperbolic tangent."""
    y = np.tanh(x.data)

    def backward(g: np.ndarray) -> None:
        x.accumulate(g * (1.0 - y * y))

    return Tensor.from_op(y, (x,), backward, "tanh")


def gelu(x: Tensor) -> Tensor:
    """GELU, tanh approximation: 0.5x(1 + tanh(sqrt(2/pi)(x + 0.044715x^3)))."""
    v = x.data
    t = np.tanh(_GELU_SCALE * (v + _GELU_CUBIC * v**3))
    y = (0.5 * v * (1.0 + t)).astype(v.dtype)

    def backward(g: np.ndarray) -> None:
        du = _GELU_SCALE * (1.0 + 3.0 * _GELU_CUBIC * v * v)
        x.accumulate(g * (0.5 * (1.0 + t) + 0.5 * v * (1.0 - t * t) * du))

    return Tensor.from_op(y, (x,), backward, "gelu")


def softmax(x: Tensor, axis: int = -1, mask: np.ndarray | None = None) -> Tensor:
    """Max-subtracted softmax along ``axis``.

    Args:
        x: Input scores.
        axis: Axis that sums to one.
        mask: Optional boolean array broadcastable to ``x``; False entries are
            excluded (probability exactly 0). Every slice must keep at least
            one True entry.
    """
    v = x.data
    if mask is not None:
        keep = np.broadcast_to(np.asarray(mask, dtype=bool), v.shape)
        if not keep.any(axis=axis).all():
            raise ShapeError("softmax mask leaves a slice with no valid entries")
        shifted = np.where(keep, v, -np.inf)
        shifted = shifted - shifted.max(axis=axis, keepdims=True)
        e = np.where(keep, np.exp(shifted), 0.0)
    else:
        e = np.exp(v - v.max(axis=axis, keepdims=True))
    y = (e / e.sum(axis=axis, keepdims=True)).astype(v.dtype)

    def backward(g: np.ndarray) -> None:
        x.accumulate(y * (g - (g * y).sum(axis=axis, keepdims=True)))

    return Tensor.from_op(y, (x,), backward, "softmax")


def log_softmax(x: Tensor, axis: int = -1) -> Tensor:
    """Log of softmax via the log-sum-exp form."""
    v = x.data
    shifted = v - v.max(axis=axis, keepdims=True)
    log_norm = np.log(np.exp(shifted).sum(axis=axis, keepdims=True))
    y = (shifted - log_norm).astype(v.dtype)

    def backward(g: np.ndarray) -> None:
        x.accumulate(g - np.exp(y) * g.sum(axis=axis, keepdims=True))

    return Tensor.from_op(y, (x,), backward, "log_softmax")


def layer_norm(
    x: Tensor, gain: Tensor, bias: Tensor, eps: float = LAYER_NORM_EPS
) -> Tensor:
    """Normalise the last axis to zero mean and unit variance, then scale/shift."""
    n = x.shape[-1]
    if gain.shape != (n,) or bias.shape != (n,):
        raise ShapeError(
            f"layer_norm gain/bias {gain.shape}/{bias.shape} do not match last extent {n}"
        )
    v = x.data
    mean = v.mean(axis=-1, keepdims=True)
    centred = v - mean
    var = (centred * centred).mean(axis=-1, keepdims=True)
    inv_std = 1.0 / np.sqrt(var + eps)
    normed = centred * inv_std
    y = (normed * gain.data + bias.data).astype(v.dtype)

    def backward(g: np.ndarray) -> None:
        if gain.requires_grad:
            gain.accumulate(unbroadcast(g * normed, gain.shape))
        if bias.requires_grad:
            bias.accumulate(unbroadcast(g, bias.shape))
        if x.requires_grad:
            gn = g * gain.data
            x.accumulate(
                inv_std
                / n
                * (
                    n * gn
                    - gn.sum(axis=-1, keepdims=True)
                    - normed * (gn * normed).sum(axis=-1, keepdims=True)
                )
            )

    return Tensor.from_op(y, (x, gain, bias), backward, "layer_norm")


def dropout(
    x: Tensor, p: float, mode: Mode, rng: np.random.Generator | None = None
) -> Tensor:
    """Inverted dropout: zero with probability ``p`` and rescale survivors.

    Raises:
        ConfigurationError: If ``p`` is outside [0, 1), or no generator is
            supplied in train mode.
    """
    if not 0.0 <= p < 1.0:
        raise ConfigurationError(f"dropout probability must be in [0, 1), got {p}")
    if mode is Mode.EVAL or p == 0.0:
        return x
    if rng is None:
        raise ConfigurationError("dropout in train mode needs a random generator")
    scale = (rng.random(x.shape) >= p).astype(x.dtype) / x.dtype.type(1.0 - p)

    def backward(g: np.ndarray) -> None:
        x.accumulate(g * scale)

    return Tensor.from_op(x.data * scale, (x,), backward, "dropout")
