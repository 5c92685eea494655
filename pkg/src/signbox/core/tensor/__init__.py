"""Minimal dense tensor library with reverse-mode automatic differentiation."""

from signbox.core.tensor.functional import (
    LAYER_NORM_EPS,
    dropout,
    gelu,
    layer_norm,
    log_softmax,
    sigmoid,
    softmax,
    tanh,
)
from signbox.core.tensor.tensor import (
    DEFAULT_DTYPE,
    Mode,
    Tape,
    Tensor,
    concat,
    is_grad_enabled,
    matmul,
    no_grad,
    stack,
    unbroadcast,
    where,
)

__all__ = [
    "DEFAULT_DTYPE",
    "LAYER_NORM_EPS",
    "Mode",
    "Tape",
    "Tensor",
    "concat",
    "dropout",
    "gelu",
    "is_grad_enabled",
    "layer_norm",
    "log_softmax",
    "matmul",
    "no_grad",
    "sigmoid",
    "softmax",
    "stack",
    "tanh",
    "unbroadcast",
    "where",
]
