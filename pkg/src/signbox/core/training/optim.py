"""AdamW with decoupled weight decay, and the reduce-on-plateau schedule."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from signbox.core.errors import NonFiniteGradientError
from signbox.core.models import ModelParams
from signbox.core.types import TrainSettings


@dataclass
class OptimizerState:
    """First and second moments per parameter path, plus the step count."""

    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)
    step: int = 0

    @classmethod
    def zeros_like(cls, params: ModelParams) -> OptimizerState:
        return cls(
            m={name: np.zeros_like(t.data) for name, t in params.items()},
            v={name: np.zeros_like(t.data) for name, t in params.items()},
        )


def adamw_step(
    params: ModelParams,
    state: OptimizerState,
    lr: float,
    *,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
    weight_decay: float = 0.01,
) -> None:
    """Update every parameter in place from its ``grad``.

    ``p <- p - lr * m_hat / (sqrt(v_hat) + eps) - lr * wd * p`` where the
    decay term uses the value before this step. Missing gradients count as
    zero.

    Raises:
        NonFiniteGradientError: If a gradient holds NaN or Inf; no parameter
            is modified in that case.
    """
    for name, tensor in params.items():
        if tensor.grad is not None and not np.isfinite(tensor.grad).all():
            bad = int(np.size(tensor.grad) - np.isfinite(tensor.grad).sum())
            raise NonFiniteGradientError(name, bad_values=bad)

    state.step += 1
    correction1 = 1.0 - beta1**state.step
    correction2 = 1.0 - beta2**state.step
    for name, tensor in params.items():
        p = tensor.data
        g = tensor.grad if tensor.grad is not None else np.zeros_like(p)
        m = state.m.setdefault(name, np.zeros_like(p))
        v = state.v.setdefault(name, np.zeros_like(p))
        m *= beta1
        m += (1.0 - beta1) * g
        v *= beta2
        v += (1.0 - beta2) * g * g
        m_hat = m / correction1
        v_hat = v / correction2
        update = lr * m_hat / (np.sqrt(v_hat) + eps) + lr * weight_decay * p
        p -= update.astype(p.dtype, copy=False)


@dataclass
class SchedulerState:
    """Reduce-on-plateau bookkeeping driven by validation loss."""

    current_lr: float
    best_val_loss: float = math.inf
    epochs_since_improvement: int = 0

    @classmethod
    def initial(cls, settings: TrainSettings) -> SchedulerState:
        return cls(current_lr=settings.lr0)


def plateau_step(
    state: SchedulerState,
    val_loss: float,
    *,
    factor: float = 0.5,
    patience: int = 20,
    lr_min: float = 0.0001,
) -> float:
    """Record one epoch's validation loss and return the learning rate to use next.

    A strictly lower loss resets the counter. Once more than ``patience``
    epochs pass without improvement the rate is multiplied by ``factor``
    (floored at ``lr_min``) and the counter restarts.
    """
    if val_loss < state.best_val_loss:
        state.best_val_loss = val_loss
        state.epochs_since_improvement = 0
        return state.current_lr

    state.epochs_since_improvement += 1
    if state.epochs_since_improvement > patience:
        state.current_lr = max(state.current_lr * factor, lr_min)
        state.epochs_since_improvement = 0
    return state.current_lr
