"""Central finite-difference gradient checking.

Checks run the same graph in float64. The reported error for a tensor is the
norm-wise relative error ``|a - n| / max(|a|, |n|, floor)`` between the analytic
gradient ``a`` and the numerical estimate ``n``. The floor keeps gradients that
are exactly zero (both sides pure rounding noise) from reading as a 100% error.
"""

from __future__ import annotations

from collections.abc import Callable, Mapping
from dataclasses import dataclass, field

import numpy as np

from signbox.core.tensor.tensor import Tensor, no_grad

DEFAULT_STEP = 1e-5
DEFAULT_FLOOR = 1e-6


@dataclass
class GradCheckResult:
    """Per-tensor relative errors of one gradient check."""

    errors: dict[str, float] = field(default_factory=dict)
    entries_checked: dict[str, int] = field(default_factory=dict)

    @property
    def max_error(self) -> float:
        return max(self.errors.values(), default=0.0)

    def worst(self) -> tuple[str, float]:
        name = max(self.errors, key=self.errors.__getitem__)
        return name, self.errors[name]


def relative_error(
    analytic: np.ndarray, numeric: np.ndarray, *, floor: float = DEFAULT_FLOOR
) -> float:
    scale = max(float(np.linalg.norm(analytic)), float(np.linalg.norm(numeric)), floor)
    return float(np.linalg.norm(analytic - numeric)) / scale


def numerical_gradient(
    loss_fn: Callable[[], Tensor],
    tensor: Tensor,
    *,
    step: float = DEFAULT_STEP,
    entries: np.ndarray | None = None,
) -> np.ndarray:
    """Estimate d(loss)/d(tensor) by central differences.

    Args:
        loss_fn: Rebuilds the scalar loss from current tensor values.
        tensor: Tensor whose values are perturbed in place.
        step: Perturbation size.
        entries: Optional flat indices to perturb; others are left at zero.
    """
    if not tensor.data.flags.c_contiguous:
        tensor.data = np.ascontiguousarray(tensor.data)
    flat = tensor.data.reshape(-1)
    grad = np.zeros(flat.shape, dtype=np.float64)
    indices = np.arange(flat.size) if entries is None else entries
    with no_grad():
        for i in indices:
            original = flat[i]
            flat[i] = original + step
            plus = loss_fn().item()
            flat[i] = original - step
            minus = loss_fn().item()
            flat[i] = original
            grad[i] = (plus - minus) / (2.0 * step)
    return grad.reshape(tensor.shape)


def check_gradients(
    loss_fn: Callable[[], Tensor],
    tensors: Mapping[str, Tensor],
    *,
    step: float = DEFAULT_STEP,
    max_entries: int | None = None,
    rng: np.random.Generator | None = None,
) -> GradCheckResult:
    """Compare backward() gradients with central differences.

    Args:
        loss_fn: Builds a scalar loss from ``tensors`` (float64 recommended).
        tensors: Named tensors with ``requires_grad`` set.
        step: Finite-difference step.
        max_entries: If given, perturb at most this many random entries per tensor.
        rng: Generator used to pick probed entries.
    """
    for tensor in tensors.values():
        tensor.zero_grad()
    loss_fn().backward()

    result = GradCheckResult()
    picker = rng if rng is not None else np.random.default_rng(0)
    for name, tensor in tensors.items():
        analytic = (
            tensor.grad if tensor.grad is not None else np.zeros_like(tensor.data)
        )
        entries = None
        if max_entries is not None and tensor.size > max_entries:
            entries = picker.choice(tensor.size, size=max_entries, replace=False)
        numeric = numerical_gradient(loss_fn, tensor, step=step, entries=entries)
        if entries is None:
            result.errors[name] = relative_error(analytic, numeric)
            result.entries_checked[name] = tensor.size
        else:
            flat_analytic = analytic.reshape(-1)[entries]
            flat_numeric = numeric.reshape(-1)[entries]
            result.errors[name] = relative_error(flat_analytic, flat_numeric)
            result.entries_checked[name] = len(entries)
    return result

