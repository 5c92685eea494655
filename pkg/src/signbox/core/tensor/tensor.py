"""Dense tensors with reverse-mode automatic differentiation.

A ``Tensor`` wraps a numpy array. Operations on tensors that require
gradients remember their parents and a local backward rule; ``backward()``
orders the recorded operations into a ``Tape`` and replays it in reverse.
"""

from __future__ import annotations

import threading
from collections.abc import Callable, Iterator, Sequence
from contextlib import contextmanager
from dataclasses import dataclass
from enum import Enum
from typing import Any

import numpy as np

from signbox.core.errors import NonFiniteError, ShapeError, TensorUsageError

BackwardFn = Callable[[np.ndarray], None]

DEFAULT_DTYPE = np.float32

_grad_mode = threading.local()


class Mode(str, Enum):
    """Forward-pass mode; controls stochastic layers such as dropout."""

    TRAIN = "train"
    EVAL = "eval"


def is_grad_enabled() -> bool:
    """Return whether operations are currently being recorded."""
    return getattr(_grad_mode, "enabled", True)


@contextmanager
def no_grad() -> Iterator[None]:
    """Run a block without recording operations (inference)."""
    previous = is_grad_enabled()
    _grad_mode.enabled = False
    try:
        yield
    finally:
        _grad_mode.enabled = previous


def _is_basic_index(index: Any) -> bool:
    parts = index if isinstance(index, tuple) else (index,)
    return all(
        part is None or part is Ellipsis or isinstance(part, int | slice)
        for part in parts
    )


def unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum a broadcast gradient back down to ``shape``."""
    if grad.shape == shape:
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(
        i for i, extent in enumerate(shape) if extent == 1 and grad.shape[i] != 1
    )
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad


class Tensor:
    """A dense real-valued array with an optional gradient."""

    __slots__ = ("_backward", "_op", "_parents", "data", "grad", "name", "requires_grad")

    def __init__(
        self,
        data: Any,
        *,
        requires_grad: bool = False,
        dtype: Any = None,
        name: str | None = None,
        _op: str = "leaf",
    ) -> None:
        if dtype is None:
            is_float_array = isinstance(data, np.ndarray) and np.issubdtype(
                data.dtype, np.floating
            )
            dtype = data.dtype if is_float_array else DEFAULT_DTYPE
        array = np.asarray(data, dtype=dtype)
        if any(extent <= 0 for extent in array.shape):
            raise ShapeError(f"Tensor extents must be positive, got {array.shape}")
        if not np.isfinite(array).all():
            raise NonFiniteError(f"Non-finite values produced by '{_op}'")
        self.data = array
        self.requires_grad = requires_grad
        self.grad: np.ndarray | None = None
        self.name = name
        self._parents: tuple[Tensor, ...] = ()
        self._backward: BackwardFn | None = None
        self._op = _op

    @classmethod
    def from_op(
        cls,
        data: np.ndarray,
        parents: Sequence[Tensor],
        backward: BackwardFn,
        op: str,
    ) -> Tensor:
        """Create the output of an operation, recording it when needed."""
        track = is_grad_enabled() and any(p.requires_grad for p in parents)
        out = cls(data, requires_grad=track, dtype=data.dtype, _op=op)
        if track:
            out._parents = tuple(parents)
            out._backward = backward
        return out

    # ------------------------------------------------------------------
    # Introspection
    # ------------------------------------------------------------------

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    @property
    def dtype(self) -> np.dtype:
        return self.data.dtype

    @property
    def op(self) -> str:
        return self._op

    def item(self) -> float:
        if self.size != 1:
            raise TensorUsageError(f"item() needs a single value, got shape {self.shape}")
        return float(self.data.reshape(-1)[0])

    def numpy(self) -> np.ndarray:
        """Return a copy of the values."""
        return self.data.copy()

    def detach(self) -> Tensor:
        return Tensor(self.data, dtype=self.dtype, name=self.name)

    def zero_grad(self) -> None:
        self.grad = None

    def __repr__(self) -> str:
        label = f", name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.shape}, dtype={self.dtype}, op={self._op}{label})"

    # ------------------------------------------------------------------
    # Gradient plumbing
    # ------------------------------------------------------------------

    def accumulate(self, grad: np.ndarray, index: Any = None) -> None:
        """Add ``grad`` into this tensor's gradient, optionally at ``index``."""
        if not self.requires_grad:
            return
        if self.grad is None:
            self.grad = np.zeros_like(self.data)
        if index is None:
            self.grad += grad
        elif _is_basic_index(index):
            self.grad[index] += grad
        else:
            np.add.at(self.grad, index, grad)

    def backward(self) -> Tape:
        """Populate ``grad`` on every tensor this scalar depends on.

        Returns:
            The tape that was replayed.

        Raises:
            TensorUsageError: If the tensor is not a scalar.
        """
        if self.shape != ():
            raise TensorUsageError(
                f"backward() requires a scalar loss, got shape {self.shape}"
            )
        if not self.requires_grad:
            raise TensorUsageError("backward() on a tensor that does not require grad")
        tape = Tape.from_root(self)
        tape.replay(self)
        return tape

    # ------------------------------------------------------------------
    # Arithmetic
    # ------------------------------------------------------------------

    def _lift(self, other: Any) -> Tensor:
        if isinstance(other, Tensor):
            return other
        return Tensor(np.asarray(other, dtype=self.dtype), dtype=self.dtype)

    def __add__(self, other: Any) -> Tensor:
        other = self._lift(other)
        a, b = self, other

        def backward(g: np.ndarray) -> None:
            a.accumulate(unbroadcast(g, a.shape))
            b.accumulate(unbroadcast(g, b.shape))

        return Tensor.from_op(a.data + b.data, (a, b), backward, "add")

    def __radd__(self, other: Any) -> Tensor:
        return self + other

    def __neg__(self) -> Tensor:
        a = self

        def backward(g: np.ndarray) -> None:
            a.accumulate(-g)

        return Tensor.from_op(-a.data, (a,), backward, "neg")

    def __sub__(self, other: Any) -> Tensor:
        other = self._lift(other)
        a, b = self, other

        def backward(g: np.ndarray) -> None:
            a.accumulate(unbroadcast(g, a.shape))
            b.accumulate(unbroadcast(-g, b.shape))

        return Tensor.from_op(a.data - b.data, (a, b), backward, "sub")

    def __rsub__(self, other: Any) -> Tensor:
        return self._lift(other) - self

    def __mul__(self, other: Any) -> Tensor:
        other = self._lift(other)
        a, b = self, other

        def backward(g: np.ndarray) -> None:
            if a.requires_grad:
                a.accumulate(unbroadcast(g * b.data, a.shape))
            if b.requires_grad:
                b.accumulate(unbroadcast(g * a.data, b.shape))

        return Tensor.from_op(a.data * b.data, (a, b), backward, "mul")

    def __rmul__(self, other: Any) -> Tensor:
        return self * other

    def __truediv__(self, other: Any) -> Tensor:
        other = self._lift(other)
        a, b = self, other

        def backward(g: np.ndarray) -> None:
            if a.requires_grad:
                a.accumulate(unbroadcast(g / b.data, a.shape))
            if b.requires_grad:
                b.accumulate(unbroadcast(-g * a.data / (b.data * b.data), b.shape))

        return Tensor.from_op(a.data / b.data, (a, b), backward, "div")

    def __matmul__(self, other: Tensor) -> Tensor:
        return matmul(self, other)

    # ------------------------------------------------------------------
    # Reductions and shape manipulation
    # ------------------------------------------------------------------

    def sum(self, axis: int | tuple[int, ...] | None = None, keepdims: bool = False) -> Tensor:
        a = self

        def backward(g: np.ndarray) -> None:
            if axis is not None and not keepdims:
                g = np.expand_dims(g, axis)
            a.accumulate(np.broadcast_to(g, a.shape))

        data = np.asarray(a.data.sum(axis=axis, keepdims=keepdims), dtype=a.dtype)
        return Tensor.from_op(data, (a,), backward, "sum")

    def mean(self, axis: int | tuple[int, ...] | None = None, keepdims: bool = False) -> Tensor:
        total = self.sum(axis=axis, keepdims=keepdims)
        count = self.size // max(total.size, 1)
        return total * (1.0 / count)

    def reshape(self, *shape: int) -> Tensor:
        a = self

        def backward(g: np.ndarray) -> None:
            a.accumulate(g.reshape(a.shape))

        return Tensor.from_op(a.data.reshape(*shape), (a,), backward, "reshape")

    def transpose(self, *axes: int) -> Tensor:
        a = self
        order = axes or tuple(reversed(range(a.ndim)))
        inverse = tuple(np.argsort(order))

        def backward(g: np.ndarray) -> None:
            a.accumulate(g.transpose(inverse))

        return Tensor.from_op(a.data.transpose(order), (a,), backward, "transpose")

    def __getitem__(self, index: Any) -> Tensor:
        a = self

        def backward(g: np.ndarray) -> None:
            a.accumulate(g, index)

        data = np.asarray(a.data[index], dtype=a.dtype)
        return Tensor.from_op(data, (a,), backward, "getitem")


@dataclass
class Tape:
    """Recorded operations in topological order (producers before consumers)."""

    nodes: list[Tensor]

    @classmethod
    def from_root(cls, root: Tensor) -> Tape:
        order: list[Tensor] = []
        visited: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(root, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in visited:
                continue
            visited.add(id(node))
            stack.append((node, True))
            for parent in node._parents:
                if parent.requires_grad and id(parent) not in visited:
                    stack.append((parent, False))
        return cls(order)

    def __len__(self) -> int:
        return len(self.nodes)

    def replay(self, root: Tensor) -> None:
        """Propagate gradients from ``root`` back through every node once."""
        root.accumulate(np.ones_like(root.data))
        for node in reversed(self.nodes):
            if node._backward is None or node.grad is None:
                continue
            if not np.isfinite(node.grad).all():
                raise NonFiniteError(f"Non-finite gradient flowing into '{node.op}'")
            node._backward(node.grad)


# ----------------------------------------------------------------------
# Multi-operand operations
# ----------------------------------------------------------------------


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """Matrix product over the last two axes, broadcasting leading axes.

    Raises:
        ShapeError: If the inner extents disagree.
    """
    if a.ndim < 2 or b.ndim < 2 or a.shape[-1] != b.shape[-2]:
        raise ShapeError(f"matmul dimension mismatch: {a.shape} @ {b.shape}")
    try:
        data = np.matmul(a.data, b.data)
    except ValueError as e:
        raise ShapeError(f"matmul dimension mismatch: {a.shape} @ {b.shape}") from e

    def backward(g: np.ndarray) -> None:
        if a.requires_grad:
            a.accumulate(unbroadcast(np.matmul(g, np.swapaxes(b.data, -1, -2)), a.shape))
        if b.requires_grad:
            if b.ndim == 2:
                flat_a = a.data.reshape(-1, a.shape[-1])
                flat_g = g.reshape(-1, g.shape[-1])
                b.accumulate(flat_a.T @ flat_g)
            else:
                grad_b = np.matmul(np.swapaxes(a.data, -1, -2), g)
                b.accumulate(unbroadcast(grad_b, b.shape))

    return Tensor.from_op(data, (a, b), backward, "matmul")


def concat(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    """Join tensors along an existing axis."""
    parts = tuple(tensors)
    sizes = [t.shape[axis] for t in parts]
    boundaries = np.cumsum(sizes)[:-1]

    def backward(g: np.ndarray) -> None:
        for part, piece in zip(parts, np.split(g, boundaries, axis=axis), strict=True):
            part.accumulate(piece)

    try:
        data = np.concatenate([t.data for t in parts], axis=axis)
    except ValueError as e:
        raise ShapeError(
            f"concat shape mismatch: {[t.shape for t in parts]} on axis {axis}"
        ) from e
    return Tensor.from_op(data, parts, backward, "concat")


def stack(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    """Join same-shaped tensors along a new axis."""
    parts = tuple(tensors)

    def backward(g: np.ndarray) -> None:
        for i, part in enumerate(parts):
            part.accumulate(np.take(g, i, axis=axis))

    try:
        data = np.stack([t.data for t in parts], axis=axis)
    except ValueError as e:
        raise ShapeError(f"stack shape mismatch: {[t.shape for t in parts]}") from e
    return Tensor.from_op(data, parts, backward, "stack")


def where(condition: np.ndarray, a: Tensor, b: Tensor) -> Tensor:
    """Select from ``a`` where ``condition`` holds, else from ``b``."""
    cond = np.asarray(condition, dtype=bool)

    def backward(g: np.ndarray) -> None:
        if a.requires_grad:
            a.accumulate(unbroadcast(np.where(cond, g, 0.0).astype(g.dtype), a.shape))
        if b.requires_grad:
            b.accumulate(unbroadcast(np.where(cond, 0.0, g).astype(g.dtype), b.shape))

    return Tensor.from_op(np.where(cond, a.data, b.data), (a, b), backward, "where")
