"""Parameter layout, initialisation and counting for every model family."""

from __future__ import annotations

from collections.abc import Iterator, Mapping
from dataclasses import dataclass
from typing import Literal

import numpy as np

from signbox.core.errors import CheckpointError
from signbox.core.tensor import DEFAULT_DTYPE, Tensor
from signbox.core.types import DenseRnnConfig, EncoderConfig, StackedRnnConfig
from signbox.utils.rng import RngStreams

AnyModelConfig = StackedRnnConfig | DenseRnnConfig | EncoderConfig

InitKind = Literal["glorot", "zeros", "ones"]


@dataclass(frozen=True)
class ParamSpec:
    """Name, shape and initialiser of one parameter tensor."""

    name: str
    shape: tuple[int, ...]
    init: InitKind
    fan: tuple[int, int] = (0, 0)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))


def _linear(prefix: str, n_in: int, n_out: int, *, bias: bool = True) -> list[ParamSpec]:
    specs = [ParamSpec(f"{prefix}.weight", (n_in, n_out), "glorot", (n_in, n_out))]
    if bias:
        specs.append(ParamSpec(f"{prefix}.bias", (n_out,), "zeros"))
    return specs


def _rnn_layer(prefix: str, n_in: int, hidden: int, gates: int) -> list[ParamSpec]:
    # Gate blocks are stored side by side; fan_out is one gate's width.
    return [
        ParamSpec(f"{prefix}.w_input", (n_in, gates * hidden), "glorot", (n_in, hidden)),
        ParamSpec(
            f"{prefix}.w_hidden", (hidden, gates * hidden), "glorot", (hidden, hidden)
        ),
        ParamSpec(f"{prefix}.bias", (gates * hidden,), "zeros"),
    ]


def _layer_norm(prefix: str, dim: int) -> list[ParamSpec]:
    return [
        ParamSpec(f"{prefix}.gain", (dim,), "ones"),
        ParamSpec(f"{prefix}.bias", (dim,), "zeros"),
    ]


def _head(hidden: int, head_hidden: int, num_classes: int) -> list[ParamSpec]:
    return [
        *_linear("head.hidden", hidden, head_hidden),
        *_linear("head.out", head_hidden, num_classes),
    ]


def parameter_specs(config: AnyModelConfig) -> list[ParamSpec]:
    """Ordered parameter layout for a model configuration."""
    if isinstance(config, StackedRnnConfig):
        gates = config.cell.gate_count
        specs: list[ParamSpec] = []
        n_in = config.input_channels
        for layer in range(config.num_layers):
            specs += _rnn_layer(f"rnn.{layer}", n_in, config.hidden, gates)
            n_in = config.hidden
        return specs + _head(config.hidden, config.head_hidden, config.num_classes)

    if isinstance(config, DenseRnnConfig):
        gates = config.cell.gate_count
        specs = _linear("dense", config.input_channels, config.dense_out)
        n_in = config.dense_out
        for layer in range(config.num_layers):
            specs += _rnn_layer(f"rnn.{layer}", n_in, config.hidden, gates)
            n_in = config.hidden
        return specs + _head(config.hidden, config.head_hidden, config.num_classes)

    d = config.embed_dim
    specs = [
        *_linear("embed", config.input_channels, d, bias=False),
        ParamSpec("embed.cls", (d,), "glorot", (1, d)),
        ParamSpec("embed.position", (config.max_len + 1, d), "glorot", (config.max_len + 1, d)),
    ]
    for layer in range(config.num_layers):
        block = f"blocks.{layer}"
        specs += _layer_norm(f"{block}.ln1", d)
        for proj in ("q", "k", "v", "out"):
            specs += _linear(f"{block}.attn.{proj}", d, d)
        specs += _layer_norm(f"{block}.ln2", d)
        specs += _linear(f"{block}.mlp.hidden", d, config.mlp_hidden)
        specs += _linear(f"{block}.mlp.out", config.mlp_hidden, d)
    specs += _layer_norm("final_ln", d)
    specs += _linear("head", d, config.num_classes)
    return specs


def count_parameters(config: AnyModelConfig) -> int:
    """Exact scalar count in closed form.

    Conventions: one bias vector per gate, bias-free input embedding,
    layer norms with gain and bias, attention q/k/v/out projections with bias.
    """

    def rnn(n_in: int, hidden: int, gates: int) -> int:
        return gates * (n_in * hidden + hidden * hidden + hidden)

    def head(hidden: int, head_hidden: int, classes: int) -> int:
        return (hidden * head_hidden + head_hidden) + (head_hidden * classes + classes)

    if isinstance(config, StackedRnnConfig):
        g = config.cell.gate_count
        total = rnn(config.input_channels, config.hidden, g)
        total += (config.num_layers - 1) * rnn(config.hidden, config.hidden, g)
        return total + head(config.hidden, config.head_hidden, config.num_classes)

    if isinstance(config, DenseRnnConfig):
        g = config.cell.gate_count
        total = config.input_channels * config.dense_out + config.dense_out
        total += rnn(config.dense_out, config.hidden, g)
        if config.stacked:
            total += rnn(config.hidden, config.hidden, g)
        return total + head(config.hidden, config.head_hidden, config.num_classes)

    d, m = config.embed_dim, config.mlp_hidden
    per_block = 4 * (d * d + d) + 2 * (2 * d) + (d * m + m) + (m * d + d)
    return (
        config.input_channels * d
        + d
        + (config.max_len + 1) * d
        + config.num_layers * per_block
        + 2 * d
        + (d * config.num_classes + config.num_classes)
    )


def round_to_thousands(count: int) -> str:
    """Render a count the way the results table does (63,908 -> '64K')."""
    return f"{round(count / 1000)}K"


@dataclass
class ModelParams:
    """Named parameter tensors of one model instance."""

    config: AnyModelConfig
    tensors: dict[str, Tensor]

    def __getitem__(self, name: str) -> Tensor:
        return self.tensors[name]

    def __iter__(self) -> Iterator[str]:
        return iter(self.tensors)

    def __len__(self) -> int:
        return len(self.tensors)

    def items(self) -> Iterator[tuple[str, Tensor]]:
        return iter(self.tensors.items())

    @property
    def dtype(self) -> np.dtype:
        return next(iter(self.tensors.values())).dtype

    def num_scalars(self) -> int:
        return sum(t.size for t in self.tensors.values())

    def zero_grad(self) -> None:
        for tensor in self.tensors.values():
            tensor.zero_grad()

    def snapshot(self) -> dict[str, np.ndarray]:
        """Copies of every parameter array, in layout order."""
        return {name: t.data.copy() for name, t in self.tensors.items()}

    def restore(self, arrays: Mapping[str, np.ndarray]) -> None:
        """Overwrite parameter values in place from a snapshot."""
        for name, tensor in self.tensors.items():
            tensor.data[...] = arrays[name]

    def astype(self, dtype: type[np.floating]) -> ModelParams:
        return ModelParams(
            config=self.config,
            tensors={
                name: Tensor(t.data.astype(dtype), requires_grad=t.requires_grad, name=name)
                for name, t in self.tensors.items()
            },
        )


def _initial_values(
    spec: ParamSpec, rng: np.random.Generator, dtype: type[np.floating]
) -> np.ndarray:
    if spec.init == "zeros":
        return np.zeros(spec.shape, dtype=dtype)
    if spec.init == "ones":
        return np.ones(spec.shape, dtype=dtype)
    fan_in, fan_out = spec.fan
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=spec.shape).astype(dtype)


def build(
    config: AnyModelConfig,
    seed: int,
    *,
    dtype: type[np.floating] = DEFAULT_DTYPE,
) -> ModelParams:
    """Initialise a parameter set: Glorot-uniform weights, zero biases.

    The same (config, seed) always yields bit-identical parameters.
    """
    rng = RngStreams(seed).generator("init")
    tensors = {
        spec.name: Tensor(
            _initial_values(spec, rng, dtype), requires_grad=True, name=spec.name
        )
        for spec in parameter_specs(config)
    }
    return ModelParams(config=config, tensors=tensors)


def params_from_arrays(
    config: AnyModelConfig, arrays: Mapping[str, np.ndarray]
) -> ModelParams:
    """Wrap loaded arrays as a parameter set, checking the layout."""
    specs = parameter_specs(config)
    expected = {spec.name: spec.shape for spec in specs}
    if set(arrays) != set(expected):
        missing = sorted(set(expected) - set(arrays))
        extra = sorted(set(arrays) - set(expected))
        raise CheckpointError(
            f"Parameter names do not match the config (missing={missing}, extra={extra})"
        )
    tensors: dict[str, Tensor] = {}
    for spec in specs:
        array = arrays[spec.name]
        if tuple(array.shape) != spec.shape:
            raise CheckpointError(
                f"Parameter '{spec.name}' has shape {array.shape}, expected {spec.shape}"
            )
        tensors[spec.name] = Tensor(array, requires_grad=True, name=spec.name)
    return ModelParams(config=config, tensors=tensors)
