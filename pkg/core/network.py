"""
Fully convolutional photo-to-sketch networks.

A NetworkSpec is an immutable description (input channels plus an ordered
list of conv layers); a Network pairs a spec with one ConvParams per layer.
Networks are never mutated after construction: an optimizer step returns a
new Network.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from core.config import DEFAULT_INIT_STD
from core.errors import ArgumentError, DimensionError, UsageError
from core.tensor import ConvParams, Tensor, as_tensor, conv2d_backward, conv2d_valid, relu, relu_backward

logger = logging.getLogger(__name__)

Gradients = tuple[ConvParams, ...]


class LayerSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    kernel_size: int = Field(gt=0)
    out_channels: int = Field(gt=0)
    activation: Literal["relu", "none"] = "relu"

    @field_validator("kernel_size")
    @classmethod
    def _odd_kernel(cls, value: int) -> int:
        if value % 2 == 0:
            raise ValueError(f"kernel_size must be odd, got {value}")
        return value


class NetworkSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    in_channels: int = Field(gt=0)
    layers: tuple[LayerSpec, ...] = Field(min_length=1)

    @model_validator(mode="after")
    def _grayscale_output(self) -> "NetworkSpec":
        last = self.layers[-1]
        if last.activation != "none" or last.out_channels != 1:
            raise ValueError(
                "the final layer must have activation 'none' and out_channels 1, "
                f"got activation={last.activation!r} out_channels={last.out_channels}"
            )
        return self

    @property
    def total_shrink(self) -> int:
        return sum(layer.kernel_size - 1 for layer in self.layers)

    @property
    def min_input_size(self) -> int:
        return self.total_shrink + 1

    def output_size(self, height: int, width: int) -> tuple[int, int]:
        return height - self.total_shrink, width - self.total_shrink


# ── Builtin architectures ────────────────────────────────────────────────────

_SIX_LAYER_KERNELS = (5, 5, 1, 1, 3, 3)

_BUILTIN_LAYOUTS: dict[str, tuple[tuple[int, ...], tuple[int, ...]]] = {
    "sr": ((9, 1, 5), (64, 32, 1)),
    "small": (_SIX_LAYER_KERNELS, (64, 32, 16, 16, 8, 1)),
    "medium": (_SIX_LAYER_KERNELS, (128, 64, 32, 32, 16, 1)),
    "large": (_SIX_LAYER_KERNELS, (256, 128, 64, 64, 32, 1)),
}

BUILTIN_NAMES: tuple[str, ...] = tuple(_BUILTIN_LAYOUTS)


def make_spec(kernels: list[int] | tuple[int, ...], widths: list[int] | tuple[int, ...],
              in_channels: int = 5) -> NetworkSpec:
    """Build a ReLU stack whose last layer is linear."""
    if len(kernels) != len(widths):
        raise ArgumentError(f"{len(kernels)} kernel sizes but {len(widths)} widths")
    try:
        layers = [
            LayerSpec(
                kernel_size=k,
                out_channels=c,
                activation="none" if i == len(kernels) - 1 else "relu",
            )
            for i, (k, c) in enumerate(zip(kernels, widths))
        ]
        return NetworkSpec(in_channels=in_channels, layers=tuple(layers))
    except ValidationError as exc:
        raise ArgumentError(str(exc)) from exc


def builtin_spec(name: str, in_channels: int = 5) -> NetworkSpec:
    """
    Return one of the builtin architectures.

    Args:
        name: 'sr', 'small', 'medium' or 'large'.
        in_channels: 5 with XY channels, 3 without.
    """
    if name not in _BUILTIN_LAYOUTS:
        raise ArgumentError(
            f"unknown architecture {name!r}; valid names are {', '.join(BUILTIN_NAMES)}"
        )
    kernels, widths = _BUILTIN_LAYOUTS[name]
    return make_spec(kernels, widths, in_channels=in_channels)


def load_spec_file(path: str | Path, in_channels: int | None = None) -> NetworkSpec:
    """Read a JSON layer list: {"in_channels": 5, "layers": [{...}, ...]}."""
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        if in_channels is not None:
            raw["in_channels"] = in_channels
        return NetworkSpec.model_validate(raw)
    except OSError as exc:
        raise ArgumentError(f"cannot read architecture file {path}: {exc}") from exc
    except (ValueError, TypeError) as exc:
        raise ArgumentError(f"invalid architecture file {path}: {exc}") from exc


def resolve_spec(arch: str, in_channels: int = 5) -> NetworkSpec:
    """A builtin name or a path to an architecture file."""
    if arch in _BUILTIN_LAYOUTS:
        return builtin_spec(arch, in_channels=in_channels)
    if Path(arch).is_file():
        return load_spec_file(arch, in_channels=in_channels)
    raise ArgumentError(
        f"--arch {arch!r} is neither a builtin ({', '.join(BUILTIN_NAMES)}) nor a readable file"
    )


def receptive_field(spec: NetworkSpec) -> tuple[int, int]:
    """Return (receptive field side, total shrink) of a stride-1 valid stack."""
    shrink = spec.total_shrink
    return shrink + 1, shrink


def parameter_count(spec: NetworkSpec) -> int:
    count = 0
    channels = spec.in_channels
    for layer in spec.layers:
        count += layer.out_channels * (channels * layer.kernel_size ** 2 + 1)
        channels = layer.out_channels
    return count


def layer_shapes(spec: NetworkSpec) -> list[tuple[tuple[int, int, int, int], tuple[int]]]:
    """(weights shape, bias shape) for every layer of `spec`."""
    shapes = []
    channels = spec.in_channels
    for layer in spec.layers:
        k = layer.kernel_size
        shapes.append(((layer.out_channels, channels, k, k), (layer.out_channels,)))
        channels = layer.out_channels
    return shapes


# ── Network ──────────────────────────────────────────────────────────────────

@dataclass(frozen=True, eq=False)
class Network:
    spec: NetworkSpec
    params: tuple[ConvParams, ...]

    def __post_init__(self) -> None:
        # the network owns read-only copies; the caller's arrays stay writable
        object.__setattr__(self, "params", tuple(
            ConvParams(np.array(p.weights, copy=True), np.array(p.bias, copy=True)) for p in self.params
        ))
        expected = layer_shapes(self.spec)
        if len(self.params) != len(expected):
            raise DimensionError(
                f"spec has {len(expected)} layers but {len(self.params)} parameter sets were given"
            )
        for i, (p, (w_shape, b_shape)) in enumerate(zip(self.params, expected)):
            if p.weights.shape != w_shape or p.bias.shape != b_shape:
                raise DimensionError(
                    f"layer {i}: parameters {p.weights.shape}/{p.bias.shape} "
                    f"do not match spec {w_shape}/{b_shape}"
                )
            p.weights.setflags(write=False)
            p.bias.setflags(write=False)

    @property
    def dtype(self) -> np.dtype:
        return self.params[0].weights.dtype

    def astype(self, dtype: npt.DTypeLike) -> "Network":
        return Network(self.spec, tuple(p.astype(dtype) for p in self.params))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Network):
            return NotImplemented
        return self.spec == other.spec and all(a == b for a, b in zip(self.params, other.params))


def init_network(spec: NetworkSpec, seed: int, dtype: npt.DTypeLike = np.float32,
                 std: float = DEFAULT_INIT_STD) -> Network:
    """Weights ~ N(0, std^2) from a seeded generator, biases exactly zero."""
    rng = np.random.default_rng(seed)
    params = []
    for w_shape, b_shape in layer_shapes(spec):
        weights = rng.normal(0.0, std, size=w_shape).astype(dtype)
        params.append(ConvParams(weights, np.zeros(b_shape, dtype=dtype)))
    return Network(spec, tuple(params))


def zero_network(spec: NetworkSpec, dtype: npt.DTypeLike = np.float32) -> Network:
    params = [
        ConvParams(np.zeros(w, dtype=dtype), np.zeros(b, dtype=dtype))
        for w, b in layer_shapes(spec)
    ]
    return Network(spec, tuple(params))


@dataclass(frozen=True, eq=False)
class ForwardCache:
    """Per-layer inputs and pre-activations recorded by `forward`."""

    params: tuple[ConvParams, ...]
    inputs: tuple[Tensor, ...]
    pre_activations: tuple[Tensor, ...]
    output_shape: tuple[int, int, int] = field(default=(0, 0, 0))


def _check_input(spec: NetworkSpec, x: Tensor) -> None:
    c, h, w = x.shape
    if c != spec.in_channels:
        raise DimensionError(
            f"input shape {x.shape} has {c} channels; the network expects {spec.in_channels}"
        )
    if h < spec.min_input_size or w < spec.min_input_size:
        raise DimensionError(
            f"input shape {x.shape} is too small; minimum spatial size is "
            f"{spec.min_input_size}x{spec.min_input_size}"
        )


def forward(net: Network, x: Tensor) -> tuple[Tensor, ForwardCache]:
    """Run the stack; returns the output and the cache `backward` needs."""
    x = as_tensor(x, dtype=net.dtype)
    _check_input(net.spec, x)
    inputs: list[Tensor] = []
    pre: list[Tensor] = []
    a = x
    for layer, params in zip(net.spec.layers, net.params):
        inputs.append(a)
        z = conv2d_valid(a, params)
        pre.append(z)
        a = relu(z) if layer.activation == "relu" else z
    cache = ForwardCache(net.params, tuple(inputs), tuple(pre), a.shape)
    return a, cache


def predict(net: Network, x: Tensor) -> Tensor:
    return forward(net, x)[0]


def backward(net: Network, cache: ForwardCache, grad_output: Tensor) -> Gradients:
    """Parameter gradients for the scalar loss whose output cotangent is `grad_output`."""
    if cache.params is not net.params:
        raise UsageError("forward cache was produced by a different network; run forward again")
    if grad_output.shape != cache.output_shape:
        raise DimensionError(
            f"grad_output shape {grad_output.shape} does not match output shape {cache.output_shape}"
        )
    grads: list[ConvParams] = []
    g = grad_output
    for layer, params, a, z in reversed(
        list(zip(net.spec.layers, net.params, cache.inputs, cache.pre_activations))
    ):
        if layer.activation == "relu":
            g = relu_backward(z, g)
        g, layer_grads = conv2d_backward(a, params, g)
        grads.append(layer_grads)
    grads.reverse()
    return tuple(grads)


def zero_gradients(net: Network) -> Gradients:
    return tuple(p.zeros_like() for p in net.params)


def add_gradients(a: Gradients, b: Gradients) -> Gradients:
    return tuple(ConvParams(x.weights + y.weights, x.bias + y.bias) for x, y in zip(a, b))
