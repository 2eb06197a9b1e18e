"""
Dense (channels, height, width) arrays and the differentiable primitives the
network is built from: valid convolution, ReLU and bilinear resize.

Tensors are plain C-contiguous numpy arrays. Every op keeps the floating
dtype of its inputs, so the same code paths run in float32 for training and
in float64 for gradient checks.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np
import numpy.typing as npt

from core.errors import ArgumentError, DimensionError

Tensor = npt.NDArray[np.floating]


def as_tensor(data: Any, dtype: npt.DTypeLike | None = None) -> Tensor:
    """
    Validate and normalize `data` into a (C, H, W) floating array.

    Args:
        data: Anything numpy can turn into a 3-axis array.
        dtype: Target floating dtype; defaults to the input's floating dtype
               or float32 for integer input.

    Returns:
        A C-contiguous array in row-major (channel, row, column) order.
    """
    arr = np.asarray(data)
    if dtype is None:
        dtype = arr.dtype if np.issubdtype(arr.dtype, np.floating) else np.float32
    arr = np.ascontiguousarray(arr, dtype=dtype)
    if arr.ndim != 3:
        raise DimensionError(f"tensor must have shape (channels, height, width), got {arr.shape}")
    if min(arr.shape) < 1:
        raise DimensionError(f"tensor dimensions must all be >= 1, got {arr.shape}")
    return arr


@dataclass(frozen=True, eq=False)
class ConvParams:
    """Filter bank of one convolutional layer: weights (K, C, kh, kw), bias (K,)."""

    weights: np.ndarray
    bias: np.ndarray

    def __post_init__(self) -> None:
        if self.weights.ndim != 4:
            raise DimensionError(f"weights must be (K, C, kh, kw), got {self.weights.shape}")
        k, _, kh, kw = self.weights.shape
        if kh < 1 or kw < 1 or kh % 2 == 0 or kw % 2 == 0:
            raise DimensionError(f"kernel size must be odd and >= 1, got {kh}x{kw}")
        if self.bias.shape != (k,):
            raise DimensionError(
                f"bias shape {self.bias.shape} does not match {k} output channels"
            )

    @property
    def out_channels(self) -> int:
        return self.weights.shape[0]

    @property
    def in_channels(self) -> int:
        return self.weights.shape[1]

    @property
    def kernel_size(self) -> tuple[int, int]:
        return self.weights.shape[2], self.weights.shape[3]

    def astype(self, dtype: npt.DTypeLike) -> "ConvParams":
        return ConvParams(self.weights.astype(dtype), self.bias.astype(dtype))

    def zeros_like(self) -> "ConvParams":
        return ConvParams(np.zeros_like(self.weights), np.zeros_like(self.bias))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ConvParams):
            return NotImplemented
        return (
            self.weights.dtype == other.weights.dtype
            and np.array_equal(self.weights, other.weights)
            and np.array_equal(self.bias, other.bias)
        )


def _check_conv_shapes(x: Tensor, params: ConvParams) -> tuple[int, int]:
    c, h, w = x.shape
    kh, kw = params.kernel_size
    if params.in_channels != c:
        raise DimensionError(
            f"input shape {x.shape} has {c} channels but kernel shape "
            f"{params.weights.shape} expects {params.in_channels}"
        )
    if h < kh or w < kw:
        raise DimensionError(
            f"input shape {x.shape} is smaller than kernel shape {params.weights.shape}"
        )
    return h - kh + 1, w - kw + 1


def conv2d_valid(x: Tensor, params: ConvParams) -> Tensor:
    """
    Stride-1, unpadded cross-correlation plus bias.

    out[k, i, j] = bias[k] + sum_{c,u,v} weights[k, c, u, v] * x[c, i+u, j+v]

    The sum is accumulated one kernel offset (u, v) at a time in a fixed
    order, each offset being a (K x C) @ (C x Ho*Wo) product.
    """
    x = as_tensor(x)
    out_h, out_w = _check_conv_shapes(x, params)
    kh, kw = params.kernel_size
    dtype = np.result_type(x, params.weights)
    w = params.weights.astype(dtype, copy=False)

    out = np.zeros((params.out_channels, out_h, out_w), dtype=dtype)
    for u in range(kh):
        for v in range(kw):
            window = x[:, u:u + out_h, v:v + out_w]
            out += np.tensordot(w[:, :, u, v], window, axes=(1, 0))
    out += params.bias.astype(dtype, copy=False)[:, None, None]
    return out


def conv2d_backward(
    x: Tensor, params: ConvParams, grad_output: Tensor
) -> tuple[Tensor, ConvParams]:
    """
    Reverse-mode derivative of `conv2d_valid`.

    Args:
        x: The forward input.
        params: The forward parameters.
        grad_output: dL/d(output), shaped like the forward output.

    Returns:
        (dL/dx, ConvParams holding dL/dweights and dL/dbias).
    """
    x = as_tensor(x)
    out_h, out_w = _check_conv_shapes(x, params)
    expected = (params.out_channels, out_h, out_w)
    if grad_output.shape != expected:
        raise DimensionError(
            f"grad_output shape {grad_output.shape} does not match forward output shape {expected}"
        )
    kh, kw = params.kernel_size
    dtype = np.result_type(x, params.weights, grad_output)
    w = params.weights.astype(dtype, copy=False)
    g = grad_output.astype(dtype, copy=False)

    grad_x = np.zeros(x.shape, dtype=dtype)
    grad_w = np.zeros(params.weights.shape, dtype=dtype)
    for u in range(kh):
        for v in range(kw):
            window = x[:, u:u + out_h, v:v + out_w]
            grad_w[:, :, u, v] = np.tensordot(g, window, axes=([1, 2], [1, 2]))
            grad_x[:, u:u + out_h, v:v + out_w] += np.tensordot(w[:, :, u, v], g, axes=(0, 0))
    grad_b = g.sum(axis=(1, 2))
    return grad_x, ConvParams(grad_w, grad_b)


def relu(x: Tensor) -> Tensor:
    return np.maximum(x, 0).astype(x.dtype, copy=False)


def relu_backward(x: Tensor, grad_output: Tensor) -> Tensor:
    """Pass the gradient where x > 0; the subgradient at 0 is 0."""
    if x.shape != grad_output.shape:
        raise DimensionError(f"relu input {x.shape} and gradient {grad_output.shape} differ")
    return np.where(x > 0, grad_output, 0).astype(grad_output.dtype, copy=False)


def scaled_size(dim: int, scale: float) -> int:
    """round(dim * scale) with ties rounded up, never below 1."""
    return max(1, int(np.floor(dim * scale + 0.5)))


def _sample_axis(src: int, dst: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    # Corner-aligned: output index 0 and dst-1 land exactly on 0 and src-1.
    if dst == 1 or src == 1:
        pos = np.zeros(dst)
    else:
        pos = np.arange(dst) * ((src - 1) / (dst - 1))
    lo = np.minimum(np.floor(pos).astype(np.intp), src - 1)
    hi = np.minimum(lo + 1, src - 1)
    frac = pos - lo
    return lo, hi, frac


def resize_bilinear(x: Tensor, scale: float) -> Tensor:
    """
    Bilinear resize with corner-aligned sampling.

    Output dims are round(dim * scale) (ties up), each at least 1.
    A scale of exactly 1 returns an exact copy.
    """
    if not scale > 0:
        raise ArgumentError(f"resize scale must be positive, got {scale!r}")
    x = as_tensor(x)
    if scale == 1:
        return x.copy()

    _, h, w = x.shape
    out_h, out_w = scaled_size(h, scale), scaled_size(w, scale)

    lo, hi, frac = _sample_axis(h, out_h)
    frac = frac.astype(x.dtype)[None, :, None]
    rows = x[:, lo, :] * (1 - frac) + x[:, hi, :] * frac

    lo, hi, frac = _sample_axis(w, out_w)
    frac = frac.astype(x.dtype)[None, None, :]
    out = rows[:, :, lo] * (1 - frac) + rows[:, :, hi] * frac
    return np.ascontiguousarray(out, dtype=x.dtype)
