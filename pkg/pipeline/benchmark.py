"""Forward-pass timing of single full-size images."""

from __future__ import annotations

import logging
import statistics
import time
from typing import Sequence

import numpy as np

from core.config import PHOTO_HEIGHT, PHOTO_WIDTH
from core.errors import ArgumentError
from core.network import BUILTIN_NAMES, Network, builtin_spec, init_network, parameter_count, predict
from core.tensor import Tensor

logger = logging.getLogger(__name__)


def time_forward(net: Network, x: Tensor, repeat: int = 5) -> tuple[Tensor, list[float]]:
    """Run `predict` `repeat` times; returns the last output and every duration in ms."""
    if repeat < 1:
        raise ArgumentError(f"repeat must be >= 1, got {repeat}")
    timings = []
    out = None
    for _ in range(repeat):
        start = time.perf_counter()
        out = predict(net, x)
        timings.append((time.perf_counter() - start) * 1000.0)
    return out, timings


def benchmark_architectures(
    names: Sequence[str] = BUILTIN_NAMES,
    repeat: int = 5,
    seed: int = 0,
) -> list[dict[str, float | int | str]]:
    """Median single-image forward time of each builtin architecture."""
    rng = np.random.default_rng(seed)
    x = rng.uniform(0.0, 255.0, size=(5, PHOTO_HEIGHT, PHOTO_WIDTH)).astype(np.float32)
    rows = []
    for name in names:
        spec = builtin_spec(name)
        net = init_network(spec, seed)
        _, timings = time_forward(net, x, repeat)
        median = statistics.median(timings)
        logger.info("%s: %d parameters, median %.1f ms over %d runs", name, parameter_count(spec), median, repeat)
        rows.append({"arch": name, "params": parameter_count(spec), "median_ms": median})
    return rows
