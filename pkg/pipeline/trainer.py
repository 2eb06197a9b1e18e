"""
Mini-batch SGD over the joint objective.

Each iteration samples a batch of subjects without replacement, forwards every
photo, computes dL/d(output) for every member (a member's output collects its
generative term and every regularizer pair it appears in), back-propagates
each member, sums the parameter gradients in batch order and applies one
plain SGD update.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable, Literal, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from core.config import DEFAULT_BATCH_SIZE, DEFAULT_LEARNING_RATE, DEFAULT_SEED
from core.errors import ArgumentError, DimensionError, TrainingDivergedError
from core.loss import LossConfig, joint_loss_terms
from core.model_io import save_model
from core.network import (
    ForwardCache,
    Gradients,
    Network,
    NetworkSpec,
    add_gradients,
    backward,
    forward,
    init_network,
    parameter_count,
    zero_gradients,
)
from core.state import LossRecord
from core.tensor import ConvParams, Tensor
from tools.dataset import Dataset, TrainingSample, crop_samples, full_samples
from tools.preprocess import photo_channels

logger = logging.getLogger(__name__)

_BATCH_STREAM = 0x5EED


class TrainConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    learning_rate: float = Field(DEFAULT_LEARNING_RATE, ge=0)
    iterations: int = Field(gt=0)
    batch_size: int = Field(DEFAULT_BATCH_SIZE, gt=0)
    loss: LossConfig = Field(default_factory=LossConfig)
    seed: int = Field(DEFAULT_SEED, ge=0)
    checkpoint_every: int = Field(0, ge=0)
    # desk-scale training on centered square windows instead of full images
    crop_size: int | None = Field(None, gt=0)
    xy_channels: bool = True
    threads: int = Field(1, ge=1)
    dtype: Literal["float32", "float64"] = "float32"
    log_every: int = Field(100, gt=0)


def validate_train_config(cfg: TrainConfig, dataset_size: int, spec: NetworkSpec) -> None:
    """Raise ArgumentError for any invariant violation; called before compute."""
    if dataset_size < 1:
        raise ArgumentError("training needs a non-empty dataset")
    if cfg.batch_size > dataset_size:
        raise ArgumentError(f"batch size {cfg.batch_size} exceeds dataset size {dataset_size}")
    if cfg.loss.alpha > 0 and cfg.batch_size < 2:
        raise ArgumentError("batch size must be >= 2 when alpha > 0 (the regularizer needs pairs)")
    expected_channels = photo_channels(cfg.xy_channels)
    if spec.in_channels != expected_channels:
        raise ArgumentError(
            f"architecture takes {spec.in_channels} input channels but the pipeline "
            f"produces {expected_channels} (xy_channels={cfg.xy_channels})"
        )
    if cfg.crop_size is not None and cfg.crop_size <= spec.total_shrink:
        raise ArgumentError(
            f"crop size {cfg.crop_size} must exceed the network shrink {spec.total_shrink}"
        )


def build_samples(dataset: Dataset, spec: NetworkSpec, cfg: TrainConfig) -> list[TrainingSample]:
    if cfg.crop_size is None:
        samples = full_samples(dataset, cfg.xy_channels)
    else:
        samples = crop_samples(dataset, cfg.crop_size, spec.total_shrink, cfg.xy_channels)
    for s in samples:
        _, h, w = s.inputs.shape
        expected = (1, *spec.output_size(h, w))
        if s.target.shape != expected:
            raise DimensionError(
                f"{s.identity}: target shape {s.target.shape} does not match network output {expected} "
                f"for input {s.inputs.shape}"
            )
    dtype = np.dtype(cfg.dtype)
    return [TrainingSample(s.inputs.astype(dtype), s.target.astype(dtype), s.identity) for s in samples]


def sgd_step(net: Network, grads: Gradients, learning_rate: float) -> Network:
    """params <- params - learning_rate * grads, as a new Network."""
    if len(grads) != len(net.params):
        raise DimensionError(f"{len(grads)} gradient sets for {len(net.params)} layers")
    updated = []
    for p, g in zip(net.params, grads):
        if g.weights.shape != p.weights.shape or g.bias.shape != p.bias.shape:
            raise DimensionError(
                f"gradient shapes {g.weights.shape}/{g.bias.shape} do not match "
                f"parameters {p.weights.shape}/{p.bias.shape}"
            )
        dtype = p.weights.dtype
        updated.append(ConvParams(
            (p.weights - learning_rate * g.weights).astype(dtype),
            (p.bias - learning_rate * g.bias).astype(dtype),
        ))
    return Network(net.spec, tuple(updated))


def batch_gradients(
    net: Network,
    batch: Sequence[TrainingSample],
    loss_cfg: LossConfig,
    pool: ThreadPoolExecutor | None = None,
) -> tuple[Gradients, LossRecord]:
    """Joint-loss parameter gradients for one batch, reduced in batch order."""
    run = pool.map if pool is not None else map
    forwards: list[tuple[Tensor, ForwardCache]] = list(run(lambda s: forward(net, s.inputs), batch))
    outputs = [out for out, _ in forwards]
    terms = joint_loss_terms(outputs, [s.target for s in batch], loss_cfg)

    per_member = list(run(lambda fc: backward(net, fc[0][1], fc[1]), zip(forwards, terms.grads)))
    grads = zero_gradients(net)
    for member in per_member:
        grads = add_gradients(grads, member)
    record: LossRecord = {
        "iteration": 0,
        "generative": terms.generative,
        "discriminative": terms.discriminative,
        "total": terms.total,
    }
    return grads, record


def checkpoint_path(out_model: Path, iteration: int) -> Path:
    return out_model.with_name(f"{out_model.stem}.iter{iteration:06d}{out_model.suffix or '.model'}")


def train(
    dataset: Dataset,
    spec: NetworkSpec,
    cfg: TrainConfig,
    checkpoint_to: str | Path | None = None,
    on_record: Callable[[LossRecord], None] | None = None,
) -> tuple[Network, list[LossRecord]]:
    """
    Run exactly `cfg.iterations` SGD iterations from `init_network(spec, cfg.seed)`.

    Args:
        dataset: Training pairs.
        spec: Architecture to train.
        cfg: Optimization settings.
        checkpoint_to: Final model path; checkpoints are written next to it
                       every `cfg.checkpoint_every` iterations.
        on_record: Called with every per-iteration loss record.

    Returns:
        (trained network, loss history).
    """
    validate_train_config(cfg, len(dataset), spec)
    samples = build_samples(dataset, spec, cfg)
    net = init_network(spec, cfg.seed, dtype=cfg.dtype)
    batch_rng = np.random.default_rng([cfg.seed, _BATCH_STREAM])

    logger.info(
        "Training %d-layer net (%d parameters) on %d pairs: iterations=%d batch=%d lr=%g "
        "alpha=%g lambda=%g seed=%d threads=%d",
        len(spec.layers), parameter_count(spec), len(samples), cfg.iterations, cfg.batch_size,
        cfg.learning_rate, cfg.loss.alpha, cfg.loss.lambda_, cfg.seed, cfg.threads,
    )

    history: list[LossRecord] = []
    pool = ThreadPoolExecutor(max_workers=cfg.threads) if cfg.threads > 1 else None
    try:
        for t in range(1, cfg.iterations + 1):
            chosen = batch_rng.choice(len(samples), size=cfg.batch_size, replace=False)
            batch = [samples[i] for i in chosen]
            grads, record = batch_gradients(net, batch, cfg.loss, pool)
            record["iteration"] = t
            if not math.isfinite(record["total"]):
                raise TrainingDivergedError(t, record["total"])
            net = sgd_step(net, grads, cfg.learning_rate)

            history.append(record)
            if on_record is not None:
                on_record(record)
            if t % cfg.log_every == 0 or t == cfg.iterations:
                logger.info(
                    "iter %d/%d  L_gen=%.6g  L_discrim=%.6g  L_total=%.6g",
                    t, cfg.iterations, record["generative"], record["discriminative"], record["total"],
                )
            if checkpoint_to is not None and cfg.checkpoint_every and t % cfg.checkpoint_every == 0:
                save_model(net, checkpoint_path(Path(checkpoint_to), t))
    finally:
        if pool is not None:
            pool.shutdown()
    return net, history
