"""
Training-set-size sweep: one model per (subset size, alpha setting), scored by
rank-1 CMS on a fixed test split.
"""

from __future__ import annotations

import logging
from typing import Sequence

from core.errors import ArgumentError
from core.network import NetworkSpec
from core.state import SweepRow
from pipeline.evaluator import evaluate_verification
from pipeline.trainer import TrainConfig, train
from tools.dataset import Dataset

logger = logging.getLogger(__name__)


def sweep_configs(cfg: TrainConfig, subset_size: int, alphas: Sequence[float]) -> list[TrainConfig]:
    """One config per alpha, with the batch clamped to the subset size."""
    configs = []
    for alpha in alphas:
        loss = cfg.loss.model_copy(update={"alpha": alpha})
        configs.append(cfg.model_copy(update={"loss": loss, "batch_size": min(cfg.batch_size, subset_size)}))
    return configs


def run_sweep(
    train_set: Dataset,
    test_set: Dataset,
    spec: NetworkSpec,
    cfg: TrainConfig,
    subset_sizes: Sequence[int],
    alphas: Sequence[float],
) -> list[SweepRow]:
    """
    Train and score every (size, alpha) combination, sizes outermost.

    Subsets are prefixes of `train_set`, so a larger size always contains the
    smaller ones. All settings are checked before the first model trains.
    """
    if not subset_sizes or not alphas:
        raise ArgumentError("the sweep needs at least one subset size and one alpha setting")
    for size in subset_sizes:
        if not 1 <= size <= len(train_set):
            raise ArgumentError(f"subset size {size} must be within 1..{len(train_set)}")
        if size < 2 and any(a > 0 for a in alphas):
            raise ArgumentError(f"subset size {size} is too small for alpha > 0 (needs pairs)")

    rows: list[SweepRow] = []
    for size in subset_sizes:
        subset = train_set.subset(size)
        for run_cfg in sweep_configs(cfg, size, alphas):
            net, history = train(subset, spec, run_cfg)
            report = evaluate_verification(net, test_set, ranks=[1], crop_size=run_cfg.crop_size,
                                           threads=run_cfg.threads)
            row: SweepRow = {
                "subset_size": size,
                "alpha": run_cfg.loss.alpha,
                "rank1": report["scores"][0],
                "final_loss": history[-1]["total"],
            }
            logger.info("Sweep size=%d alpha=%g: rank-1 %.1f%%", size, row["alpha"], row["rank1"])
            rows.append(row)
    return rows
