"""Learning-rate selection for the small convergence checks."""

from __future__ import annotations

import math
from typing import Sequence

from core.errors import TrainingDivergedError
from core.network import Network, NetworkSpec
from core.state import LossRecord
from pipeline.trainer import TrainConfig, train
from tools.dataset import Dataset

# Raw 0..255 inputs make the usable step size depend strongly on depth and width.
LR_CANDIDATES = (1e-7, 3e-8, 1e-8, 3e-9, 1e-9, 3e-10, 1e-10)


def tail_loss(history: Sequence[LossRecord], window: int = 10) -> float:
    tail = history[-window:]
    return sum(r["total"] for r in tail) / len(tail)


def tune_learning_rate(
    dataset: Dataset,
    spec: NetworkSpec,
    cfg: TrainConfig,
    candidates: Sequence[float] = LR_CANDIDATES,
) -> tuple[float, Network, list[LossRecord]]:
    """Train once per candidate; keep the run with the lowest final loss."""
    best: tuple[float, Network, list[LossRecord]] | None = None
    for lr in candidates:
        try:
            net, history = train(dataset, spec, cfg.model_copy(update={"learning_rate": lr}))
        except TrainingDivergedError:
            continue
        final = tail_loss(history)
        if not math.isfinite(final):
            continue
        if best is None or final < tail_loss(best[2]):
            best = (lr, net, history)
    assert best is not None, f"every learning rate in {list(candidates)} diverged"
    return best
