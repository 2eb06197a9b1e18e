"""
Joint generative / discriminative objective and its output gradients.

    L = L_gen + alpha * L_discrim
    L_gen     = (1/N) sum_i d(S_i, f(P_i))
    L_discrim = (1/(N(N-1))) sum_i sum_{j != i} log(1 + exp(-d(S_i, f(P_j)) / lambda))

where d is the pixel SUM of squared differences. Sums are accumulated in
float64; gradients are returned in the dtype of the predictions.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from core.config import DEFAULT_ALPHA, DEFAULT_LAMBDA
from core.errors import ArgumentError, DimensionError
from core.tensor import Tensor

logger = logging.getLogger(__name__)


class LossConfig(BaseModel):
    model_config = ConfigDict(frozen=True, populate_by_name=True)

    alpha: float = Field(DEFAULT_ALPHA, ge=0)
    lambda_: float = Field(DEFAULT_LAMBDA, gt=0, alias="lambda")


@dataclass(frozen=True)
class JointLoss:
    generative: float
    discriminative: float
    total: float
    grads: list[Tensor]


def pair_sqdist(a: Tensor, b: Tensor) -> float:
    """Sum over all elements of (a - b)^2."""
    if a.shape != b.shape:
        raise DimensionError(f"cannot compare tensors of shape {a.shape} and {b.shape}")
    diff = np.asarray(a, dtype=np.float64) - np.asarray(b, dtype=np.float64)
    return float(np.dot(diff.ravel(), diff.ravel()))


def _check_batch(preds: Sequence[Tensor], targets: Sequence[Tensor]) -> None:
    if len(preds) != len(targets):
        raise ArgumentError(f"{len(preds)} predictions but {len(targets)} targets")
    if not preds:
        raise ArgumentError("loss needs at least one prediction/target pair")
    shape = targets[0].shape
    for i, (p, s) in enumerate(zip(preds, targets)):
        if p.shape != s.shape or s.shape != shape:
            raise DimensionError(
                f"pair {i}: prediction {p.shape} / target {s.shape} do not match {shape}"
            )


def generative_loss(preds: Sequence[Tensor], targets: Sequence[Tensor]) -> tuple[float, list[Tensor]]:
    """Mean per-subject squared distance and its gradient 2/N (pred - target)."""
    _check_batch(preds, targets)
    n = len(preds)
    value = sum(pair_sqdist(s, p) for p, s in zip(preds, targets)) / n
    grads = [
        ((2.0 / n) * (np.asarray(p, np.float64) - s)).astype(p.dtype)
        for p, s in zip(preds, targets)
    ]
    return value, grads


def discriminative_regularizer(
    preds: Sequence[Tensor], targets: Sequence[Tensor], cfg: LossConfig
) -> tuple[float, list[Tensor]]:
    """
    Softplus penalty on every cross-subject pair (i, j != i).

    Each term log(1 + exp(-d_ij / lambda)) lies in (0, log 2]; its derivative
    with respect to pred_j is -sigmoid(-d_ij / lambda) * 2 (pred_j - S_i) / lambda.
    """
    _check_batch(preds, targets)
    n = len(preds)
    if n < 2:
        raise ArgumentError("the discriminative regularizer needs at least 2 pairs")
    lam = cfg.lambda_
    scale = 1.0 / (n * (n - 1))

    targets64 = [np.asarray(s, np.float64) for s in targets]
    grads64 = [np.zeros(p.shape, np.float64) for p in preds]
    total = 0.0
    for j, p in enumerate(preds):
        p64 = np.asarray(p, np.float64)
        for i, s in enumerate(targets64):
            if i == j:
                continue
            t = pair_sqdist(s, p64) / lam
            total += np.logaddexp(0.0, -t)
            # sigmoid(-t) = 1 / (1 + e^t), evaluated without overflow
            weight = np.exp(-np.logaddexp(0.0, t))
            grads64[j] -= (scale * weight * 2.0 / lam) * (p64 - s)
    grads = [g.astype(p.dtype) for g, p in zip(grads64, preds)]
    return float(total * scale), grads


def joint_loss_terms(
    preds: Sequence[Tensor], targets: Sequence[Tensor], cfg: LossConfig
) -> JointLoss:
    """Both terms, their weighted sum and the summed output gradients."""
    gen, gen_grads = generative_loss(preds, targets)
    if cfg.alpha == 0:
        return JointLoss(gen, 0.0, gen, gen_grads)
    if len(preds) < 2:
        logger.warning("batch of size 1: skipping the discriminative regularizer")
        return JointLoss(gen, 0.0, gen, gen_grads)

    disc, disc_grads = discriminative_regularizer(preds, targets, cfg)
    grads = [
        (np.asarray(g, np.float64) + cfg.alpha * np.asarray(d, np.float64)).astype(g.dtype)
        for g, d in zip(gen_grads, disc_grads)
    ]
    return JointLoss(gen, disc, gen + cfg.alpha * disc, grads)


def joint_loss(
    preds: Sequence[Tensor], targets: Sequence[Tensor], cfg: LossConfig
) -> tuple[float, list[Tensor]]:
    terms = joint_loss_terms(preds, targets, cfg)
    return terms.total, terms.grads
