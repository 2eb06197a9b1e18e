"""
Evaluation: pixel-wise reconstruction loss (PRL) and its multiscale variant,
the sketch verification distance and cumulative match scores (CMS).
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Sequence

import numpy as np

from core.config import DEFAULT_RANKS, MPRL_SCALES, PHOTO_HEIGHT, PHOTO_WIDTH, SKETCH_HEIGHT, SKETCH_WIDTH
from core.errors import ArgumentError, DimensionError
from core.loss import pair_sqdist
from core.network import Network, predict
from core.state import CmsReport, MprlReport, MprlRow
from core.tensor import Tensor, as_tensor, resize_bilinear
from tools.dataset import Dataset, TrainingSample, check_crop_size, crop_samples, full_samples
from tools.preprocess import clamp_pixels, crop_center, to_grayscale, xy_channels_for

logger = logging.getLogger(__name__)

Labeled = tuple[Tensor, str]


def _check_single_channel_pair(a: Tensor, b: Tensor, what: str) -> tuple[Tensor, Tensor]:
    a, b = as_tensor(a), as_tensor(b)
    if a.shape != b.shape:
        raise DimensionError(f"{what}: shapes {a.shape} and {b.shape} differ")
    if a.shape[0] != 1:
        raise DimensionError(f"{what}: expected single-channel images, got shape {a.shape}")
    return a, b


# ── Reconstruction loss ──────────────────────────────────────────────────────

def prl(gt: Tensor, pred: Tensor) -> float:
    """sqrt(sum of squared pixel differences) / (W * H); the normalizer sits outside the root."""
    gt, pred = _check_single_channel_pair(gt, pred, "prl")
    _, h, w = gt.shape
    diff = gt.astype(np.float64) - pred.astype(np.float64)
    return math.sqrt(float(np.sum(diff * diff))) / (w * h)


def mprl(gt: Tensor, pred: Tensor, scales: Sequence[float] = MPRL_SCALES) -> tuple[float, ...]:
    """PRL after bilinearly resizing both images to every scale."""
    gt, pred = _check_single_channel_pair(gt, pred, "mprl")
    return tuple(prl(resize_bilinear(gt, s), resize_bilinear(pred, s)) for s in scales)


def mprl_report(pairs: Sequence[tuple[Tensor, Tensor, str]],
                scales: Sequence[float] = MPRL_SCALES) -> MprlReport:
    """
    Per-pair and mean MPRL.

    Args:
        pairs: (ground-truth sketch, generated sketch, identity) triples.
        scales: Resize factors.
    """
    if not pairs:
        raise ArgumentError("MPRL needs at least one pair")
    rows: list[MprlRow] = [
        {"identity": identity, "prl": list(mprl(gt, pred, scales))} for gt, pred, identity in pairs
    ]
    values = np.array([r["prl"] for r in rows], dtype=np.float64)
    return {
        "scales": [float(s) for s in scales],
        "rows": rows,
        "means": [float(m) for m in values.mean(axis=0)],
    }


# ── Verification ─────────────────────────────────────────────────────────────

def verification_distance(query_sketch: Tensor, pseudo_sketch: Tensor) -> float:
    """Squared Euclidean distance, i.e. the generative loss of a single pair."""
    a, b = _check_single_channel_pair(query_sketch, pseudo_sketch, "verification_distance")
    return pair_sqdist(a, b)


def _check_ranks(ranks: Sequence[int], gallery_size: int) -> list[int]:
    ranks = [int(r) for r in ranks]
    if not ranks:
        raise ArgumentError("at least one rank is required")
    bad = [r for r in ranks if not 1 <= r <= gallery_size]
    if bad:
        raise ArgumentError(f"ranks {bad} are outside 1..{gallery_size} (gallery size)")
    return ranks


def cms(
    queries: Sequence[Labeled],
    gallery: Sequence[Labeled],
    ranks: Sequence[int] = DEFAULT_RANKS,
    threads: int = 1,
) -> CmsReport:
    """
    Cumulative match scores.

    Every query's gallery is sorted by ascending distance; ties keep gallery
    order. score(n) is the percentage of queries whose true identity is among
    the first n entries.
    """
    if not queries:
        raise ArgumentError("CMS needs at least one query")
    gallery_ids = [identity for _, identity in gallery]
    seen: set[str] = set()
    for identity in gallery_ids:
        if identity in seen:
            raise ArgumentError(f"identity {identity!r} appears more than once in the gallery")
        seen.add(identity)
    for _, identity in queries:
        if identity not in seen:
            raise ArgumentError(f"query identity {identity!r} is absent from the gallery")
    ranks = _check_ranks(ranks, len(gallery))

    def match_rank(query: Labeled) -> int:
        sketch, identity = query
        dists = np.array([verification_distance(sketch, g) for g, _ in gallery])
        order = np.argsort(dists, kind="stable")
        return int(np.flatnonzero(order == gallery_ids.index(identity))[0]) + 1

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            match_ranks = list(pool.map(match_rank, queries))
    else:
        match_ranks = [match_rank(q) for q in queries]

    found = np.array(match_ranks)
    scores = [100.0 * float(np.count_nonzero(found <= r)) / len(queries) for r in ranks]
    return {
        "ranks": ranks,
        "scores": scores,
        "gallery_size": len(gallery),
        "match_ranks": match_ranks,
    }


# ── Pipelines ────────────────────────────────────────────────────────────────

def check_model_fits(net: Network, crop_size: int | None = None) -> bool:
    """
    Raise ArgumentError unless `net` can be run on aligned photos, either whole
    or as `crop_size` center crops. Returns whether it takes XY channels.
    """
    try:
        xy = xy_channels_for(net.spec.in_channels)
    except DimensionError as exc:
        raise ArgumentError(str(exc)) from exc
    shrink = net.spec.total_shrink
    if crop_size is not None:
        check_crop_size(crop_size, shrink)
    elif (PHOTO_HEIGHT - shrink, PHOTO_WIDTH - shrink) != (SKETCH_HEIGHT, SKETCH_WIDTH):
        raise ArgumentError(
            f"network shrinks by {shrink}, so a {PHOTO_WIDTH}x{PHOTO_HEIGHT} photo does not map onto "
            f"a {SKETCH_WIDTH}x{SKETCH_HEIGHT} sketch; evaluate it on crops instead"
        )
    return xy


def evaluation_samples(net: Network, test_set: Dataset, crop_size: int | None = None) -> list[TrainingSample]:
    """Network inputs and query sketches for `test_set`, matching the net's input channels."""
    xy = check_model_fits(net, crop_size)
    if crop_size is None:
        return full_samples(test_set, xy)
    return crop_samples(test_set, crop_size, net.spec.total_shrink, xy)


def generate_sketches(net: Network, samples: Sequence[TrainingSample], threads: int = 1) -> list[Tensor]:
    """Pseudo-sketches for every sample, clamped to [0, 255]."""
    def run(sample: TrainingSample) -> Tensor:
        return clamp_pixels(predict(net, sample.inputs))

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(run, samples))
    return [run(s) for s in samples]


def evaluate_verification(
    net: Network,
    test_set: Dataset,
    ranks: Sequence[int] = DEFAULT_RANKS,
    crop_size: int | None = None,
    threads: int = 1,
) -> CmsReport:
    """
    Convert every test photo into a pseudo-sketch (the gallery) and match the
    drawn sketches (the queries) against them.
    """
    samples = evaluation_samples(net, test_set, crop_size)
    pseudo = generate_sketches(net, samples, threads)
    queries = [(s.target, s.identity) for s in samples]
    gallery = [(p, s.identity) for p, s in zip(pseudo, samples)]
    report = cms(queries, gallery, ranks, threads)
    logger.info(
        "Verification on %d identities: %s",
        len(samples), ", ".join(f"rank-{r}={s:.1f}%" for r, s in zip(report["ranks"], report["scores"])),
    )
    return report


def grayscale_baseline(test_set: Dataset) -> list[Tensor]:
    """Pseudo-sketches that are just the grayscale photo cropped to the sketch area."""
    sketch_h, sketch_w = test_set.pairs[0].sketch.shape[1:] if test_set.pairs else (0, 0)
    return [crop_center(to_grayscale(p.photo), sketch_h, sketch_w) for p in test_set.pairs]


def evaluate_baseline(test_set: Dataset, ranks: Sequence[int] = DEFAULT_RANKS, threads: int = 1) -> CmsReport:
    gallery = [(g, p.identity) for g, p in zip(grayscale_baseline(test_set), test_set.pairs)]
    queries = [(p.sketch, p.identity) for p in test_set.pairs]
    report = cms(queries, gallery, ranks, threads)
    logger.info("Grayscale baseline rank-1 on %d identities: %.1f%%", len(queries), report["scores"][0])
    return report


def evaluate_identity_gallery(test_set: Dataset, ranks: Sequence[int] = DEFAULT_RANKS) -> CmsReport:
    """Sanity mode: the drawn sketches are matched against themselves."""
    labeled = [(p.sketch, p.identity) for p in test_set.pairs]
    return cms(labeled, labeled, ranks)


def evaluate_model(
    net: Network,
    test_set: Dataset,
    ranks: Sequence[int] = DEFAULT_RANKS,
    crop_size: int | None = None,
    threads: int = 1,
) -> tuple[CmsReport, MprlReport, list[Tensor]]:
    """CMS and MPRL from one set of pseudo-sketches, which are returned as well."""
    samples = evaluation_samples(net, test_set, crop_size)
    pseudo = generate_sketches(net, samples, threads)
    queries = [(s.target, s.identity) for s in samples]
    gallery = [(p, s.identity) for p, s in zip(pseudo, samples)]
    report = cms(queries, gallery, ranks, threads)
    quality = mprl_report([(s.target, p, s.identity) for s, p in zip(samples, pseudo)])
    logger.info(
        "Rank-1 %.1f%% on %d identities; mean MPRL %s",
        report["scores"][0], len(samples), ", ".join(f"{m:.4g}" for m in quality["means"]),
    )
    return report, quality, pseudo
