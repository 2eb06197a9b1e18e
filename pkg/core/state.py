from typing import TypedDict


class LossRecord(TypedDict):
    iteration: int
    generative: float
    discriminative: float
    total: float


class CmsReport(TypedDict):
    ranks: list[int]
    scores: list[float]          # percentage per rank, same order as ranks
    gallery_size: int
    # rank of the true identity (1-based) for every query, in query order
    match_ranks: list[int]


class MprlRow(TypedDict):
    identity: str
    prl: list[float]             # one value per scale, same order as MprlReport.scales


class MprlReport(TypedDict):
    scales: list[float]
    rows: list[MprlRow]
    means: list[float]           # dataset mean per scale


class SweepRow(TypedDict):
    subset_size: int
    alpha: float
    rank1: float
    final_loss: float


class ReportedCms(TypedDict):
    method: str
    scores: dict[int, float]     # rank -> percentage


# Published cumulative match scores on the 100-subject test split, ranks 1/3/5/10.
# Reference numbers only; none of the comparison methods is implemented here.
REPORTED_CMS: list[ReportedCms] = [
    {"method": "Baseline (grayscale)", "scores": {1: 41.0, 3: 56.0, 5: 59.0, 10: 70.0}},
    {"method": "ET", "scores": {1: 71.0, 3: 81.0, 5: 88.0, 10: 96.0}},
    {"method": "MRF", "scores": {1: 96.0, 10: 100.0}},
    {"method": "MRF+", "scores": {1: 99.0, 10: 100.0}},
    {"method": "SVR", "scores": {1: 100.0}},
    {"method": "Generative FCN", "scores": {1: 100.0, 3: 100.0, 5: 100.0, 10: 100.0}},
]

# Published MPRL at scales (0.5, 1, 2) per architecture.
REPORTED_MPRL: dict[str, tuple[float, float, float]] = {
    "sr": (34.5, 36.8, 36.2),
    "small": (32.6, 35.0, 34.4),
    "medium": (32.1, 34.6, 34.0),
    "large": (30.0, 32.5, 31.9),
}

# Published single-image (5x155x200) forward time per architecture on a GPU, in ms.
REPORTED_RUNTIME_MS: dict[str, float] = {"sr": 8.5, "small": 8.6, "medium": 17.1, "large": 50.8}
