"""
Report writers: training loss logs, CMS / MPRL evaluation reports, sweep and
benchmark tables, and JSON run summaries.

Tables are comma-separated with a header row; lines starting with `#` are
comments. Writers create parent directories and default into OUTPUTS_DIR.
"""

from __future__ import annotations

import io
import json
import logging
from datetime import datetime
from pathlib import Path
from types import TracebackType
from typing import Any, Mapping, Sequence, TextIO

import pandas as pd

from core.config import OUTPUTS_DIR, PHOTO_HEIGHT, PHOTO_WIDTH
from core.loss import LossConfig
from core.state import (
    REPORTED_CMS,
    REPORTED_MPRL,
    CmsReport,
    LossRecord,
    MprlReport,
    SweepRow,
)

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.10g"
LOSS_LOG_COLUMNS = ("iter", "L_gen", "L_discrim", "L_total")


def _timestamp() -> str:
    return datetime.now().strftime("%Y%m%d_%H%M%S")


def default_output(prefix: str, suffix: str = ".csv") -> Path:
    return OUTPUTS_DIR / f"{prefix}_{_timestamp()}{suffix}"


def _prepare(path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def _csv(frame: pd.DataFrame) -> str:
    buf = io.StringIO()
    frame.to_csv(buf, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    return buf.getvalue()


def _comments(lines: Sequence[str]) -> str:
    return "".join(f"# {line}\n" for line in lines)


# ---------------------------------------------------------------------------
# Training log
# ---------------------------------------------------------------------------

def loss_log_header(loss: LossConfig, learning_rate: float, extra: Mapping[str, Any] | None = None) -> list[str]:
    header = [f"alpha={loss.alpha:g} lambda={loss.lambda_:g} lr={learning_rate:g}"]
    if extra:
        header.append(" ".join(f"{k}={v}" for k, v in extra.items()))
    return header


class LossLogWriter:
    """
    Streams one `iter,L_gen,L_discrim,L_total` row per iteration.

    Use as a context manager and pass `write` as the trainer's record callback.
    """

    def __init__(self, path: str | Path, header: Sequence[str] = ()) -> None:
        self.path = _prepare(path)
        self._header = list(header)
        self._fh: TextIO | None = None

    def __enter__(self) -> "LossLogWriter":
        self._fh = self.path.open("w", encoding="utf-8", newline="\n")
        self._fh.write(_comments(self._header))
        self._fh.write(",".join(LOSS_LOG_COLUMNS) + "\n")
        return self

    def write(self, record: LossRecord) -> None:
        if self._fh is None:
            raise RuntimeError("LossLogWriter used outside its context")
        values = [record["generative"], record["discriminative"], record["total"]]
        self._fh.write(f"{record['iteration']}," + ",".join(FLOAT_FORMAT % v for v in values) + "\n")

    def __exit__(self, exc_type: type[BaseException] | None, exc: BaseException | None,
                 tb: TracebackType | None) -> None:
        if self._fh is not None:
            self._fh.close()
            self._fh = None
        if exc_type is None:
            logger.info("Training log written: %s", self.path)


def read_loss_log(path: str | Path) -> pd.DataFrame:
    return pd.read_csv(path, comment="#")


# ---------------------------------------------------------------------------
# Evaluation reports
# ---------------------------------------------------------------------------

def cms_frame(report: CmsReport) -> pd.DataFrame:
    return pd.DataFrame({"rank": report["ranks"], "score": report["scores"]})


def mprl_mean_frame(report: MprlReport) -> pd.DataFrame:
    return pd.DataFrame({"scale": report["scales"], "mean_prl": report["means"]})


def mprl_pairs_frame(report: MprlReport) -> pd.DataFrame:
    columns = [f"prl_{s:g}" for s in report["scales"]]
    frame = pd.DataFrame([r["prl"] for r in report["rows"]], columns=columns)
    frame.insert(0, "identity", [r["identity"] for r in report["rows"]])
    return frame


def reported_cms_frame() -> pd.DataFrame:
    rows = [
        {"method": entry["method"], "rank": rank, "score": score}
        for entry in REPORTED_CMS
        for rank, score in sorted(entry["scores"].items())
    ]
    return pd.DataFrame(rows, columns=["method", "rank", "score"])


def reported_mprl_frame(scales: Sequence[float]) -> pd.DataFrame:
    rows = [
        {"arch": arch, "scale": scale, "mprl": value}
        for arch, values in REPORTED_MPRL.items()
        for scale, value in zip(scales, values)
    ]
    return pd.DataFrame(rows, columns=["arch", "scale", "mprl"])


def write_evaluation_report(
    path: str | Path,
    cms: CmsReport,
    mprl: MprlReport | None = None,
    comments: Sequence[str] = (),
    with_reported: bool = False,
) -> Path:
    """
    Write the CMS table (`rank,score`), then the mean MPRL table
    (`scale,mean_prl`), blank-line separated. Per-pair MPRL rows go to a
    sibling `<stem>.pairs.csv`.

    With `with_reported`, the published comparison rows follow as
    `method,rank,score` and `arch,scale,mprl` tables under a comment saying
    they are cited numbers.
    """
    path = _prepare(path)
    sections = [_comments([*comments, f"gallery_size={cms['gallery_size']}"]) + _csv(cms_frame(cms))]
    if mprl is not None:
        sections.append(_csv(mprl_mean_frame(mprl)))
    if with_reported:
        sections.append(_comments(["published CMS, reference only"]) + _csv(reported_cms_frame()))
        scales = mprl["scales"] if mprl is not None else [0.5, 1.0, 2.0]
        sections.append(_comments(["published MPRL per architecture, reference only"])
                        + _csv(reported_mprl_frame(scales)))
    path.write_text("\n".join(sections), encoding="utf-8")
    logger.info("Evaluation report written: %s", path)

    if mprl is not None:
        pairs_path = path.with_name(f"{path.stem}.pairs.csv")
        pairs_path.write_text(_csv(mprl_pairs_frame(mprl)), encoding="utf-8")
        logger.info("Per-pair MPRL written: %s", pairs_path)
    return path


def read_report_sections(path: str | Path) -> list[pd.DataFrame]:
    """Parse a report written by `write_evaluation_report` back into its tables."""
    text = Path(path).read_text(encoding="utf-8")
    blocks = [b for b in text.split("\n\n") if b.strip()]
    return [pd.read_csv(io.StringIO(block), comment="#") for block in blocks]


# ---------------------------------------------------------------------------
# Sweep and benchmark tables
# ---------------------------------------------------------------------------

def write_sweep_report(rows: Sequence[SweepRow], path: str | Path, comments: Sequence[str] = ()) -> Path:
    path = _prepare(path)
    frame = pd.DataFrame(list(rows), columns=["subset_size", "alpha", "rank1", "final_loss"])
    path.write_text(_comments(comments) + _csv(frame), encoding="utf-8")
    logger.info("Sweep report written: %s", path)
    return path


def write_benchmark_report(rows: Sequence[Mapping[str, Any]], path: str | Path) -> Path:
    path = _prepare(path)
    frame = pd.DataFrame(list(rows), columns=["arch", "params", "median_ms"])
    header = _comments([f"single {PHOTO_WIDTH}x{PHOTO_HEIGHT} image forward pass, CPU"])
    path.write_text(header + _csv(frame), encoding="utf-8")
    logger.info("Benchmark report written: %s", path)
    return path


# ---------------------------------------------------------------------------
# Run summary
# ---------------------------------------------------------------------------

def write_run_summary(summary: Mapping[str, Any], path: str | Path) -> Path:
    path = _prepare(path)
    path.write_text(json.dumps(summary, indent=2, default=str) + "\n", encoding="utf-8")
    logger.info("Run summary written: %s", path)
    return path
