"""
Dataset manifests.

One CSV record per line (double quotes protect commas and `#` inside a
field), `#` starts a comment:

    photo_path,sketch_path,identity[,lx,ly,rx,ry[,slx,sly,srx,sry]]

Paths are relative to the manifest's directory unless absolute. The optional
four numbers are the photo's left/right eye centers (x = column, y = row); the
optional last four are the sketch's eye centers (the photo's are reused when
absent). Records with eye coordinates are aligned before cropping unless
alignment is switched off for pre-aligned data.
"""

from __future__ import annotations

import csv
import io
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from core.errors import ManifestError
from tools.dataset import Dataset, PhotoSketchPair
from tools.image_io import load_image
from tools.preprocess import Point, prepare_photo, prepare_sketch

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ManifestRecord:
    photo: Path
    sketch: Path
    identity: str
    photo_eyes: tuple[Point, Point] | None = None
    sketch_eyes: tuple[Point, Point] | None = None


def _eyes(values: list[str], where: str) -> tuple[Point, Point]:
    try:
        lx, ly, rx, ry = (float(v) for v in values)
    except ValueError as exc:
        raise ManifestError(f"{where}: eye coordinates must be numbers, got {values}") from exc
    return (lx, ly), (rx, ry)


def _strip_comment(line: str) -> str:
    """Drop everything from the first `#` that is not inside double quotes."""
    quoted = False
    for i, ch in enumerate(line):
        if ch == '"':
            quoted = not quoted
        elif ch == "#" and not quoted:
            return line[:i]
    return line


def parse_manifest(text: str, base_dir: Path, source: str = "<manifest>") -> list[ManifestRecord]:
    records = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw).strip()
        if not line:
            continue
        where = f"{source}:{lineno}"
        try:
            (row,) = csv.reader([line], skipinitialspace=True, strict=True)
        except csv.Error as exc:
            raise ManifestError(f"{where}: malformed CSV line: {exc}") from exc
        fields = [f.strip() for f in row]
        if len(fields) not in (3, 7, 11):
            raise ManifestError(f"{where}: expected 3, 7 or 11 fields, got {len(fields)}")
        photo, sketch, identity = fields[:3]
        if not photo or not sketch or not identity:
            raise ManifestError(f"{where}: empty photo, sketch or identity field")
        photo_eyes = _eyes(fields[3:7], where) if len(fields) >= 7 else None
        sketch_eyes = _eyes(fields[7:11], where) if len(fields) == 11 else photo_eyes
        records.append(ManifestRecord(
            photo=(base_dir / photo) if not Path(photo).is_absolute() else Path(photo),
            sketch=(base_dir / sketch) if not Path(sketch).is_absolute() else Path(sketch),
            identity=identity,
            photo_eyes=photo_eyes,
            sketch_eyes=sketch_eyes,
        ))
    return records


def read_manifest(path: str | Path) -> list[ManifestRecord]:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ManifestError(f"cannot read manifest {path}: {exc}") from exc
    records = parse_manifest(text, path.parent, source=str(path))
    if not records:
        raise ManifestError(f"{path}: manifest lists no pairs")
    return records


def format_record(record: ManifestRecord, base_dir: Path) -> str:
    def rel(p: Path) -> str:
        try:
            return p.relative_to(base_dir).as_posix()
        except ValueError:
            return str(p)

    fields = [rel(record.photo), rel(record.sketch), record.identity]
    if record.photo_eyes is not None:
        fields += [f"{v:g}" for point in record.photo_eyes for v in point]
        if record.sketch_eyes is not None and record.sketch_eyes != record.photo_eyes:
            fields += [f"{v:g}" for point in record.sketch_eyes for v in point]
    buf = io.StringIO()
    # `#` starts a comment unless quoted
    quoting = csv.QUOTE_ALL if any("#" in f for f in fields) else csv.QUOTE_MINIMAL
    csv.writer(buf, lineterminator="", quoting=quoting).writerow(fields)
    return buf.getvalue()


def write_manifest(records: list[ManifestRecord], path: str | Path, header: str = "") -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"# {line}" for line in header.splitlines()]
    lines.append("# photo,sketch,identity[,lx,ly,rx,ry[,slx,sly,srx,sry]]")
    lines += [format_record(r, path.parent) for r in records]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    logger.info("Manifest written: %s (%d pairs)", path, len(records))
    return path


def load_pair(record: ManifestRecord, align: bool = True) -> PhotoSketchPair:
    photo = load_image(record.photo)
    sketch = load_image(record.sketch)
    photo = prepare_photo(photo, record.photo_eyes if align else None, xy_channels=False)
    sketch = prepare_sketch(sketch, record.sketch_eyes if align else None)
    return PhotoSketchPair(photo, sketch, record.identity)


def load_dataset(path: str | Path, split: str = "train", align: bool = True, threads: int = 1) -> Dataset:
    """
    Load and preprocess every pair of a manifest.

    Files may be decoded on a thread pool; the resulting dataset is ordered
    by photo path regardless of the worker count.
    """
    records = sorted(read_manifest(path), key=lambda r: str(r.photo))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            pairs = list(pool.map(lambda r: load_pair(r, align), records))
    else:
        pairs = [load_pair(r, align) for r in records]
    logger.info("Loaded %d pairs from %s", len(pairs), path)
    return Dataset(tuple(pairs), split)
