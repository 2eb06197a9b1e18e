"""
Photo-sketch pairs and datasets.

A PhotoSketchPair holds the preprocessed 3x200x155 photo (before XY channels)
and the 1x188x143 target sketch. Helpers build network inputs and cut aligned
photo/sketch windows for desk-scale training on crops.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from core.config import PHOTO_HEIGHT, PHOTO_WIDTH, SKETCH_HEIGHT, SKETCH_WIDTH
from core.errors import ArgumentError, DimensionError
from core.tensor import Tensor, as_tensor
from tools.preprocess import add_xy_channels

# photo-to-sketch border: the sketch is the photo's center minus this margin per side
SKETCH_MARGIN_Y = (PHOTO_HEIGHT - SKETCH_HEIGHT) // 2
SKETCH_MARGIN_X = (PHOTO_WIDTH - SKETCH_WIDTH) // 2


@dataclass(frozen=True, eq=False)
class PhotoSketchPair:
    photo: Tensor
    sketch: Tensor
    identity: str

    def __post_init__(self) -> None:
        if self.photo.shape != (3, PHOTO_HEIGHT, PHOTO_WIDTH):
            raise DimensionError(
                f"{self.identity}: photo shape {self.photo.shape} != (3, {PHOTO_HEIGHT}, {PHOTO_WIDTH})"
            )
        if self.sketch.shape != (1, SKETCH_HEIGHT, SKETCH_WIDTH):
            raise DimensionError(
                f"{self.identity}: sketch shape {self.sketch.shape} != (1, {SKETCH_HEIGHT}, {SKETCH_WIDTH})"
            )
        for name, img in (("photo", self.photo), ("sketch", self.sketch)):
            if img.min() < 0 or img.max() > 255:
                raise ArgumentError(f"{self.identity}: {name} values leave [0, 255]")


@dataclass(frozen=True, eq=False)
class Dataset:
    pairs: tuple[PhotoSketchPair, ...]
    split: Literal["train", "test"] = "train"
    identities: tuple[str, ...] = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "pairs", tuple(self.pairs))
        ids = tuple(p.identity for p in self.pairs)
        duplicates = sorted({i for i in ids if ids.count(i) > 1})
        if duplicates:
            raise ArgumentError(f"duplicate identities in {self.split} split: {', '.join(duplicates)}")
        object.__setattr__(self, "identities", ids)

    def __len__(self) -> int:
        return len(self.pairs)

    def subset(self, size: int, split: Literal["train", "test"] | None = None) -> "Dataset":
        """The first `size` pairs."""
        if not 1 <= size <= len(self.pairs):
            raise ArgumentError(f"subset size {size} must be within 1..{len(self.pairs)}")
        return Dataset(self.pairs[:size], split or self.split)

    def split_at(self, n_train: int) -> tuple["Dataset", "Dataset"]:
        if not 1 <= n_train < len(self.pairs):
            raise ArgumentError(f"train size {n_train} must be within 1..{len(self.pairs) - 1}")
        return Dataset(self.pairs[:n_train], "train"), Dataset(self.pairs[n_train:], "test")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            self.split == other.split
            and self.identities == other.identities
            and all(
                np.array_equal(a.photo, b.photo) and np.array_equal(a.sketch, b.sketch)
                for a, b in zip(self.pairs, other.pairs)
            )
        )


def network_input(photo: Tensor, xy_channels: bool = True) -> Tensor:
    return add_xy_channels(photo) if xy_channels else as_tensor(photo)


@dataclass(frozen=True)
class TrainingSample:
    """One network input and the target its output is compared against."""

    inputs: Tensor
    target: Tensor
    identity: str


def crop_window(pair: PhotoSketchPair, size: int, shrink: int,
                xy_channels: bool = True) -> TrainingSample:
    """
    Center `size` x `size` photo window plus the sketch window covering the
    network output for that window (side `size - shrink`).

    XY channels are computed on the full photo before cropping, so a crop keeps
    the coordinates of its position in the face.
    """
    top, left, s_top, s_left = check_crop_size(size, shrink)
    photo = network_input(pair.photo, xy_channels)
    inputs = np.ascontiguousarray(photo[:, top:top + size, left:left + size])
    out = size - shrink
    target = np.ascontiguousarray(pair.sketch[:, s_top:s_top + out, s_left:s_left + out])
    return TrainingSample(inputs, target, pair.identity)


def check_crop_size(size: int, shrink: int) -> tuple[int, int, int, int]:
    """Validate a center crop for a network of total shrink `shrink`; returns photo and sketch window origins."""
    if size <= shrink:
        raise ArgumentError(f"crop size {size} must exceed the network shrink {shrink}")
    if size > min(PHOTO_HEIGHT, PHOTO_WIDTH) or size - shrink > min(SKETCH_HEIGHT, SKETCH_WIDTH):
        raise ArgumentError(f"crop size {size} does not fit a {PHOTO_HEIGHT}x{PHOTO_WIDTH} photo")
    top = (PHOTO_HEIGHT - size) // 2
    left = (PHOTO_WIDTH - size) // 2
    out = size - shrink
    s_top = top + shrink // 2 - SKETCH_MARGIN_Y
    s_left = left + shrink // 2 - SKETCH_MARGIN_X
    if s_top < 0 or s_left < 0 or s_top + out > SKETCH_HEIGHT or s_left + out > SKETCH_WIDTH:
        raise ArgumentError(f"crop size {size} reaches outside the sketch area")
    return top, left, s_top, s_left


def full_samples(dataset: Dataset, xy_channels: bool = True) -> list[TrainingSample]:
    return [TrainingSample(network_input(p.photo, xy_channels), p.sketch, p.identity) for p in dataset.pairs]


def crop_samples(dataset: Dataset, size: int, shrink: int, xy_channels: bool = True) -> list[TrainingSample]:
    return [crop_window(p, size, shrink, xy_channels) for p in dataset.pairs]
