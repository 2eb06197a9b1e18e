"""
Photo / sketch preprocessing: eye alignment, center crops, XY coordinate
channels and the grayscale pseudo-sketch baseline.

All transforms are pure and deterministic and keep pixel values in [0, 255].
"""

from __future__ import annotations

import logging

import cv2
import numpy as np

from core.config import (
    ALIGNED_HEIGHT,
    ALIGNED_WIDTH,
    CANONICAL_LEFT_EYE,
    CANONICAL_RIGHT_EYE,
    PHOTO_HEIGHT,
    PHOTO_WIDTH,
    SKETCH_HEIGHT,
    SKETCH_WIDTH,
)
from core.errors import ArgumentError, DimensionError
from core.tensor import Tensor, as_tensor

logger = logging.getLogger(__name__)

Point = tuple[float, float]  # (x, y) = (column, row)

LUMA_WEIGHTS = (0.299, 0.587, 0.114)


def clamp_pixels(img: Tensor) -> Tensor:
    return np.clip(img, 0.0, 255.0).astype(img.dtype, copy=False)


def similarity_matrix(src_left: Point, src_right: Point,
                      dst_left: Point = CANONICAL_LEFT_EYE,
                      dst_right: Point = CANONICAL_RIGHT_EYE) -> np.ndarray:
    """
    2x3 matrix of the rotation + uniform scale + translation that maps the two
    source points onto the two destination points.
    """
    s1, s2 = complex(*src_left), complex(*src_right)
    d1, d2 = complex(*dst_left), complex(*dst_right)
    if s1 == s2:
        raise ArgumentError(f"eye points coincide at {src_left}")
    a = (d2 - d1) / (s2 - s1)
    b = d1 - a * s1
    return np.array([[a.real, -a.imag, b.real],
                     [a.imag, a.real, b.imag]], dtype=np.float64)


def align_by_eyes(img: Tensor, left_eye: Point, right_eye: Point) -> Tensor:
    """
    Warp `img` so the eye centers land on the canonical positions of a
    200-wide x 250-tall canvas. Bilinear sampling; pixels with no source are
    black.
    """
    img = as_tensor(img)
    _, h, w = img.shape
    for name, (x, y) in (("left_eye", left_eye), ("right_eye", right_eye)):
        if not (0 <= x <= w - 1 and 0 <= y <= h - 1):
            raise ArgumentError(f"{name} {(x, y)} lies outside a {w}x{h} image")
    matrix = similarity_matrix(left_eye, right_eye)

    src = np.ascontiguousarray(img.transpose(1, 2, 0), dtype=np.float32)
    warped = cv2.warpAffine(
        src,
        matrix,
        (ALIGNED_WIDTH, ALIGNED_HEIGHT),
        flags=cv2.INTER_LINEAR,
        borderMode=cv2.BORDER_CONSTANT,
        borderValue=0,
    )
    if warped.ndim == 2:
        warped = warped[:, :, None]
    return clamp_pixels(as_tensor(warped.transpose(2, 0, 1), dtype=img.dtype))


def crop_center(img: Tensor, out_h: int, out_w: int) -> Tensor:
    """Centered window; an odd margin gives the extra pixel to the bottom/right."""
    img = as_tensor(img)
    _, h, w = img.shape
    if out_h > h or out_w > w or out_h < 1 or out_w < 1:
        raise DimensionError(f"cannot crop {out_h}x{out_w} from image of shape {img.shape}")
    top = (h - out_h) // 2
    left = (w - out_w) // 2
    return np.ascontiguousarray(img[:, top:top + out_h, left:left + out_w])


def add_xy_channels(photo: Tensor) -> Tensor:
    """Append row and column coordinate channels scaled to [0, 255]."""
    photo = as_tensor(photo)
    c, h, w = photo.shape
    if c != 3:
        raise DimensionError(f"XY channels are added to 3-channel photos, got shape {photo.shape}")
    rows = np.arange(h, dtype=np.float64) * (255.0 / (h - 1)) if h > 1 else np.zeros(h)
    cols = np.arange(w, dtype=np.float64) * (255.0 / (w - 1)) if w > 1 else np.zeros(w)
    yy = np.broadcast_to(rows[:, None], (h, w))
    xx = np.broadcast_to(cols[None, :], (h, w))
    return np.concatenate([photo, np.stack([yy, xx]).astype(photo.dtype)], axis=0)


def to_grayscale(photo: Tensor) -> Tensor:
    photo = as_tensor(photo)
    if photo.shape[0] != 3:
        raise DimensionError(f"grayscale conversion needs 3 channels, got shape {photo.shape}")
    weights = np.asarray(LUMA_WEIGHTS, dtype=np.float64)
    gray = np.tensordot(weights, photo.astype(np.float64), axes=(0, 0))
    return gray[None].astype(photo.dtype)


def prepare_photo(img: Tensor, eyes: tuple[Point, Point] | None = None,
                  xy_channels: bool = True) -> Tensor:
    """
    Raw photo -> network input: optional eye alignment, 155x200 center crop,
    optional XY channels.
    """
    img = as_tensor(img)
    if img.shape[0] == 1:
        img = np.repeat(img, 3, axis=0)
    if eyes is not None:
        img = align_by_eyes(img, *eyes)
    img = crop_center(img, PHOTO_HEIGHT, PHOTO_WIDTH)
    return add_xy_channels(img) if xy_channels else img


def prepare_sketch(img: Tensor, eyes: tuple[Point, Point] | None = None) -> Tensor:
    """Raw sketch -> 1x143x188 training target."""
    img = as_tensor(img)
    if img.shape[0] == 3:
        img = to_grayscale(img)
    if eyes is not None:
        img = align_by_eyes(img, *eyes)
        img = crop_center(img, PHOTO_HEIGHT, PHOTO_WIDTH)
    return crop_center(img, SKETCH_HEIGHT, SKETCH_WIDTH)


def photo_channels(xy_channels: bool) -> int:
    return 5 if xy_channels else 3


def xy_channels_for(in_channels: int) -> bool:
    """Whether a network taking `in_channels` inputs expects XY channels on its photos."""
    if in_channels not in (photo_channels(False), photo_channels(True)):
        raise DimensionError(
            f"network takes {in_channels} input channels; photos provide "
            f"{photo_channels(False)} ({photo_channels(True)} with XY)"
        )
    return in_channels == photo_channels(True)


def strip_xy_channels(photo: Tensor) -> Tensor:
    return np.ascontiguousarray(photo[:photo_channels(False)])
