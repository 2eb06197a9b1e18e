"""
Synthetic photo-sketch pairs.

Stands in for a real face sketch database in tests and demos. Every photo is a
procedurally drawn 3x200x155 "face" (smooth background blobs plus
identity-specific shapes); every sketch is a fixed pencil-style transform of
its photo, so the mapping is deterministic and spatially local.
"""

from __future__ import annotations

import logging

import cv2
import numpy as np

from core.config import PHOTO_HEIGHT, PHOTO_WIDTH, SKETCH_HEIGHT, SKETCH_WIDTH
from core.errors import ArgumentError
from core.tensor import Tensor
from tools.dataset import Dataset, PhotoSketchPair
from tools.preprocess import clamp_pixels, crop_center, to_grayscale

logger = logging.getLogger(__name__)


def identity_name(index: int) -> str:
    return f"synth-{index + 1:04d}"


def _color(rng: np.random.Generator, low: float = 0.0, high: float = 255.0) -> tuple[float, float, float]:
    return tuple(float(c) for c in rng.uniform(low, high, size=3))


def synth_photo(rng: np.random.Generator) -> Tensor:
    """Draw one 3x200x155 photo from `rng`."""
    h, w = PHOTO_HEIGHT, PHOTO_WIDTH
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)

    # smooth background: a color gradient plus a few soft blobs
    top, bottom = np.array(_color(rng, 40, 200)), np.array(_color(rng, 40, 200))
    img = top[None, None, :] + (bottom - top)[None, None, :] * (yy / (h - 1))[:, :, None]
    for _ in range(int(rng.integers(3, 7))):
        cy, cx = rng.uniform(0, h), rng.uniform(0, w)
        sigma = rng.uniform(10, 35)
        blob = np.exp(-((yy - cy) ** 2 + (xx - cx) ** 2) / (2 * sigma ** 2))
        img += blob[:, :, None] * (np.array(_color(rng)) - 128.0)[None, None, :] * 0.6

    img = np.ascontiguousarray(np.clip(img, 0, 255), dtype=np.float32)

    # face, hair, eyes, mouth: geometry varies per identity
    cx = int(w // 2 + rng.integers(-6, 7))
    cy = int(h // 2 + rng.integers(-8, 9))
    face_axes = (int(rng.integers(42, 56)), int(rng.integers(58, 76)))
    cv2.ellipse(img, (cx, cy), face_axes, 0, 0, 360, _color(rng, 120, 240), -1)
    hair_h = int(rng.integers(12, 40))
    cv2.ellipse(img, (cx, cy - face_axes[1] + hair_h // 2), (face_axes[0] + 4, hair_h),
                0, 180, 360, _color(rng, 0, 120), -1)

    eye_y = int(cy - rng.integers(10, 24))
    eye_dx = int(rng.integers(14, 24))
    eye_r = int(rng.integers(3, 8))
    eye_color = _color(rng, 0, 90)
    for sign in (-1, 1):
        cv2.circle(img, (cx + sign * eye_dx, eye_y), eye_r, eye_color, -1)
        cv2.line(img, (cx + sign * eye_dx - 8, eye_y - eye_r - 5),
                 (cx + sign * eye_dx + 8, eye_y - eye_r - int(rng.integers(3, 9))),
                 _color(rng, 0, 80), int(rng.integers(1, 4)))

    cv2.line(img, (cx, eye_y + 6), (cx + int(rng.integers(-4, 5)), cy + 12), _color(rng, 60, 160), 2)
    mouth_y = int(cy + rng.integers(26, 40))
    cv2.ellipse(img, (cx, mouth_y), (int(rng.integers(8, 20)), int(rng.integers(2, 7))),
                0, 0, 360, _color(rng, 60, 200), -1)

    # a few distinctive marks
    for _ in range(int(rng.integers(1, 4))):
        px, py = int(rng.integers(10, w - 10)), int(rng.integers(10, h - 10))
        if rng.random() < 0.5:
            cv2.circle(img, (px, py), int(rng.integers(3, 10)), _color(rng), -1)
        else:
            cv2.rectangle(img, (px, py), (px + int(rng.integers(4, 16)), py + int(rng.integers(4, 16))),
                          _color(rng), -1)

    img = cv2.GaussianBlur(img, (3, 3), 0)
    return clamp_pixels(np.ascontiguousarray(img.transpose(2, 0, 1)))


def sketch_transform(photo: Tensor) -> Tensor:
    """
    Pencil-style rendering of a 3x200x155 photo, center-cropped to 1x188x143:
    grayscale, light blur, Sobel edge emphasis and a fixed contrast stretch.
    """
    gray = to_grayscale(photo)[0].astype(np.float32)
    smooth = cv2.GaussianBlur(gray, (3, 3), 0)
    gx = cv2.Sobel(smooth, cv2.CV_32F, 1, 0, ksize=3)
    gy = cv2.Sobel(smooth, cv2.CV_32F, 0, 1, ksize=3)
    edges = np.sqrt(gx * gx + gy * gy)
    shaded = 0.55 * (127.5 + 0.5 * smooth) + 0.45 * (255.0 - 1.5 * edges)
    stretched = (shaded - 40.0) * (255.0 / 200.0)
    sketch = np.clip(stretched, 0.0, 255.0).astype(np.float32)[None]
    return crop_center(sketch, SKETCH_HEIGHT, SKETCH_WIDTH)


def synth_pairs(seed: int, n: int, split: str = "train") -> Dataset:
    """
    `n` deterministic pairs with identities synth-0001, synth-0002, ...

    Pair i only depends on (seed, i), so a larger n extends a smaller one.
    """
    if n < 1:
        raise ArgumentError(f"synthetic pair count must be >= 1, got {n}")
    pairs = []
    for i in range(n):
        rng = np.random.default_rng([seed, i])
        photo = synth_photo(rng)
        pairs.append(PhotoSketchPair(photo, sketch_transform(photo), identity_name(i)))
    logger.info("Synthesized %d photo-sketch pairs (seed %d)", n, seed)
    return Dataset(tuple(pairs), split)
