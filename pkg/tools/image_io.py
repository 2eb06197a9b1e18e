"""
Image decoding and encoding.

Binary Netpbm (P5 grayscale, P6 color) is handled natively; PNG is optional
and goes through OpenCV. Decoded images are (C, H, W) float32 tensors on the
0-255 scale; 16-bit Netpbm samples are rescaled to that range.
"""

from __future__ import annotations

import logging
import re
from pathlib import Path

import numpy as np

from core.errors import CorruptImageError, DimensionError, ImageNotFoundError, UnsupportedFormatError
from core.tensor import Tensor, as_tensor

logger = logging.getLogger(__name__)

_NETPBM_CHANNELS = {b"P5": 1, b"P6": 3}
# magic, width, height, maxval, then exactly one whitespace byte; comments allowed between fields
_TOKEN = re.compile(rb"\s*(?:#[^\n]*\n\s*)*(\S+)")


def _parse_netpbm_header(blob: bytes, source: str) -> tuple[int, int, int, int, int]:
    tokens = []
    pos = 0
    for _ in range(4):
        match = _TOKEN.match(blob, pos)
        if not match:
            raise CorruptImageError(f"{source}: truncated Netpbm header")
        tokens.append(match.group(1))
        pos = match.end()
    magic, *fields = tokens
    if magic not in _NETPBM_CHANNELS:
        raise UnsupportedFormatError(f"{source}: unsupported Netpbm variant {magic!r} (need P5 or P6)")
    try:
        width, height, maxval = (int(f) for f in fields)
    except ValueError as exc:
        raise CorruptImageError(f"{source}: malformed Netpbm header") from exc
    if width < 1 or height < 1 or not 0 < maxval < 65536:
        raise CorruptImageError(f"{source}: invalid Netpbm header {width}x{height} maxval {maxval}")
    if pos >= len(blob) or not blob[pos:pos + 1].isspace():
        raise CorruptImageError(f"{source}: missing whitespace after Netpbm header")
    return _NETPBM_CHANNELS[magic], width, height, maxval, pos + 1


def decode_netpbm(blob: bytes, source: str = "<bytes>") -> Tensor:
    channels, width, height, maxval, offset = _parse_netpbm_header(blob, source)
    sample = np.dtype(np.uint8) if maxval < 256 else np.dtype(">u2")
    count = width * height * channels
    if len(blob) - offset < count * sample.itemsize:
        raise CorruptImageError(
            f"{source}: pixel data truncated ({len(blob) - offset} bytes for {width}x{height}x{channels})"
        )
    raw = np.frombuffer(blob, dtype=sample, count=count, offset=offset)
    img = raw.reshape(height, width, channels).transpose(2, 0, 1).astype(np.float32)
    if maxval != 255:
        img *= np.float32(255.0 / maxval)
    return as_tensor(img)


def _load_png(path: Path) -> Tensor:
    import cv2

    img = cv2.imread(str(path), cv2.IMREAD_UNCHANGED)
    if img is None:
        raise CorruptImageError(f"{path}: could not decode PNG data")
    if img.dtype == np.uint16:
        img = img.astype(np.float32) * np.float32(255.0 / 65535.0)
    if img.ndim == 2:
        return as_tensor(img[None].astype(np.float32))
    if img.shape[2] == 4:
        img = img[:, :, :3]
    return as_tensor(img[:, :, ::-1].transpose(2, 0, 1).astype(np.float32))


def load_image(path: str | Path) -> Tensor:
    """
    Decode an image file into a (C, H, W) float32 tensor with values 0-255.

    Raises:
        ImageNotFoundError: the file does not exist.
        UnsupportedFormatError: neither Netpbm P5/P6 nor PNG.
        CorruptImageError: empty, truncated or malformed data.
    """
    path = Path(path)
    if not path.is_file():
        raise ImageNotFoundError(f"image not found: {path}")
    blob = path.read_bytes()
    if not blob:
        raise CorruptImageError(f"{path}: file is empty")
    if blob.startswith(b"\x89PNG"):
        return _load_png(path)
    if blob[:1] == b"P":
        return decode_netpbm(blob, source=str(path))
    raise UnsupportedFormatError(f"{path}: unrecognized image format")


def to_uint8(img: Tensor) -> np.ndarray:
    """Clamp to [0, 255] and round half to even."""
    return np.rint(np.clip(np.asarray(img, dtype=np.float64), 0.0, 255.0)).astype(np.uint8)


def encode_netpbm(img: Tensor) -> bytes:
    img = as_tensor(img)
    channels, height, width = img.shape
    if channels == 1:
        magic = b"P5"
    elif channels == 3:
        magic = b"P6"
    else:
        raise DimensionError(f"Netpbm output needs 1 or 3 channels, got shape {img.shape}")
    pixels = to_uint8(img).transpose(1, 2, 0)
    header = magic + b"\n" + f"{width} {height}\n255\n".encode("ascii")
    return header + pixels.tobytes(order="C")


def save_image(img: Tensor, path: str | Path) -> Path:
    """Write PGM/PPM (by channel count) or PNG (by suffix)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if path.suffix.lower() == ".png":
        import cv2

        img = as_tensor(img)
        pixels = to_uint8(img).transpose(1, 2, 0)
        if pixels.shape[2] == 3:
            pixels = pixels[:, :, ::-1]
        if not cv2.imwrite(str(path), np.ascontiguousarray(pixels)):
            raise OSError(f"could not write {path}")
    else:
        path.write_bytes(encode_netpbm(img))
    logger.debug("Image written: %s", path)
    return path
