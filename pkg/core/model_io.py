"""
Binary model container.

Layout (all integers little-endian):

    offset  size  field
    0       4     magic b"SKNT"
    4       4     uint32 format version (currently 1)
    8       1     uint8 dtype code (1 = float32, 2 = float64)
    9       4     uint32 in_channels
    13      4     uint32 layer count L
    17      9*L   per layer: uint32 kernel_size, uint32 out_channels,
                  uint8 activation (0 = none, 1 = relu)
    ...           per layer: weights (K*C*k*k values, row-major K,C,kh,kw)
                  followed by bias (K values), little-endian IEEE floats
    end-4   4     uint32 CRC-32 of every preceding byte

Parameters are written raw, so a save/load round trip is bit-exact.
"""

from __future__ import annotations

import logging
import struct
import zlib
from pathlib import Path

import numpy as np
from pydantic import ValidationError

from core.config import MODEL_FORMAT_VERSION, MODEL_MAGIC
from core.errors import ModelLoadError, ModelVersionError
from core.network import LayerSpec, Network, NetworkSpec, layer_shapes
from core.tensor import ConvParams

logger = logging.getLogger(__name__)

_HEADER = struct.Struct("<4sIBII")
_LAYER = struct.Struct("<IIB")
_CRC = struct.Struct("<I")

_DTYPE_CODES = {np.dtype(np.float32): 1, np.dtype(np.float64): 2}
_CODE_DTYPES = {code: dtype.newbyteorder("<") for dtype, code in _DTYPE_CODES.items()}
_ACTIVATION_CODES = {"none": 0, "relu": 1}
_CODE_ACTIVATIONS = {code: name for name, code in _ACTIVATION_CODES.items()}


def model_to_bytes(net: Network) -> bytes:
    dtype = np.dtype(net.dtype)
    if dtype not in _DTYPE_CODES:
        raise ModelLoadError(f"cannot serialize parameters of dtype {dtype}")
    wire = dtype.newbyteorder("<")
    parts = [
        _HEADER.pack(MODEL_MAGIC, MODEL_FORMAT_VERSION, _DTYPE_CODES[dtype],
                     net.spec.in_channels, len(net.spec.layers))
    ]
    for layer in net.spec.layers:
        parts.append(_LAYER.pack(layer.kernel_size, layer.out_channels,
                                 _ACTIVATION_CODES[layer.activation]))
    for p in net.params:
        parts.append(p.weights.astype(wire).tobytes(order="C"))
        parts.append(p.bias.astype(wire).tobytes(order="C"))
    body = b"".join(parts)
    return body + _CRC.pack(zlib.crc32(body))


def model_from_bytes(blob: bytes, source: str = "<bytes>") -> Network:
    if len(blob) < _HEADER.size + _CRC.size:
        raise ModelLoadError(f"{source}: file is truncated ({len(blob)} bytes)")
    magic, version, dtype_code, in_channels, n_layers = _HEADER.unpack_from(blob, 0)
    if magic != MODEL_MAGIC:
        raise ModelLoadError(f"{source}: not a sketchnet model (magic {magic!r})")
    if version != MODEL_FORMAT_VERSION:
        raise ModelVersionError(
            f"{source}: format version {version} is not supported "
            f"(this build reads version {MODEL_FORMAT_VERSION})"
        )
    body, (crc,) = blob[:-_CRC.size], _CRC.unpack_from(blob, len(blob) - _CRC.size)
    if zlib.crc32(body) != crc:
        raise ModelLoadError(f"{source}: checksum mismatch, file is truncated or corrupt")
    if dtype_code not in _CODE_DTYPES:
        raise ModelLoadError(f"{source}: unknown dtype code {dtype_code}")
    wire = _CODE_DTYPES[dtype_code]

    offset = _HEADER.size
    layers = []
    try:
        for _ in range(n_layers):
            kernel, width, act = _LAYER.unpack_from(body, offset)
            offset += _LAYER.size
            layers.append(LayerSpec(kernel_size=kernel, out_channels=width,
                                    activation=_CODE_ACTIVATIONS[act]))
        spec = NetworkSpec(in_channels=in_channels, layers=tuple(layers))
    except (struct.error, KeyError, ValidationError) as exc:
        raise ModelLoadError(f"{source}: invalid spec block: {exc}") from exc

    params = []
    for w_shape, b_shape in layer_shapes(spec):
        arrays = []
        for shape in (w_shape, b_shape):
            count = int(np.prod(shape))
            nbytes = count * wire.itemsize
            if offset + nbytes > len(body):
                raise ModelLoadError(f"{source}: parameter block is truncated")
            arr = np.frombuffer(body, dtype=wire, count=count, offset=offset)
            arrays.append(arr.reshape(shape).astype(wire.newbyteorder("=")))
            offset += nbytes
        params.append(ConvParams(*arrays))
    if offset != len(body):
        raise ModelLoadError(f"{source}: {len(body) - offset} unexpected trailing bytes")
    return Network(spec, tuple(params))


def save_model(net: Network, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(model_to_bytes(net))
    logger.info("Model written: %s", path)
    return path


def load_model(path: str | Path) -> Network:
    path = Path(path)
    try:
        blob = path.read_bytes()
    except OSError as exc:
        raise ModelLoadError(f"cannot read model file {path}: {exc}") from exc
    net = model_from_bytes(blob, source=str(path))
    logger.info("Model loaded: %s (%d layers)", path, len(net.spec.layers))
    return net
