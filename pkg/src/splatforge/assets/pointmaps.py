"""Flat binary pointmap files: header, validity bitmap, float32 payload.

Layout (little-endian): magic 8s = b"SPLATPMP", version u32 = 1,
height u32, width u32, validity bitmap of ceil(H*W/8) bytes (row-major
pixels, most significant bit first within each byte), then H*W*3 float32
coordinates. Invalid pixels are stored as zeros.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from ..geometry.pointmap import Pointmap

MAGIC = b"SPLATPMP"
VERSION = 1

_HEADER = struct.Struct("<8sIII")


def encode_pointmap(pointmap: Pointmap) -> bytes:
    """Serializes a pointmap; valid coordinates must fit in float32."""

    points = np.where(pointmap.valid[..., None], pointmap.points, 0.0)
    with np.errstate(over="ignore"):
        as_f32 = points.astype("<f4")
    if not np.isfinite(as_f32).all():
        raise ValueError("coordinates overflow float32")
    bitmap = np.packbits(pointmap.valid.ravel())
    header = _HEADER.pack(MAGIC, VERSION, pointmap.height, pointmap.width)
    return header + bitmap.tobytes() + as_f32.tobytes()


def decode_pointmap(data: bytes) -> Pointmap:
    """Parses bytes written by encode_pointmap."""

    if len(data) < _HEADER.size:
        raise ValueError("truncated pointmap file: missing header")
    magic, version, height, width = _HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise ValueError(f"bad magic {magic!r}; not a pointmap file")
    if version != VERSION:
        raise ValueError(f"unrecognized pointmap version {version}")
    if height < 1 or width < 1:
        raise ValueError(f"bad pointmap size {height}x{width}")

    n_pixels = height * width
    bitmap_bytes = -(-n_pixels // 8)
    expected = _HEADER.size + bitmap_bytes + n_pixels * 12
    if len(data) < expected:
        raise ValueError(
            f"truncated pointmap file: {len(data)} bytes, need {expected}"
        )
    if len(data) > expected:
        raise ValueError(f"{len(data) - expected} trailing bytes in pointmap file")

    offset = _HEADER.size
    bitmap = np.frombuffer(data, dtype=np.uint8, count=bitmap_bytes, offset=offset)
    valid = np.unpackbits(bitmap, count=n_pixels).astype(bool).reshape(height, width)
    offset += bitmap_bytes
    points = (
        np.frombuffer(data, dtype="<f4", count=n_pixels * 3, offset=offset)
        .astype(np.float64)
        .reshape(height, width, 3)
    )
    return Pointmap(points=points, valid=valid)


def write_pointmap(path: str | Path, pointmap: Pointmap) -> None:
    Path(path).write_bytes(encode_pointmap(pointmap))


def read_pointmap(path: str | Path) -> Pointmap:
    return decode_pointmap(Path(path).read_bytes())
