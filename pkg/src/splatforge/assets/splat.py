"""Chunk-quantized splat asset format (.splat).

Layout (all little-endian):

    header:  magic 8s = b"SPLATCHK", version u32 = 1,
             gaussian count u32, chunk count u32
    chunk:   count u32 (1..256),
             position min/max 6 f64 (xyz min, xyz max),
             log-scale min/max 6 f64,
             positions count*3 u16, log-scales count*3 u8,
             colors count*3 u8, opacities count u8,
             rotations count*4 u8

Positions quantize per chunk against exact f64 bounds; dequantization uses
the convex form min*(1-u) + max*u so both endpoints reproduce bit-exactly,
which makes write-read-write byte stable. Log-scale bounds are snapped
outward to a 2^-20 grid so the ulp-level drift of log(exp(x)) cannot move
them between round trips. Colors and opacities use a fixed [0, 1] lattice.

Rotations store the index of the largest-magnitude quaternion component
plus the other three components on a symmetric 254-step lattice over
[-1/sqrt(2), 1/sqrt(2)]; the dropped component is recovered from unit norm.
The encoder nudges lattice values down when quantization noise would let a
stored component overtake the recovered one, so the index choice is stable
across round trips.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from ..splats.gaussians import GaussianScene

MAGIC = b"SPLATCHK"
VERSION = 1
CHUNK_SIZE = 256

_HEADER = struct.Struct("<8sIII")
_CHUNK_HEAD = struct.Struct("<I")
_BOUNDS_DTYPE = np.dtype("<f8")
_POS_DTYPE = np.dtype("<u2")

_ROT_HALF_RANGE = 1.0 / np.sqrt(2.0)
# Log-scale bounds snap to this grid; the tolerance absorbs log/exp noise.
_LOG_GRID = 2.0**-20
_GRID_TOL = 1e-12

PER_GAUSSIAN_BYTES = 3 * 2 + 3 + 3 + 1 + 4
CHUNK_HEADER_BYTES = _CHUNK_HEAD.size + 2 * _BOUNDS_DTYPE.itemsize * 6


def _quantize_unit(values: np.ndarray) -> np.ndarray:
    """[0, 1] values to u8 on the 255-step lattice."""

    return np.round(np.clip(values, 0.0, 1.0) * 255.0).astype(np.uint8)


def _quantize_bounded(
    values: np.ndarray, lo: np.ndarray, hi: np.ndarray, levels: int
) -> np.ndarray:
    extent = hi - lo
    safe = np.where(extent > 0.0, extent, 1.0)
    ratio = np.where(extent > 0.0, (values - lo) / safe, 0.0)
    return np.round(np.clip(ratio, 0.0, 1.0) * levels)


def _dequantize_bounded(
    quantized: np.ndarray, lo: np.ndarray, hi: np.ndarray, levels: int
) -> np.ndarray:
    u = quantized.astype(np.float64) / levels
    return lo * (1.0 - u) + hi * u


def _snap_grid_bounds(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-axis bounds snapped outward to the log-scale grid."""

    lo = np.floor((values.min(axis=0) + _GRID_TOL) / _LOG_GRID) * _LOG_GRID
    hi = np.ceil((values.max(axis=0) - _GRID_TOL) / _LOG_GRID) * _LOG_GRID
    return lo, hi


def _encode_rotations(quats: np.ndarray) -> np.ndarray:
    """(N, 4) unit quaternions to (N, 4) u8: index byte + 3 lattice bytes."""

    n = quats.shape[0]
    idx = np.argmax(np.abs(quats), axis=1)
    signs = np.sign(quats[np.arange(n), idx])
    canon = quats * signs[:, None]

    keep = np.ones((n, 4), dtype=bool)
    keep[np.arange(n), idx] = False
    others = canon[keep].reshape(n, 3)
    lattice = np.round(others / _ROT_HALF_RANGE * 127.0).astype(np.int64)
    lattice = np.clip(lattice, -127, 127)

    # If quantization noise makes a stored component outgrow the recovered
    # largest component, shrink the offender one lattice step at a time so
    # the index byte survives a round trip.
    while True:
        values = lattice / 127.0 * _ROT_HALF_RANGE
        largest = np.sqrt(np.maximum(0.0, 1.0 - (values**2).sum(axis=1)))
        bad = np.abs(values).max(axis=1) >= largest
        if not bad.any():
            break
        rows = np.nonzero(bad)[0]
        offender = np.abs(lattice[rows]).argmax(axis=1)
        lattice[rows, offender] -= np.sign(lattice[rows, offender]).astype(np.int64)

    out = np.empty((n, 4), dtype=np.uint8)
    out[:, 0] = idx
    out[:, 1:] = (lattice + 127).astype(np.uint8)
    return out


def _decode_rotations(codes: np.ndarray) -> np.ndarray:
    """Inverse of _encode_rotations; result is unit to ~1e-15."""

    n = codes.shape[0]
    idx = codes[:, 0].astype(np.int64)
    if (idx > 3).any():
        raise ValueError("corrupt rotation: component index out of range")
    values = (codes[:, 1:].astype(np.float64) - 127.0) / 127.0 * _ROT_HALF_RANGE
    largest = np.sqrt(np.maximum(0.0, 1.0 - (values**2).sum(axis=1)))
    quats = np.empty((n, 4))
    keep = np.ones((n, 4), dtype=bool)
    keep[np.arange(n), idx] = False
    quats[np.arange(n), idx] = largest
    quats[keep] = values.ravel()
    return quats


def encode_splat(scene: GaussianScene) -> bytes:
    """Serializes a non-empty scene to the chunked byte format."""

    n = len(scene)
    if n == 0:
        raise ValueError("cannot export an empty scene; cull first, then check")
    chunk_count = -(-n // CHUNK_SIZE)
    parts = [_HEADER.pack(MAGIC, VERSION, n, chunk_count)]
    for start in range(0, n, CHUNK_SIZE):
        stop = min(start + CHUNK_SIZE, n)
        parts.append(_encode_chunk(scene, start, stop))
    return b"".join(parts)


def _encode_chunk(scene: GaussianScene, start: int, stop: int) -> bytes:
    means = scene.means[start:stop]
    logs = np.log(scene.scales[start:stop])

    pos_lo = means.min(axis=0)
    pos_hi = means.max(axis=0)
    log_lo, log_hi = _snap_grid_bounds(logs)
    if not (
        np.isfinite(pos_lo).all()
        and np.isfinite(pos_hi).all()
        and np.isfinite(log_lo).all()
        and np.isfinite(log_hi).all()
    ):
        raise ValueError("non-finite chunk bounds")

    q_pos = _quantize_bounded(means, pos_lo, pos_hi, 65535).astype(np.uint16)
    q_log = _quantize_bounded(logs, log_lo, log_hi, 255).astype(np.uint8)
    q_col = _quantize_unit(scene.colors[start:stop])
    q_opa = _quantize_unit(scene.opacities[start:stop])
    q_rot = _encode_rotations(scene.rotations[start:stop])

    return b"".join(
        [
            _CHUNK_HEAD.pack(stop - start),
            np.concatenate([pos_lo, pos_hi]).astype(_BOUNDS_DTYPE).tobytes(),
            np.concatenate([log_lo, log_hi]).astype(_BOUNDS_DTYPE).tobytes(),
            q_pos.astype(_POS_DTYPE).tobytes(),
            q_log.tobytes(),
            q_col.tobytes(),
            q_opa.tobytes(),
            q_rot.tobytes(),
        ]
    )


def decode_splat(data: bytes) -> GaussianScene:
    """Parses the chunked byte format back into a GaussianScene."""

    if len(data) < _HEADER.size:
        raise ValueError("truncated splat file: missing header")
    magic, version, total, chunk_count = _HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise ValueError(f"bad magic {magic!r}; not a splat file")
    if version != VERSION:
        raise ValueError(f"unrecognized splat version {version}")
    expected_chunks = -(-total // CHUNK_SIZE)
    if total < 1 or chunk_count != expected_chunks:
        raise ValueError(
            f"header count mismatch: {total} gaussians need {expected_chunks} "
            f"chunks, header says {chunk_count}"
        )

    offset = _HEADER.size
    means, logs, colors, opacities, quats = [], [], [], [], []
    for _ in range(chunk_count):
        offset = _decode_chunk(data, offset, means, logs, colors, opacities, quats)
    if offset != len(data):
        raise ValueError(f"{len(data) - offset} trailing bytes after last chunk")

    means = np.concatenate(means)
    if means.shape[0] != total:
        raise ValueError(
            f"chunk counts sum to {means.shape[0]}, header declares {total}"
        )
    return GaussianScene(
        means=means,
        opacities=np.concatenate(opacities),
        scales=np.exp(np.concatenate(logs)),
        rotations=np.concatenate(quats),
        colors=np.concatenate(colors),
    )


def _decode_chunk(data, offset, means, logs, colors, opacities, quats) -> int:
    def take(nbytes: int, what: str) -> bytes:
        nonlocal offset
        if offset + nbytes > len(data):
            raise ValueError(f"truncated splat file: {what} cut short")
        piece = data[offset : offset + nbytes]
        offset += nbytes
        return piece

    (count,) = _CHUNK_HEAD.unpack(take(_CHUNK_HEAD.size, "chunk header"))
    if not 1 <= count <= CHUNK_SIZE:
        raise ValueError(f"chunk count {count} outside [1, {CHUNK_SIZE}]")
    bounds = np.frombuffer(take(96, "chunk bounds"), dtype=_BOUNDS_DTYPE)
    pos_lo, pos_hi = bounds[0:3], bounds[3:6]
    log_lo, log_hi = bounds[6:9], bounds[9:12]
    if not np.isfinite(bounds).all():
        raise ValueError("non-finite chunk bounds")
    if (pos_hi < pos_lo).any() or (log_hi < log_lo).any():
        raise ValueError("inverted chunk bounds")

    q_pos = np.frombuffer(take(count * 6, "positions"), dtype=_POS_DTYPE)
    q_log = np.frombuffer(take(count * 3, "log-scales"), dtype=np.uint8)
    q_col = np.frombuffer(take(count * 3, "colors"), dtype=np.uint8)
    q_opa = np.frombuffer(take(count, "opacities"), dtype=np.uint8)
    q_rot = np.frombuffer(take(count * 4, "rotations"), dtype=np.uint8)

    means.append(
        _dequantize_bounded(q_pos.reshape(count, 3), pos_lo, pos_hi, 65535)
    )
    logs.append(_dequantize_bounded(q_log.reshape(count, 3), log_lo, log_hi, 255))
    colors.append(q_col.reshape(count, 3).astype(np.float64) / 255.0)
    opacities.append(q_opa.astype(np.float64) / 255.0)
    quats.append(_decode_rotations(q_rot.reshape(count, 4)))
    return offset


def export_splat(scene: GaussianScene, path: str | Path) -> None:
    """Writes the scene to ``path`` in the chunked splat format."""

    Path(path).write_bytes(encode_splat(scene))


def import_splat(path: str | Path) -> GaussianScene:
    """Reads a chunked splat file written by export_splat."""

    return decode_splat(Path(path).read_bytes())
