"""Regenerate the shared decoder fixture (tests/fixtures/golden.*).

Builds a deterministic 700-Gaussian scene (three chunks, the last one
partial), encodes it with the reference writer, and dumps the reference
decoder's output at full float64 precision. The viewer's decoder tests
compare against these values within float32 rounding.

Run from the repository root with the package installed:

    python frontend/tools/make_golden.py
"""

import json
import struct
from pathlib import Path

import numpy as np

from splatforge.assets import decode_splat, encode_splat
from splatforge.splats import GaussianScene

N = 700
OUT = Path(__file__).resolve().parent.parent / "tests" / "fixtures"


def build_scene() -> GaussianScene:
    rng = np.random.default_rng(123)
    means = np.column_stack(
        [
            rng.uniform(-2.0, 2.0, N),
            rng.uniform(-2.0, 2.0, N),
            rng.uniform(0.2, 3.0, N),
        ]
    )
    scales = np.exp(rng.uniform(np.log(0.005), np.log(0.3), (N, 3)))
    quats = rng.normal(size=(N, 4))
    quats /= np.linalg.norm(quats, axis=1, keepdims=True)
    colors = rng.uniform(0.0, 1.0, (N, 3))
    opacities = rng.uniform(0.0, 1.0, N)

    # Pin edge cases: exact 1.0 / 0.0 opacities, identity and axis rotations.
    opacities[0] = 1.0
    opacities[1] = 0.0
    quats[0] = (1.0, 0.0, 0.0, 0.0)
    quats[1] = (0.0, 1.0, 0.0, 0.0)
    return GaussianScene(
        means=means,
        opacities=opacities,
        scales=scales,
        rotations=quats,
        colors=colors,
    )


def chunk_bounds(data: bytes) -> list[dict]:
    """Chunk counts and f64 bounds straight from the byte stream."""

    _, _, total, chunk_count = struct.unpack_from("<8sIII", data, 0)
    offset = 20
    chunks = []
    for _ in range(chunk_count):
        (count,) = struct.unpack_from("<I", data, offset)
        bounds = np.frombuffer(data, dtype="<f8", count=12, offset=offset + 4)
        chunks.append(
            {
                "count": count,
                "pos_lo": bounds[0:3].tolist(),
                "pos_hi": bounds[3:6].tolist(),
                "log_lo": bounds[6:9].tolist(),
                "log_hi": bounds[9:12].tolist(),
            }
        )
        offset += 4 + 96 + count * 17
    assert offset == len(data) and sum(c["count"] for c in chunks) == total
    return chunks


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    data = encode_splat(build_scene())
    (OUT / "golden.splat").write_bytes(data)

    decoded = decode_splat(data)
    golden = {
        "count": len(decoded),
        "chunks": chunk_bounds(data),
        "positions": decoded.means.ravel().tolist(),
        "scales": decoded.scales.ravel().tolist(),
        "colors": decoded.colors.ravel().tolist(),
        "opacities": decoded.opacities.tolist(),
        "rotations": decoded.rotations.ravel().tolist(),
    }
    (OUT / "golden.json").write_text(json.dumps(golden) + "\n")
    print(f"wrote {OUT / 'golden.splat'} ({len(data)} bytes) and golden.json")


if __name__ == "__main__":
    main()
