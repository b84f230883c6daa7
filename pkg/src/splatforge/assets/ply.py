"""Lossless float32 PLY export of Gaussian scenes for external splat tools.

One vertex per Gaussian with properties (in order): x y z, scale_0..2,
rot_0..3 (w, x, y, z), opacity, red green blue. ASCII header, little-endian
binary payload.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from ..splats.gaussians import GaussianScene

PLY_PROPERTIES = (
    "x",
    "y",
    "z",
    "scale_0",
    "scale_1",
    "scale_2",
    "rot_0",
    "rot_1",
    "rot_2",
    "rot_3",
    "opacity",
    "red",
    "green",
    "blue",
)

_END_HEADER = b"end_header\n"


def _header(count: int) -> bytes:
    lines = ["ply", "format binary_little_endian 1.0", f"element vertex {count}"]
    lines += [f"property float {name}" for name in PLY_PROPERTIES]
    lines.append("end_header")
    return ("\n".join(lines) + "\n").encode("ascii")


def export_ply(scene: GaussianScene, path: str | Path) -> None:
    """Writes the scene as a binary little-endian PLY file."""

    if len(scene) == 0:
        raise ValueError("cannot export an empty scene")
    table = np.concatenate(
        [
            scene.means,
            scene.scales,
            scene.rotations,
            scene.opacities[:, None],
            scene.colors,
        ],
        axis=1,
    ).astype("<f4")
    Path(path).write_bytes(_header(len(scene)) + table.tobytes())


def import_ply(path: str | Path) -> GaussianScene:
    """Reads a PLY file written by export_ply.

    Values come back at float32 precision; quaternions are renormalized in
    float64 so the scene's unit-norm invariant holds exactly.
    """

    data = Path(path).read_bytes()
    end = data.find(_END_HEADER)
    if not data.startswith(b"ply\n") or end < 0:
        raise ValueError("not a PLY file: missing header")
    header_lines = data[:end].decode("ascii", errors="replace").splitlines()
    if "format binary_little_endian 1.0" not in header_lines[1:]:
        raise ValueError("unsupported PLY format; need binary_little_endian 1.0")

    count = None
    properties = []
    for line in header_lines:
        if line.startswith("element vertex "):
            count = int(line.split()[-1])
        elif line.startswith("element "):
            raise ValueError(f"unsupported PLY element: {line!r}")
        elif line.startswith("property "):
            kind, name = line.split()[1:]
            if kind != "float":
                raise ValueError(f"unsupported property type {kind!r}")
            properties.append(name)
    if count is None:
        raise ValueError("PLY header lacks an element vertex line")
    if tuple(properties) != PLY_PROPERTIES:
        raise ValueError(
            f"unexpected PLY properties {properties}; need {list(PLY_PROPERTIES)}"
        )

    payload = data[end + len(_END_HEADER) :]
    expected = count * len(PLY_PROPERTIES) * 4
    if len(payload) != expected:
        raise ValueError(
            f"PLY payload is {len(payload)} bytes, header implies {expected}"
        )
    table = np.frombuffer(payload, dtype="<f4").reshape(count, 14).astype(np.float64)
    quats = table[:, 6:10]
    quats = quats / np.linalg.norm(quats, axis=1, keepdims=True)
    return GaussianScene(
        means=table[:, 0:3],
        scales=table[:, 3:6],
        rotations=quats,
        opacities=table[:, 10],
        colors=table[:, 11:14],
    )
