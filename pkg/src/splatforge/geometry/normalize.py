"""Scene normalization: relativization, scale fixing, and coordinate squashing.

A raw multi-view scene carries an arbitrary rigid frame and an arbitrary
global scale. Normalization makes scenes comparable: express everything
relative to the first camera, then rescale so the mean depth seen from
that camera is 1. The sigmoid contraction and the max-coordinate scaling
are alternative encodings kept behind the same interface.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .camera import CameraPose
from .pointmap import Pointmap

__all__ = [
    "SceneNormalization",
    "relativize_scene",
    "scale_mean_depth",
    "scale_max_xyz",
    "normalize_scene",
    "denormalize_scene",
    "contract",
    "uncontract",
    "rec_weight",
]


@dataclass(frozen=True)
class SceneNormalization:
    """Record of a normalization: scene scale and the removed first camera."""

    scale: float
    reference: CameraPose

    def __post_init__(self) -> None:
        if not self.scale > 0:
            raise ValueError("normalization scale must be positive")


def relativize_scene(
    poses: list[CameraPose], pointmaps: list[Pointmap]
) -> tuple[list[CameraPose], list[Pointmap], SceneNormalization]:
    """Re-express all poses and points in the frame of the first camera.

    The first returned pose is the identity; every pose and point is
    transformed by the inverse of the original first pose, which is
    recorded (with scale 1) in the returned normalization.
    """
    if len(poses) == 0:
        raise ValueError("relativize_scene needs at least one pose")
    if len(pointmaps) != len(poses):
        raise ValueError("pointmaps must align with poses")
    ref = poses[0]
    inv = ref.inverse()
    new_poses = [inv.compose(p) for p in poses]
    new_pointmaps = [pm.with_points(inv.transform(pm.points)) for pm in pointmaps]
    return new_poses, new_pointmaps, SceneNormalization(1.0, ref)


def scale_mean_depth(
    poses: list[CameraPose], pointmaps: list[Pointmap]
) -> tuple[list[CameraPose], list[Pointmap], SceneNormalization]:
    """Rescale a relativized scene so mean first-view depth is 1.

    Depth of a first-view pixel is the z coordinate of its point in the
    first camera frame; the scene must already be relativized so that the
    first pose is the identity. Invalid pixels are excluded from the mean.
    """
    if len(poses) == 0:
        raise ValueError("scale_mean_depth needs at least one view")
    first = pointmaps[0]
    if not first.valid.any():
        raise ValueError("first-view pointmap has no valid pixels")
    depths = first.valid_points()[:, 2]
    mean_depth = float(depths.mean())
    if mean_depth <= 0:
        raise ValueError(f"mean first-view depth must be positive, got {mean_depth:.6g}")
    alpha = 1.0 / mean_depth
    new_poses = [p.scaled(alpha) for p in poses]
    new_pointmaps = [pm.with_points(pm.points * alpha) for pm in pointmaps]
    return new_poses, new_pointmaps, SceneNormalization(alpha, CameraPose.identity())


def scale_max_xyz(pointmaps: list[Pointmap]) -> tuple[list[Pointmap], float]:
    """Rescale so the largest absolute coordinate over valid points is 1."""
    if len(pointmaps) == 0:
        raise ValueError("scale_max_xyz needs at least one pointmap")
    max_abs = 0.0
    any_valid = False
    for pm in pointmaps:
        pts = pm.valid_points()
        if pts.size:
            any_valid = True
            max_abs = max(max_abs, float(np.abs(pts).max()))
    if not any_valid:
        raise ValueError("no valid points")
    if max_abs == 0.0:
        raise ValueError("all-zero pointmap: scale undefined")
    alpha = 1.0 / max_abs
    return [pm.with_points(pm.points * alpha) for pm in pointmaps], alpha


def normalize_scene(
    poses: list[CameraPose], pointmaps: list[Pointmap]
) -> tuple[list[CameraPose], list[Pointmap], SceneNormalization]:
    """Relativize then fix the scale by mean first-view depth.

    Returns a single normalization carrying both the removed first camera
    and the applied scale, suitable for :func:`denormalize_scene`.
    """
    poses, pointmaps, rel = relativize_scene(poses, pointmaps)
    poses, pointmaps, scl = scale_mean_depth(poses, pointmaps)
    return poses, pointmaps, SceneNormalization(scl.scale, rel.reference)


def denormalize_scene(
    poses: list[CameraPose],
    pointmaps: list[Pointmap],
    normalization: SceneNormalization,
) -> tuple[list[CameraPose], list[Pointmap]]:
    """Invert :func:`normalize_scene`: undo the scale, re-apply the reference."""
    inv_scale = 1.0 / normalization.scale
    ref = normalization.reference
    out_poses = [ref.compose(p.scaled(inv_scale)) for p in poses]
    out_pointmaps = [
        pm.with_points(ref.transform(pm.points * inv_scale)) for pm in pointmaps
    ]
    return out_poses, out_pointmaps


def contract(values: np.ndarray) -> np.ndarray:
    """Elementwise sigmoid squashing of coordinates into (0, 1).

    Round-trips with :func:`uncontract` to ~1e-6 for |x| <= 10; beyond
    roughly |x| = 18 the sigmoid saturates in float64 and the inverse
    degrades, so callers should contract normalized coordinates only.
    """
    values = np.asarray(values, dtype=np.float64)
    out = np.empty_like(values)
    pos = values >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-values[pos]))
    ev = np.exp(values[~pos])
    out[~pos] = ev / (1.0 + ev)
    return out


def uncontract(values: np.ndarray) -> np.ndarray:
    """Inverse of :func:`contract` (the logit); input must lie in (0, 1)."""
    values = np.asarray(values, dtype=np.float64)
    if np.any(values <= 0.0) or np.any(values >= 1.0):
        raise ValueError("uncontract input must lie strictly in (0, 1)")
    return np.log(values) - np.log1p(-values)


def rec_weight(point_camera_local: np.ndarray) -> np.ndarray:
    """Confidence weight for a camera-local point, in (0, 1].

    With d the distance from the point to the local scene center (0, 0, 1)
    and w = max(1, d^2), the weight is (2*sqrt(w) - 1) / w: 1 inside the
    unit ball around the center, decaying like 2/d outside. This is the
    Jacobian magnitude of the contraction used for unbounded scenes, so
    squared errors weighted by it correspond to errors in contracted
    coordinates.

    Accepts a single 3-vector or an (..., 3) array.
    """
    pts = np.asarray(point_camera_local, dtype=np.float64)
    center = np.array([0.0, 0.0, 1.0])
    d2 = np.sum((pts - center) ** 2, axis=-1)
    w = np.maximum(1.0, d2)
    return (2.0 * np.sqrt(w) - 1.0) / w
