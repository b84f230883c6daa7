"""Pointmap calibration: snap points onto their pixel rays.

A generated pointmap rarely puts each point exactly on the ray through
its pixel. Calibration transforms each point to the camera frame, keeps
its z, and replaces x and y with the values the pixel ray dictates at
that z, so downstream splats are pixel-aligned by construction. Points
that land at or behind the camera plane cannot be aligned and have their
pixels marked invalid.
"""

from __future__ import annotations

import numpy as np

from ..geometry import CameraIntrinsics, CameraPose, Pointmap, pixel_directions

__all__ = ["calibrate_pointmap", "camera_depths"]


def camera_depths(pointmap: Pointmap, pose: CameraPose) -> np.ndarray:
    """Camera-frame z per pixel, shape (H, W)."""
    return pose.inverse_transform(pointmap.points)[..., 2]


def calibrate_pointmap(
    pointmap: Pointmap, intrinsics: CameraIntrinsics, pose: CameraPose
) -> Pointmap:
    """Return a pointmap whose every valid point lies on its pixel's ray.

    Camera-frame depth is preserved exactly; the operation is idempotent.
    """
    if (pointmap.height, pointmap.width) != (intrinsics.height, intrinsics.width):
        raise ValueError("pointmap and camera dimensions do not match")
    cam = pose.inverse_transform(pointmap.points)
    z = cam[..., 2]
    in_front = z > 0
    snapped_cam = pixel_directions(intrinsics) * z[..., None]
    snapped = pose.transform(snapped_cam)
    valid = pointmap.valid & in_front
    # behind-camera pixels keep a finite placeholder under the invalid mask
    safe = np.where(valid[..., None], snapped, 0.0)
    return Pointmap(safe, valid)
