"""Analytic Gaussian head: images + calibrated pointmaps -> Splatter Images.

Stands in for a learned opacity/shape predictor with a closed-form rule
that honors the same output contract: sigmoid-activated opacity,
exponential scale multiplied by the camera-frame z distance, and a
rotation frame aligned with the pixel ray.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..geometry import CameraIntrinsics, CameraPose, Pointmap, pixel_directions
from .gaussians import SplatterImage

__all__ = ["HeadParams", "analytic_gaussian_head"]


@dataclass(frozen=True)
class HeadParams:
    """Knobs of the analytic head.

    opacity_logit: shared opacity before the sigmoid (6.0 ~ 0.9975).
    log_scale: log factor on the z-scaled pixel footprint.
    """

    opacity_logit: float = 6.0
    log_scale: float = 0.0


def _sigmoid(x: float) -> float:
    return 1.0 / (1.0 + np.exp(-x)) if x >= 0 else float(np.exp(x) / (1.0 + np.exp(x)))


def _ray_frames(dirs_cam: np.ndarray, rotation: np.ndarray) -> np.ndarray:
    """Unit quaternions (H, W, 4) wxyz aligning each splat's third axis
    with its world-frame pixel ray."""
    z_axis = dirs_cam / np.linalg.norm(dirs_cam, axis=-1, keepdims=True)
    z_axis = z_axis @ rotation.T
    # pixel rays always have |y| < 1 in the camera frame, so the camera's
    # up axis is a safe tangent seed
    seed = rotation[:, 1]
    x_axis = np.cross(np.broadcast_to(seed, z_axis.shape), z_axis)
    x_axis /= np.linalg.norm(x_axis, axis=-1, keepdims=True)
    y_axis = np.cross(z_axis, x_axis)
    mats = np.stack([x_axis, y_axis, z_axis], axis=-1)
    return _matrix_to_quat(mats)


def _matrix_to_quat(mats: np.ndarray) -> np.ndarray:
    """Rotation matrices (..., 3, 3) to unit quaternions (..., 4) wxyz."""
    from scipy.spatial.transform import Rotation

    flat = mats.reshape(-1, 3, 3)
    q = Rotation.from_matrix(flat).as_quat(canonical=True, scalar_first=True)
    return q.reshape(mats.shape[:-2] + (4,))


def analytic_gaussian_head(
    images: list[np.ndarray],
    pointmaps: list[Pointmap],
    cameras: list[tuple[CameraIntrinsics, CameraPose]],
    params: HeadParams = HeadParams(),
) -> list[SplatterImage]:
    """Emit one Splatter Image per view from colors and calibrated points.

    Per valid pixel: mean = the calibrated point, color = the image pixel,
    opacity = sigmoid(opacity_logit), scale = exp(log_scale) * z_cam *
    (1/fx, 1/fy, 1/sqrt(fx*fy)) in the ray-aligned frame.

    Pointmaps must already be calibrated; pixels whose camera-frame z is
    not positive produce no Gaussian.
    """
    if not (len(images) == len(pointmaps) == len(cameras)):
        raise ValueError("images, pointmaps, and cameras must have equal length")
    out = []
    opacity = _sigmoid(params.opacity_logit)
    factor = float(np.exp(params.log_scale))
    for image, pm, (intr, pose) in zip(images, pointmaps, cameras):
        image = np.asarray(image, dtype=np.float64)
        if image.shape != (intr.height, intr.width, 3):
            raise ValueError(f"image shape {image.shape} does not match camera")
        if (pm.height, pm.width) != (intr.height, intr.width):
            raise ValueError("pointmap does not match camera")
        z = pose.inverse_transform(pm.points)[..., 2]
        valid = pm.valid & (z > 0)
        footprint = np.array([
            1.0 / intr.fx, 1.0 / intr.fy, 1.0 / np.sqrt(intr.fx * intr.fy),
        ])
        safe_z = np.where(valid, z, 1.0)
        scales = factor * safe_z[..., None] * footprint
        rotations = _ray_frames(pixel_directions(intr), pose.rotation)
        out.append(
            SplatterImage(
                means=pm.points,
                opacities=np.full(valid.shape, opacity),
                scales=scales,
                rotations=rotations,
                colors=np.clip(image, 0.0, 1.0),
                valid=valid,
                intrinsics=intr,
                pose=pose,
            )
        )
    return out
