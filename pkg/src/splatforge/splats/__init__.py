"""Splatter Images: calibration, the analytic head, and scene assembly."""

from .calibrate import calibrate_pointmap, camera_depths
from .gaussians import (
    Gaussian3D,
    GaussianScene,
    SplatterImage,
    cull_transparent,
    merge_splatter_images,
    quat_to_matrix,
)
from .head import HeadParams, analytic_gaussian_head

__all__ = [
    "Gaussian3D",
    "GaussianScene",
    "HeadParams",
    "SplatterImage",
    "analytic_gaussian_head",
    "calibrate_pointmap",
    "camera_depths",
    "cull_transparent",
    "merge_splatter_images",
    "quat_to_matrix",
]
