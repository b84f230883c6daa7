"""Cameras, rays, pointmaps, and scene normalization."""

from .camera import (
    CameraIntrinsics,
    CameraPose,
    compute_raymap,
    look_at_pose,
    pixel_directions,
    pixel_grid,
    project_point,
    project_points,
    unproject_depth,
)
from .normalize import (
    SceneNormalization,
    contract,
    denormalize_scene,
    normalize_scene,
    rec_weight,
    relativize_scene,
    scale_max_xyz,
    scale_mean_depth,
    uncontract,
)
from .pointmap import Pointmap, Raymap

__all__ = [
    "CameraIntrinsics",
    "CameraPose",
    "Pointmap",
    "Raymap",
    "SceneNormalization",
    "compute_raymap",
    "contract",
    "denormalize_scene",
    "look_at_pose",
    "normalize_scene",
    "pixel_directions",
    "pixel_grid",
    "project_point",
    "project_points",
    "rec_weight",
    "relativize_scene",
    "scale_max_xyz",
    "scale_mean_depth",
    "uncontract",
    "unproject_depth",
]
