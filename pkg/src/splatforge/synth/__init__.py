"""Synthetic scene generation and camera path sampling."""

from .paths import (
    DEFAULT_NUM_VIEWS,
    DEFAULT_UP,
    PATH_KINDS,
    CameraPath,
    sample_camera_path,
)
from .scenes import SCENE_CENTER, default_camera, generate_scene

__all__ = [
    "DEFAULT_NUM_VIEWS",
    "DEFAULT_UP",
    "PATH_KINDS",
    "SCENE_CENTER",
    "CameraPath",
    "default_camera",
    "generate_scene",
    "sample_camera_path",
]
