"""Procedural synthetic scenes for testing reconstruction and rendering.

Scenes are built from bounded lambertian primitives (spheres and boxes)
placed inside a unit-scale working volume around the canonical scene center
(0, 0, 1). Placement works backwards from the default camera: a pixel and a
depth are drawn first and unprojected, which guarantees every primitive
center lands inside the default view frustum.
"""

from __future__ import annotations

import numpy as np

from ..geometry.camera import CameraIntrinsics, CameraPose
from ..render.raytrace import Box, Primitive, Sphere, SyntheticScene

SCENE_CENTER = np.array([0.0, 0.0, 1.0])

# Placement bounds: depth band around the scene center and a pixel margin
# keeping projected centers well inside the default image.
_DEPTH_RANGE = (0.65, 1.55)
_PIXEL_MARGIN_FRAC = 0.18
_SPHERE_RADIUS_RANGE = (0.06, 0.18)
_BOX_SIZE_RANGE = (0.1, 0.3)
_ALBEDO_RANGE = (0.25, 0.95)


def default_camera() -> tuple[CameraIntrinsics, CameraPose]:
    """The canonical viewpoint: identity pose, square 256 px, ~53 deg fov."""

    intrinsics = CameraIntrinsics(
        fx=256.0, fy=256.0, cx=128.0, cy=128.0, width=256, height=256
    )
    return intrinsics, CameraPose.identity()


def _place_center(rng: np.random.Generator, intrinsics: CameraIntrinsics) -> np.ndarray:
    """Draws a 3-D point whose projection lies inside the default image."""

    mu = _PIXEL_MARGIN_FRAC * intrinsics.width
    mv = _PIXEL_MARGIN_FRAC * intrinsics.height
    u = rng.uniform(mu, intrinsics.width - mu)
    v = rng.uniform(mv, intrinsics.height - mv)
    z = rng.uniform(*_DEPTH_RANGE)
    x = (u - intrinsics.cx) * z / intrinsics.fx
    y = (v - intrinsics.cy) * z / intrinsics.fy
    return np.array([x, y, z])


def generate_scene(seed: int, complexity: int = 3) -> SyntheticScene:
    """Builds a deterministic scene with 1 + complexity primitives.

    The first primitive is always a sphere near the scene center; extra
    primitives alternate randomly between spheres and boxes at staggered
    depths, so silhouettes produce depth discontinuities against both the
    background and each other.

    Args:
        seed: RNG seed; equal seeds give identical scenes.
        complexity: number of primitives beyond the first sphere (>= 0).

    Returns:
        SyntheticScene whose primitive centers all project inside the
        default camera frustum.
    """

    if complexity < 0:
        raise ValueError(f"complexity must be >= 0, got {complexity}")
    rng = np.random.default_rng(seed)
    intrinsics, _ = default_camera()

    primitives: list[Primitive] = [
        Sphere(
            center=SCENE_CENTER + rng.uniform(-0.05, 0.05, 3),
            radius=rng.uniform(*_SPHERE_RADIUS_RANGE),
            albedo=rng.uniform(*_ALBEDO_RANGE, 3),
        )
    ]
    for _ in range(complexity):
        center = _place_center(rng, intrinsics)
        albedo = rng.uniform(*_ALBEDO_RANGE, 3)
        if rng.random() < 0.5:
            primitives.append(
                Sphere(
                    center=center,
                    radius=rng.uniform(*_SPHERE_RADIUS_RANGE),
                    albedo=albedo,
                )
            )
        else:
            primitives.append(
                Box(center=center, size=rng.uniform(*_BOX_SIZE_RANGE, 3), albedo=albedo)
            )
    return SyntheticScene(primitives=tuple(primitives))
