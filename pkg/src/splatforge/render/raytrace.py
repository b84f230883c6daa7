"""Ray tracer producing ground-truth images and depth maps for synthetic scenes.

Scenes are unions of lambertian primitives lit by a fixed headlight at the
camera: shading is albedo * |n . d| for unit surface normal n and unit view
ray d, so surfaces facing the camera are bright and grazing surfaces are dark.
Depth is the camera-frame z of the nearest hit, matching the depth convention
used everywhere else in the package (not ray length).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..geometry.camera import CameraIntrinsics, CameraPose, pixel_directions
from .types import RenderedImage

# Minimum ray parameter accepted as a hit; rejects self-intersection at t=0.
_T_MIN = 1e-9


def _as_unit(vec: np.ndarray, name: str) -> np.ndarray:
    out = np.asarray(vec, dtype=np.float64).reshape(3).copy()
    norm = np.linalg.norm(out)
    if norm < 1e-12:
        raise ValueError(f"{name} must be nonzero")
    out /= norm
    out.flags.writeable = False
    return out


def _as_color(vec: np.ndarray, name: str) -> np.ndarray:
    out = np.asarray(vec, dtype=np.float64).reshape(3).copy()
    if out.min() < 0.0 or out.max() > 1.0:
        raise ValueError(f"{name} must lie in [0, 1]")
    out.flags.writeable = False
    return out


def _as_point(vec: np.ndarray) -> np.ndarray:
    out = np.asarray(vec, dtype=np.float64).reshape(3).copy()
    if not np.isfinite(out).all():
        raise ValueError("point must be finite")
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class Sphere:
    """Lambertian sphere: center (3,), radius > 0, albedo (3,) in [0, 1]."""

    center: np.ndarray
    radius: float
    albedo: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "center", _as_point(self.center))
        object.__setattr__(self, "albedo", _as_color(self.albedo, "albedo"))
        if not self.radius > 0.0:
            raise ValueError(f"radius must be positive, got {self.radius}")

    def intersect(
        self, origin: np.ndarray, dirs: np.ndarray
    ) -> tuple[np.ndarray, np.ndarray]:
        oc = origin - self.center
        b = np.einsum("...i,i->...", dirs, oc)
        c = float(oc @ oc) - self.radius**2
        disc = b * b - c
        root = np.sqrt(np.maximum(disc, 0.0))
        t_near = -b - root
        t_far = -b + root
        t = np.where(t_near > _T_MIN, t_near, t_far)
        t = np.where((disc >= 0.0) & (t > _T_MIN), t, np.inf)
        # misses get placeholder normals; callers mask them out by t
        t_safe = np.where(np.isfinite(t), t, 0.0)
        hit = origin + t_safe[..., None] * dirs
        normals = (hit - self.center) / self.radius
        return t, normals


@dataclass(frozen=True)
class Plane:
    """Infinite lambertian plane through `point` with unit `normal`.

    The normal is normalized on construction.
    """

    point: np.ndarray
    normal: np.ndarray
    albedo: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "point", _as_point(self.point))
        object.__setattr__(self, "normal", _as_unit(self.normal, "normal"))
        object.__setattr__(self, "albedo", _as_color(self.albedo, "albedo"))

    def intersect(
        self, origin: np.ndarray, dirs: np.ndarray
    ) -> tuple[np.ndarray, np.ndarray]:
        denom = np.einsum("...i,i->...", dirs, self.normal)
        offset = float((self.point - origin) @ self.normal)
        safe = np.where(np.abs(denom) < 1e-12, 1.0, denom)
        t = offset / safe
        t = np.where((np.abs(denom) >= 1e-12) & (t > _T_MIN), t, np.inf)
        normals = np.broadcast_to(self.normal, dirs.shape)
        return t, normals


@dataclass(frozen=True)
class Box:
    """Axis-aligned lambertian box: center (3,), full-extent size (3,) > 0."""

    center: np.ndarray
    size: np.ndarray
    albedo: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "center", _as_point(self.center))
        object.__setattr__(self, "albedo", _as_color(self.albedo, "albedo"))
        size = np.asarray(self.size, dtype=np.float64).reshape(3).copy()
        if not (size > 0.0).all():
            raise ValueError(f"size must be positive, got {size}")
        size.flags.writeable = False
        object.__setattr__(self, "size", size)

    def intersect(
        self, origin: np.ndarray, dirs: np.ndarray
    ) -> tuple[np.ndarray, np.ndarray]:
        lo = self.center - 0.5 * self.size
        hi = self.center + 0.5 * self.size
        # Zero direction components become huge slopes, preserving slab logic.
        safe = np.where(np.abs(dirs) < 1e-300, 1e-300, dirs)
        t1 = (lo - origin) / safe
        t2 = (hi - origin) / safe
        t_lo = np.minimum(t1, t2)
        t_hi = np.maximum(t1, t2)
        t_near = t_lo.max(axis=-1)
        t_far = t_hi.min(axis=-1)
        t = np.where(t_near > _T_MIN, t_near, t_far)
        t = np.where((t_near <= t_far) & (t > _T_MIN), t, np.inf)
        # Face normal = axis achieving the accepted slab bound; shading uses
        # |n . d| so the outward sign is irrelevant.
        entering = t_near > _T_MIN
        axis = np.where(
            entering, np.argmax(t_lo, axis=-1), np.argmin(t_hi, axis=-1)
        )
        normals = np.zeros(dirs.shape)
        for a in range(3):
            normals[..., a] = axis == a
        return t, normals


Primitive = Sphere | Plane | Box


@dataclass(frozen=True)
class SyntheticScene:
    """Ground-truth scene: lambertian primitives over a background color."""

    primitives: tuple[Primitive, ...]
    background: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self) -> None:
        object.__setattr__(self, "primitives", tuple(self.primitives))
        object.__setattr__(
            self, "background", _as_color(self.background, "background")
        )


def raytrace_synthetic(
    scene: SyntheticScene,
    intrinsics: CameraIntrinsics,
    pose: CameraPose,
) -> tuple[RenderedImage, np.ndarray]:
    """Renders nearest-hit lambertian shading with a camera headlight.

    Args:
        scene: primitives plus background color.
        intrinsics: pinhole camera model.
        pose: camera-to-world pose.

    Returns:
        (image, depth): image.rgb holds shaded colors (background at misses)
        and image.alpha the hit mask; depth is the (H, W) camera-frame z of
        the nearest hit, 0 at misses. image.depth carries the same array.
    """

    dirs_cam = pixel_directions(intrinsics)
    inv_len = 1.0 / np.linalg.norm(dirs_cam, axis=-1, keepdims=True)
    unit_cam = dirs_cam * inv_len
    unit_world = np.einsum("ij,hwj->hwi", pose.rotation, unit_cam)
    origin = pose.translation

    height, width = intrinsics.height, intrinsics.width
    best_t = np.full((height, width), np.inf)
    best_rgb = np.broadcast_to(scene.background, (height, width, 3)).copy()
    for prim in scene.primitives:
        t, normals = prim.intersect(origin, unit_world)
        closer = t < best_t
        if not closer.any():
            continue
        lambert = np.abs(np.einsum("hwi,hwi->hw", normals, unit_world))
        shaded = np.clip(prim.albedo * lambert[..., None], 0.0, 1.0)
        best_rgb = np.where(closer[..., None], shaded, best_rgb)
        best_t = np.where(closer, t, best_t)

    hit = np.isfinite(best_t)
    depth = np.where(hit, best_t * unit_cam[..., 2], 0.0)
    image = RenderedImage(
        rgb=best_rgb, alpha=hit.astype(np.float64), depth=depth
    )
    return image, depth
