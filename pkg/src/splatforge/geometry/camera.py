"""Pinhole cameras, rigid poses, projection and ray generation.

Conventions used throughout the package:

* camera frame: x right, y down, z forward (points with z > 0 are in
  front of the camera);
* ``CameraPose`` stores the camera-to-world transform, so
  ``world = R @ cam + t`` and the camera center is ``t``;
* pixel ``(u, v)`` (column, row) samples its center at the continuous
  image coordinate ``(u + 0.5, v + 0.5)``;
* projection returns continuous image coordinates, i.e. an on-axis point
  projects to ``(cx, cy)``.

All computation is float64; file formats downcast to float32 at the I/O
boundary.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "CameraIntrinsics",
    "CameraPose",
    "look_at_pose",
    "pixel_grid",
    "pixel_directions",
    "project_points",
    "project_point",
    "unproject_depth",
    "compute_raymap",
]

_ORTHONORMAL_TOL = 1e-9


def _frozen_array(obj: object, name: str, value: np.ndarray, shape: tuple) -> None:
    arr = np.asarray(value, dtype=np.float64).reshape(shape).copy()
    arr.flags.writeable = False
    object.__setattr__(obj, name, arr)


@dataclass(frozen=True)
class CameraIntrinsics:
    """Pinhole intrinsics in pixel units."""

    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int

    def __post_init__(self) -> None:
        if not (self.fx > 0 and self.fy > 0):
            raise ValueError("focal lengths must be positive")
        if self.width < 1 or self.height < 1:
            raise ValueError("image size must be at least 1x1")


@dataclass(frozen=True)
class CameraPose:
    """Rigid camera-to-world transform (orthonormal rotation, det +1)."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self) -> None:
        _frozen_array(self, "rotation", self.rotation, (3, 3))
        _frozen_array(self, "translation", self.translation, (3,))
        err = np.abs(self.rotation.T @ self.rotation - np.eye(3)).max()
        if err > 1e-8:
            raise ValueError(f"rotation is not orthonormal (|R^T R - I| = {err:.3g})")
        if np.linalg.det(self.rotation) < 0:
            raise ValueError("rotation has negative determinant (reflection)")

    @staticmethod
    def identity() -> "CameraPose":
        return CameraPose(np.eye(3), np.zeros(3))

    def inverse(self) -> "CameraPose":
        rot = self.rotation.T
        return CameraPose(rot, -rot @ self.translation)

    def compose(self, other: "CameraPose") -> "CameraPose":
        """Return self applied after other: (self o other)(x) = self(other(x))."""
        return CameraPose(
            self.rotation @ other.rotation,
            self.rotation @ other.translation + self.translation,
        )

    def transform(self, points: np.ndarray) -> np.ndarray:
        """Apply the transform to an array of 3-vectors (shape (..., 3))."""
        pts = np.asarray(points, dtype=np.float64)
        return pts @ self.rotation.T + self.translation

    def inverse_transform(self, points: np.ndarray) -> np.ndarray:
        """Map world-frame points into the camera frame."""
        pts = np.asarray(points, dtype=np.float64)
        return (pts - self.translation) @ self.rotation

    def scaled(self, factor: float) -> "CameraPose":
        """Scale the translation component (rigid scene rescaling)."""
        return CameraPose(self.rotation, self.translation * factor)

    def matrix(self) -> np.ndarray:
        """4x4 homogeneous camera-to-world matrix."""
        m = np.eye(4)
        m[:3, :3] = self.rotation
        m[:3, 3] = self.translation
        return m


def look_at_pose(eye: np.ndarray, target: np.ndarray, up: np.ndarray) -> CameraPose:
    """Build a camera-to-world pose at ``eye`` looking toward ``target``.

    Camera z points at the target and camera y points against ``up``
    (image rows grow downward). ``up`` must not be parallel to the view
    direction.
    """
    eye = np.asarray(eye, dtype=np.float64)
    forward = np.asarray(target, dtype=np.float64) - eye
    norm = np.linalg.norm(forward)
    if norm == 0:
        raise ValueError("eye and target coincide")
    forward = forward / norm
    up = np.asarray(up, dtype=np.float64)
    right = np.cross(-up, forward)
    norm = np.linalg.norm(right)
    if norm < 1e-12:
        raise ValueError("up vector is parallel to the view direction")
    right = right / norm
    down = np.cross(forward, right)
    rotation = np.stack([right, down, forward], axis=1)
    return CameraPose(rotation, eye)


def pixel_grid(intrinsics: CameraIntrinsics) -> np.ndarray:
    """Continuous pixel-center coordinates, shape (H, W, 2) of (u+0.5, v+0.5)."""
    u = np.arange(intrinsics.width, dtype=np.float64) + 0.5
    v = np.arange(intrinsics.height, dtype=np.float64) + 0.5
    uu, vv = np.meshgrid(u, v)
    return np.stack([uu, vv], axis=-1)


def pixel_directions(intrinsics: CameraIntrinsics) -> np.ndarray:
    """Camera-frame ray directions at unit z, shape (H, W, 3).

    Entry (v, u) is ((u+0.5-cx)/fx, (v+0.5-cy)/fy, 1), the direction of
    the ray through that pixel's center before normalization.
    """
    grid = pixel_grid(intrinsics)
    x = (grid[..., 0] - intrinsics.cx) / intrinsics.fx
    y = (grid[..., 1] - intrinsics.cy) / intrinsics.fy
    return np.stack([x, y, np.ones_like(x)], axis=-1)


def project_points(
    intrinsics: CameraIntrinsics, pose: CameraPose, points: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Project world points; returns ((..., 2) pixel coords, (...,) depth z.

    Depth is the camera-frame z coordinate. Points at or behind the
    camera plane get non-positive z; their pixel coordinates are not
    meaningful and it is the caller's job to mask them.
    """
    cam = pose.inverse_transform(points)
    z = cam[..., 2]
    with np.errstate(divide="ignore", invalid="ignore"):
        u = intrinsics.fx * cam[..., 0] / z + intrinsics.cx
        v = intrinsics.fy * cam[..., 1] / z + intrinsics.cy
    return np.stack([u, v], axis=-1), z


def project_point(
    intrinsics: CameraIntrinsics, pose: CameraPose, point: np.ndarray
) -> tuple[float, float, float]:
    """Project a single world point to (u, v, z); raises if z <= 0."""
    uv, z = project_points(intrinsics, pose, np.asarray(point, dtype=np.float64))
    if z <= 0:
        raise ValueError(f"point is behind the camera (z = {z:.6g})")
    return float(uv[0]), float(uv[1]), float(z)


def unproject_depth(
    intrinsics: CameraIntrinsics,
    pose: CameraPose,
    depth: np.ndarray,
    valid: np.ndarray | None = None,
):
    """Lift a depth map (camera-frame z per pixel) to a world-frame pointmap.

    Args:
        depth: (H, W) array of camera-frame z values.
        valid: optional (H, W) bool mask; invalid pixels are carried over
            to the output mask and their depth is ignored.

    Raises:
        ValueError: if any valid pixel has non-positive depth.
    """
    from .pointmap import Pointmap

    depth = np.asarray(depth, dtype=np.float64)
    if depth.shape != (intrinsics.height, intrinsics.width):
        raise ValueError("depth map shape does not match intrinsics")
    if valid is None:
        valid = np.ones(depth.shape, dtype=bool)
    else:
        valid = np.asarray(valid, dtype=bool)
    if np.any(depth[valid] <= 0):
        raise ValueError("non-positive depth at a valid pixel")
    dirs = pixel_directions(intrinsics)
    safe_depth = np.where(valid, depth, 1.0)
    cam = dirs * safe_depth[..., None]
    points = pose.transform(cam)
    return Pointmap(points, valid)


def compute_raymap(intrinsics: CameraIntrinsics, pose: CameraPose):
    """Per-pixel ray origins and unit directions encoding the camera pose."""
    from .pointmap import Raymap

    dirs_cam = pixel_directions(intrinsics)
    dirs_world = dirs_cam @ pose.rotation.T
    dirs_world /= np.linalg.norm(dirs_world, axis=-1, keepdims=True)
    origins = np.broadcast_to(pose.translation, dirs_world.shape)
    return Raymap(origins, dirs_world)
