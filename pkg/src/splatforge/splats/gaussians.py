"""3D Gaussian containers: single splats, per-view grids, and flat scenes.

Per-view grids and scenes hold attributes as arrays (struct-of-arrays) so
the renderer can consume them directly; ``Gaussian3D`` is the scalar view
used at element granularity.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..geometry import CameraIntrinsics, CameraPose

__all__ = [
    "Gaussian3D",
    "SplatterImage",
    "GaussianScene",
    "quat_to_matrix",
    "merge_splatter_images",
    "cull_transparent",
]


def quat_to_matrix(quats: np.ndarray) -> np.ndarray:
    """Rotation matrices for unit quaternions in (w, x, y, z) order.

    Accepts (..., 4) and returns (..., 3, 3).
    """
    q = np.asarray(quats, dtype=np.float64)
    w, x, y, z = q[..., 0], q[..., 1], q[..., 2], q[..., 3]
    m = np.empty(q.shape[:-1] + (3, 3))
    m[..., 0, 0] = 1 - 2 * (y * y + z * z)
    m[..., 0, 1] = 2 * (x * y - w * z)
    m[..., 0, 2] = 2 * (x * z + w * y)
    m[..., 1, 0] = 2 * (x * y + w * z)
    m[..., 1, 1] = 1 - 2 * (x * x + z * z)
    m[..., 1, 2] = 2 * (y * z - w * x)
    m[..., 2, 0] = 2 * (x * z - w * y)
    m[..., 2, 1] = 2 * (y * z + w * x)
    m[..., 2, 2] = 1 - 2 * (x * x + y * y)
    return m


@dataclass(frozen=True)
class Gaussian3D:
    """One colored 3D Gaussian.

    Fields: scene-frame mean, opacity in [0, 1], positive per-axis scales,
    unit quaternion (w, x, y, z), and RGB color in [0, 1]. The covariance
    is R(q) diag(scale^2) R(q)^T.
    """

    mean: np.ndarray
    opacity: float
    scale: np.ndarray
    rotation: np.ndarray
    color: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "mean", np.asarray(self.mean, dtype=np.float64).reshape(3))
        object.__setattr__(self, "scale", np.asarray(self.scale, dtype=np.float64).reshape(3))
        object.__setattr__(self, "rotation", np.asarray(self.rotation, dtype=np.float64).reshape(4))
        object.__setattr__(self, "color", np.asarray(self.color, dtype=np.float64).reshape(3))
        if not (0.0 <= self.opacity <= 1.0):
            raise ValueError(f"opacity must be in [0, 1], got {self.opacity}")
        if np.any(self.scale <= 0):
            raise ValueError("scale components must be positive")
        if abs(np.linalg.norm(self.rotation) - 1.0) > 1e-9:
            raise ValueError("rotation quaternion must be unit length")

    def covariance(self) -> np.ndarray:
        r = quat_to_matrix(self.rotation)
        return r @ np.diag(self.scale**2) @ r.T


def _check_attrs(means, opacities, scales, rotations, colors, n, what: str) -> None:
    if means.ndim == 2 and means.shape != (n, 3):
        raise ValueError(f"{what}: bad means shape {means.shape}")
    if np.any(opacities < 0) or np.any(opacities > 1):
        raise ValueError(f"{what}: opacity outside [0, 1]")
    if np.any(scales <= 0):
        raise ValueError(f"{what}: non-positive scale")
    norms = np.linalg.norm(rotations, axis=-1)
    if norms.size and np.abs(norms - 1.0).max() > 1e-9:
        raise ValueError(f"{what}: non-unit quaternion")


@dataclass(frozen=True)
class SplatterImage:
    """H x W grid of pixel-aligned Gaussians for one view.

    Attribute arrays are (H, W, ...) with a validity mask; invalid pixels
    hold placeholder values and contribute nothing downstream.
    """

    means: np.ndarray
    opacities: np.ndarray
    scales: np.ndarray
    rotations: np.ndarray
    colors: np.ndarray
    valid: np.ndarray
    intrinsics: CameraIntrinsics
    pose: CameraPose

    def __post_init__(self) -> None:
        h, w = self.valid.shape
        if (h, w) != (self.intrinsics.height, self.intrinsics.width):
            raise ValueError("grid does not match the camera's image size")
        sel = self.valid
        _check_attrs(
            self.means[sel], self.opacities[sel], self.scales[sel],
            self.rotations[sel], self.colors[sel], int(sel.sum()), "SplatterImage",
        )

    @property
    def height(self) -> int:
        return self.valid.shape[0]

    @property
    def width(self) -> int:
        return self.valid.shape[1]

    def gaussian_at(self, v: int, u: int) -> Gaussian3D:
        if not self.valid[v, u]:
            raise ValueError(f"pixel ({u}, {v}) holds no Gaussian")
        return Gaussian3D(
            self.means[v, u], float(self.opacities[v, u]), self.scales[v, u],
            self.rotations[v, u], self.colors[v, u],
        )


@dataclass(frozen=True)
class GaussianScene:
    """Flat scene: N Gaussians plus provenance (source view and pixel)."""

    means: np.ndarray
    opacities: np.ndarray
    scales: np.ndarray
    rotations: np.ndarray
    colors: np.ndarray
    source_view: np.ndarray = field(default=None)  # type: ignore[assignment]
    source_pixel: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        n = self.means.shape[0]
        if self.source_view is None:
            object.__setattr__(self, "source_view", np.full(n, -1, dtype=np.int32))
        if self.source_pixel is None:
            object.__setattr__(self, "source_pixel", np.full((n, 2), -1, dtype=np.int32))
        _check_attrs(self.means, self.opacities, self.scales,
                     self.rotations, self.colors, n, "GaussianScene")

    def __len__(self) -> int:
        return self.means.shape[0]

    @staticmethod
    def empty() -> "GaussianScene":
        return GaussianScene(
            np.zeros((0, 3)), np.zeros(0), np.zeros((0, 3)),
            np.zeros((0, 4)), np.zeros((0, 3)),
        )

    def covariances(self) -> np.ndarray:
        """Per-Gaussian 3x3 covariances R diag(s^2) R^T, shape (N, 3, 3)."""
        r = quat_to_matrix(self.rotations)
        s2 = self.scales**2
        return np.einsum("nij,nj,nkj->nik", r, s2, r)

    def take(self, indices: np.ndarray) -> "GaussianScene":
        return GaussianScene(
            self.means[indices], self.opacities[indices], self.scales[indices],
            self.rotations[indices], self.colors[indices],
            self.source_view[indices], self.source_pixel[indices],
        )


def merge_splatter_images(images: list[SplatterImage]) -> GaussianScene:
    """Concatenate the valid Gaussians of several views into one scene.

    All views must already share a scene frame. Provenance records each
    Gaussian's view index and (u, v) pixel.
    """
    if not images:
        return GaussianScene.empty()
    means, opac, scales, rots, colors, views, pixels = [], [], [], [], [], [], []
    for idx, si in enumerate(images):
        sel = si.valid
        vv, uu = np.nonzero(sel)
        means.append(si.means[sel])
        opac.append(si.opacities[sel])
        scales.append(si.scales[sel])
        rots.append(si.rotations[sel])
        colors.append(si.colors[sel])
        views.append(np.full(vv.size, idx, dtype=np.int32))
        pixels.append(np.stack([uu, vv], axis=-1).astype(np.int32))
    return GaussianScene(
        np.concatenate(means), np.concatenate(opac), np.concatenate(scales),
        np.concatenate(rots), np.concatenate(colors),
        np.concatenate(views), np.concatenate(pixels),
    )


def cull_transparent(scene: GaussianScene, threshold: float) -> GaussianScene:
    """Drop Gaussians with opacity below threshold, preserving order.

    Thresholds above 1 are allowed and empty the scene.
    """
    if threshold < 0.0:
        raise ValueError("threshold must be non-negative")
    keep = np.nonzero(scene.opacities >= threshold)[0]
    return scene.take(keep)
