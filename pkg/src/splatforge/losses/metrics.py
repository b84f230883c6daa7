"""Image and depth evaluation metrics.

PSNR and SSIM assume unit dynamic range ([0, 1] images). Depth metrics follow
the usual monocular-depth conventions: AbsRel for relative error, threshold
accuracy delta with a strict inequality, and the mean re-projection pixel
distance for pointmap/camera consistency.
"""

from __future__ import annotations

import numpy as np

from ..geometry.camera import CameraIntrinsics, CameraPose, project_points
from ..geometry.pointmap import Pointmap

# PSNR is capped here so identical images stay finite.
PSNR_CAP_DB = 99.0
_PSNR_MSE_FLOOR = 1e-10

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
_SSIM_K1 = 0.01
_SSIM_K2 = 0.03

# Registry consumed by the evaluation CLI. LPIPS is deliberately absent: it
# needs a pretrained perceptual network, out of scope for this package.
IMAGE_METRICS = ("psnr", "ssim")
UNAVAILABLE_METRICS = {"lpips": "requires a pretrained perceptual network"}


def _check_images(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"image shapes differ: {a.shape} vs {b.shape}")
    for name, img in (("first", a), ("second", b)):
        if img.min() < 0.0 or img.max() > 1.0:
            raise ValueError(f"{name} image must lie in [0, 1]")
    return a, b


def metric_psnr(a: np.ndarray, b: np.ndarray) -> float:
    """Peak signal-to-noise ratio in dB for unit-range images, capped at 99."""

    a, b = _check_images(a, b)
    mse = float(np.mean((a - b) ** 2))
    if mse < _PSNR_MSE_FLOOR:
        return PSNR_CAP_DB
    return float(10.0 * np.log10(1.0 / mse))


def _gaussian_kernel(size: int, sigma: float) -> np.ndarray:
    offsets = np.arange(size, dtype=np.float64) - (size - 1) / 2.0
    line = np.exp(-0.5 * (offsets / sigma) ** 2)
    kernel = np.outer(line, line)
    return kernel / kernel.sum()


def _windowed_mean(img: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    windows = np.lib.stride_tricks.sliding_window_view(img, kernel.shape)
    return np.einsum("hwij,ij->hw", windows, kernel)


def _ssim_single(a: np.ndarray, b: np.ndarray, kernel: np.ndarray) -> float:
    c1 = _SSIM_K1**2
    c2 = _SSIM_K2**2
    mu_a = _windowed_mean(a, kernel)
    mu_b = _windowed_mean(b, kernel)
    var_a = _windowed_mean(a * a, kernel) - mu_a * mu_a
    var_b = _windowed_mean(b * b, kernel) - mu_b * mu_b
    cov = _windowed_mean(a * b, kernel) - mu_a * mu_b
    ssim_map = ((2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)) / (
        (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2)
    )
    return float(ssim_map.mean())


def metric_ssim(a: np.ndarray, b: np.ndarray) -> float:
    """Structural similarity over 11x11 Gaussian windows (sigma 1.5).

    Windows are evaluated only where they fit entirely inside the image
    (valid mode, no padding). Multi-channel images average the per-channel
    scores. Requires both image sides >= 11.
    """

    a, b = _check_images(a, b)
    if a.ndim not in (2, 3):
        raise ValueError(f"images must be (H, W) or (H, W, C), got {a.shape}")
    if a.shape[0] < SSIM_WINDOW or a.shape[1] < SSIM_WINDOW:
        raise ValueError(
            f"images must be at least {SSIM_WINDOW}x{SSIM_WINDOW}, got {a.shape}"
        )
    kernel = _gaussian_kernel(SSIM_WINDOW, SSIM_SIGMA)
    if a.ndim == 2:
        return _ssim_single(a, b, kernel)
    scores = [_ssim_single(a[..., c], b[..., c], kernel) for c in range(a.shape[2])]
    return float(np.mean(scores))


def _check_depths(
    z_pred: np.ndarray, z_gt: np.ndarray, valid: np.ndarray | None
) -> tuple[np.ndarray, np.ndarray]:
    z_pred = np.asarray(z_pred, dtype=np.float64)
    z_gt = np.asarray(z_gt, dtype=np.float64)
    if z_pred.shape != z_gt.shape:
        raise ValueError(f"depth shapes differ: {z_pred.shape} vs {z_gt.shape}")
    if valid is None:
        valid = np.ones(z_gt.shape, dtype=bool)
    else:
        valid = np.asarray(valid, dtype=bool)
        if valid.shape != z_gt.shape:
            raise ValueError(f"valid shape {valid.shape} != depth {z_gt.shape}")
    zp = z_pred[valid]
    zg = z_gt[valid]
    if zg.size and zg.min() <= 0.0:
        raise ValueError("ground-truth depths must be positive")
    return zp, zg


def metric_absrel(
    z_pred: np.ndarray, z_gt: np.ndarray, valid: np.ndarray | None = None
) -> float:
    """Mean absolute relative depth error |z_pred - z_gt| / z_gt."""

    zp, zg = _check_depths(z_pred, z_gt, valid)
    if zg.size == 0:
        return 0.0
    return float(np.mean(np.abs(zp - zg) / zg))


def metric_delta(
    z_pred: np.ndarray,
    z_gt: np.ndarray,
    eps: float = 1.01,
    valid: np.ndarray | None = None,
) -> float:
    """Fraction of pixels with max(z_pred/z_gt, z_gt/z_pred) strictly < eps.

    Non-positive predictions always fail the threshold.
    """

    if eps <= 1.0:
        raise ValueError(f"eps must exceed 1, got {eps}")
    zp, zg = _check_depths(z_pred, z_gt, valid)
    if zg.size == 0:
        return 0.0
    ratio = np.where(zp > 0.0, np.maximum(zp / zg, zg / np.where(zp > 0, zp, 1.0)), np.inf)
    return float(np.mean(ratio < eps))


def metric_duv(
    pointmap: Pointmap, intrinsics: CameraIntrinsics, pose: CameraPose
) -> float:
    """Mean pixel distance between re-projected points and their pixel centers.

    Zero (up to roundoff) exactly when the pointmap is calibrated to the
    camera: every valid point lies on its own pixel's ray.
    """

    if (pointmap.height, pointmap.width) != (intrinsics.height, intrinsics.width):
        raise ValueError(
            f"pointmap grid {(pointmap.height, pointmap.width)} does not match "
            f"camera {(intrinsics.height, intrinsics.width)}"
        )
    if not pointmap.valid.any():
        return 0.0
    uv, z = project_points(intrinsics, pose, pointmap.points)
    if z[pointmap.valid].min() <= 0.0:
        raise ValueError("valid points must lie in front of the camera")
    uu, vv = np.meshgrid(
        np.arange(intrinsics.width, dtype=np.float64) + 0.5,
        np.arange(intrinsics.height, dtype=np.float64) + 0.5,
    )
    dist = np.linalg.norm(uv - np.stack([uu, vv], axis=-1), axis=-1)
    return float(dist[pointmap.valid].mean())
