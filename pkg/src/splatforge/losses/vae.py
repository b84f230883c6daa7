"""Geometry VAE objective: weighted reconstruction, KL, and gradient losses.

All losses are mean-reduced over valid pixels (or valid neighbor pairs) so
values are resolution-independent. Each loss has a raw-array companion that
also returns its analytic gradient with respect to the prediction; those are
what the toy autoencoder trains with and what the finite-difference checks
verify.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..geometry.normalize import rec_weight
from ..geometry.pointmap import Pointmap, Raymap


@dataclass(frozen=True)
class LatentStats:
    """Diagonal Gaussian posterior parameters: means and variances."""

    mu: np.ndarray
    var: np.ndarray

    def __post_init__(self) -> None:
        mu = np.asarray(self.mu, dtype=np.float64).reshape(-1).copy()
        var = np.asarray(self.var, dtype=np.float64).reshape(-1).copy()
        if mu.shape != var.shape:
            raise ValueError(f"mu shape {mu.shape} != var shape {var.shape}")
        if not np.isfinite(mu).all() or not np.isfinite(var).all():
            raise ValueError("latent stats must be finite")
        if var.size and var.min() <= 0.0:
            raise ValueError("latent variances must be positive")
        mu.flags.writeable = False
        var.flags.writeable = False
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "var", var)


@dataclass(frozen=True)
class LossWeights:
    """Weights of the KL and gradient terms in the total objective."""

    lambda1: float = 3e-9
    lambda2: float = 0.033

    def __post_init__(self) -> None:
        if self.lambda1 < 0.0 or self.lambda2 < 0.0:
            raise ValueError("loss weights must be non-negative")


def _check_same_shape(a: np.ndarray, b: np.ndarray, what: str) -> None:
    if a.shape != b.shape:
        raise ValueError(f"{what} shapes differ: {a.shape} vs {b.shape}")


def loss_rec_with_grad(
    pred_points: np.ndarray,
    pred_rays: np.ndarray,
    gt_points: np.ndarray,
    gt_rays: np.ndarray,
    pixel_weights: np.ndarray,
    valid: np.ndarray,
) -> tuple[float, np.ndarray, np.ndarray]:
    """Weighted squared reconstruction error and its gradient.

    Per valid pixel: weight * ||P_hat - P||^2 + ||r_hat - r||^2, averaged over
    the valid pixels. The raymap term is unweighted.

    Returns:
        (value, d/d pred_points, d/d pred_rays).
    """

    _check_same_shape(pred_points, gt_points, "pointmap")
    _check_same_shape(pred_rays, gt_rays, "raymap")
    if pred_points.shape[:2] != pred_rays.shape[:2]:
        raise ValueError("pointmap and raymap grids differ")
    _check_same_shape(valid, pixel_weights, "weight/valid")

    mask = valid.astype(np.float64)
    count = mask.sum()
    dpoints = np.zeros_like(pred_points)
    drays = np.zeros_like(pred_rays)
    if count == 0:
        return 0.0, dpoints, drays

    diff_p = (pred_points - gt_points) * mask[..., None]
    diff_r = (pred_rays - gt_rays) * mask[..., None]
    per_pixel = pixel_weights * (diff_p**2).sum(axis=-1) + (diff_r**2).sum(axis=-1)
    value = float(per_pixel.sum() / count)
    dpoints = 2.0 * pixel_weights[..., None] * diff_p / count
    drays = 2.0 * diff_r / count
    return value, dpoints, drays


def loss_grad_with_grad(
    pred_points: np.ndarray,
    gt_points: np.ndarray,
    valid: np.ndarray,
) -> tuple[float, np.ndarray]:
    """Pointmap gradient-matching loss and its gradient.

    Forward differences along both image axes; a pair contributes when both
    endpoints are valid. Mean-reduced over all contributing pairs.
    """

    _check_same_shape(pred_points, gt_points, "pointmap")
    dpoints = np.zeros_like(pred_points)
    pair_h = valid[:, 1:] & valid[:, :-1]
    pair_v = valid[1:, :] & valid[:-1, :]
    count = int(pair_h.sum()) + int(pair_v.sum())
    if count == 0:
        return 0.0, dpoints

    res_h = (
        (pred_points[:, 1:] - pred_points[:, :-1])
        - (gt_points[:, 1:] - gt_points[:, :-1])
    ) * pair_h[..., None]
    res_v = (
        (pred_points[1:, :] - pred_points[:-1, :])
        - (gt_points[1:, :] - gt_points[:-1, :])
    ) * pair_v[..., None]
    value = float(((res_h**2).sum() + (res_v**2).sum()) / count)
    scale = 2.0 / count
    dpoints[:, 1:] += scale * res_h
    dpoints[:, :-1] -= scale * res_h
    dpoints[1:, :] += scale * res_v
    dpoints[:-1, :] -= scale * res_v
    return value, dpoints


def loss_kl_with_grad(
    mu: np.ndarray, var: np.ndarray
) -> tuple[float, np.ndarray, np.ndarray]:
    """KL divergence to the standard normal and its gradients.

    -1/2 * sum_k (1 + log var_k - mu_k^2 - var_k); zero exactly at mu = 0,
    var = 1.
    """

    _check_same_shape(mu, var, "latent")
    if var.size and var.min() <= 0.0:
        raise ValueError("variances must be positive")
    value = float(-0.5 * np.sum(1.0 + np.log(var) - mu**2 - var))
    return value, mu.copy(), -0.5 * (1.0 / var - 1.0)


def loss_rec(
    pred_pointmap: Pointmap,
    pred_raymap: Raymap,
    gt_pointmap: Pointmap,
    gt_raymap: Raymap,
    pixel_weights: np.ndarray,
) -> float:
    """Weighted pointmap + raymap reconstruction loss (see loss_rec_with_grad)."""

    valid = pred_pointmap.valid & gt_pointmap.valid
    value, _, _ = loss_rec_with_grad(
        pred_pointmap.points,
        pred_raymap.as_array(),
        gt_pointmap.points,
        gt_raymap.as_array(),
        np.asarray(pixel_weights, dtype=np.float64),
        valid,
    )
    return value


def loss_grad(pred_pointmap: Pointmap, gt_pointmap: Pointmap) -> float:
    """Gradient-matching loss between pointmaps (see loss_grad_with_grad)."""

    valid = pred_pointmap.valid & gt_pointmap.valid
    value, _ = loss_grad_with_grad(pred_pointmap.points, gt_pointmap.points, valid)
    return value


def loss_kl(stats: LatentStats) -> float:
    """KL divergence of the posterior to the standard normal."""

    value, _, _ = loss_kl_with_grad(stats.mu, stats.var)
    return value


def loss_photometric_l2(rendered: np.ndarray, target: np.ndarray) -> float:
    """Mean squared error between two images."""

    rendered = np.asarray(rendered, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    _check_same_shape(rendered, target, "image")
    return float(np.mean((rendered - target) ** 2))


def loss_total(
    pred_pointmap: Pointmap,
    pred_raymap: Raymap,
    gt_pointmap: Pointmap,
    gt_raymap: Raymap,
    stats: LatentStats,
    weights: LossWeights | None = None,
) -> float:
    """Full objective: reconstruction + lambda1 * KL + lambda2 * gradient loss.

    Per-pixel reconstruction weights are derived from the ground-truth points
    (camera-local coordinates) via the distance-based reweighting.
    """

    weights = LossWeights() if weights is None else weights
    pixel_weights = rec_weight(gt_pointmap.points)
    rec = loss_rec(pred_pointmap, pred_raymap, gt_pointmap, gt_raymap, pixel_weights)
    kl = loss_kl(stats)
    grad = loss_grad(pred_pointmap, gt_pointmap)
    return rec + weights.lambda1 * kl + weights.lambda2 * grad
