"""Toy linear variational autoencoder over pointmap+raymap tiles.

A deliberately small model: linear mean/log-variance encoder heads, a linear
decoder, reparameterized sampling z = mu + std * eps, trained with Adam on
the full objective (weighted reconstruction + KL + gradient loss). All
gradients are hand-derived; the finite-difference checker verifies them.

Each tile is flattened to x = [pointmap (h*w*3), raymap (h*w*6)].
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.transform import Rotation

from ..geometry.camera import CameraIntrinsics, CameraPose, compute_raymap, unproject_depth
from ..geometry.normalize import rec_weight
from ..geometry.pointmap import Pointmap, Raymap
from .vae import (
    LatentStats,
    LossWeights,
    loss_grad_with_grad,
    loss_kl_with_grad,
    loss_rec_with_grad,
)


@dataclass(frozen=True)
class ToyAEConfig:
    """Training hyperparameters for the toy autoencoder."""

    latent_dim: int = 16
    steps: int = 300
    learning_rate: float = 1e-2
    seed: int = 0
    weights: LossWeights = field(default_factory=LossWeights)

    def __post_init__(self) -> None:
        if self.latent_dim < 1:
            raise ValueError("latent_dim must be >= 1")
        if self.steps < 1:
            raise ValueError("steps must be >= 1")
        if self.learning_rate <= 0.0:
            raise ValueError("learning rate must be positive")


@dataclass(frozen=True)
class ToyAEModel:
    """Parameters of the linear VAE; also reused as a gradient container.

    w_mu/b_mu: latent mean head; w_lv/b_lv: latent log-variance head;
    w_dec/b_dec: decoder back to the flattened tile.
    """

    w_mu: np.ndarray
    b_mu: np.ndarray
    w_lv: np.ndarray
    b_lv: np.ndarray
    w_dec: np.ndarray
    b_dec: np.ndarray

    def __post_init__(self) -> None:
        k, d = self.w_mu.shape
        if self.w_lv.shape != (k, d) or self.w_dec.shape != (d, k):
            raise ValueError("inconsistent encoder/decoder shapes")
        if self.b_mu.shape != (k,) or self.b_lv.shape != (k,) or self.b_dec.shape != (d,):
            raise ValueError("inconsistent bias shapes")

    @property
    def latent_dim(self) -> int:
        return self.w_mu.shape[0]

    @property
    def input_dim(self) -> int:
        return self.w_mu.shape[1]

    def encode(self, x: np.ndarray) -> LatentStats:
        mu = self.w_mu @ x + self.b_mu
        var = np.exp(self.w_lv @ x + self.b_lv)
        return LatentStats(mu=mu, var=var)

    def decode(self, z: np.ndarray) -> np.ndarray:
        return self.w_dec @ z + self.b_dec

    def flatten(self) -> np.ndarray:
        return np.concatenate(
            [
                self.w_mu.ravel(),
                self.b_mu,
                self.w_lv.ravel(),
                self.b_lv,
                self.w_dec.ravel(),
                self.b_dec,
            ]
        )

    @staticmethod
    def unflatten(vec: np.ndarray, latent_dim: int, input_dim: int) -> "ToyAEModel":
        k, d = latent_dim, input_dim
        sizes = [k * d, k, k * d, k, d * k, d]
        if vec.size != sum(sizes):
            raise ValueError(f"parameter vector has {vec.size} entries, want {sum(sizes)}")
        parts = np.split(vec, np.cumsum(sizes)[:-1])
        return ToyAEModel(
            w_mu=parts[0].reshape(k, d),
            b_mu=parts[1].copy(),
            w_lv=parts[2].reshape(k, d),
            b_lv=parts[3].copy(),
            w_dec=parts[4].reshape(d, k),
            b_dec=parts[5].copy(),
        )


@dataclass(frozen=True)
class ToyAETrainResult:
    """Trained model plus per-step curves (length steps + 1, final appended)."""

    model: ToyAEModel
    loss_curve: np.ndarray
    rec_curve: np.ndarray
    kl_curve: np.ndarray
    grad_curve: np.ndarray


def make_tile_dataset(
    n_tiles: int, seed: int, size: int = 16
) -> list[tuple[Pointmap, Raymap]]:
    """Smooth synthetic camera-local tiles with varied depth and poses.

    Depth fields are low-frequency sinusoids around depth 1 (so points sit
    near the local scene center (0, 0, 1)); raymaps come from mildly
    perturbed camera poses. All pixels are valid.
    """

    if n_tiles < 1:
        raise ValueError("n_tiles must be >= 1")
    rng = np.random.default_rng(seed)
    intr = CameraIntrinsics(
        fx=float(size), fy=float(size), cx=size / 2, cy=size / 2, width=size, height=size
    )
    uu, vv = np.meshgrid(
        np.linspace(0.0, 1.0, size, endpoint=False),
        np.linspace(0.0, 1.0, size, endpoint=False),
    )
    tiles = []
    for _ in range(n_tiles):
        freq = rng.uniform(0.5, 2.0, size=2)
        phase = rng.uniform(0.0, 2.0 * np.pi, size=2)
        amp = rng.uniform(0.05, 0.25)
        depth = 1.0 + amp * np.sin(2.0 * np.pi * freq[0] * uu + phase[0]) * np.cos(
            2.0 * np.pi * freq[1] * vv + phase[1]
        )
        pointmap = unproject_depth(intr, CameraPose.identity(), depth)
        pose = CameraPose(
            rotation=Rotation.from_rotvec(rng.normal(scale=0.05, size=3)).as_matrix(),
            translation=rng.normal(scale=0.1, size=3),
        )
        tiles.append((pointmap, compute_raymap(intr, pose)))
    return tiles


def tiles_to_arrays(
    tiles: list[tuple[Pointmap, Raymap]],
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Stacks tiles into (points, rays, pixel_weights, valid) batch arrays."""

    if not tiles:
        raise ValueError("dataset must be non-empty")
    points = np.stack([pm.points for pm, _ in tiles])
    rays = np.stack([rm.as_array() for _, rm in tiles])
    valid = np.stack([pm.valid for pm, _ in tiles])
    pixel_weights = np.stack([rec_weight(pm.points) for pm, _ in tiles])
    return points, rays, pixel_weights, valid


def toy_ae_objective(
    model: ToyAEModel,
    points: np.ndarray,
    rays: np.ndarray,
    pixel_weights: np.ndarray,
    valid: np.ndarray,
    eps: np.ndarray,
    weights: LossWeights,
) -> tuple[float, dict[str, float], ToyAEModel]:
    """Full-batch objective value, per-component means, and parameter gradients.

    eps is the (batch, latent_dim) reparameterization noise; passing a fixed
    array makes the objective deterministic for gradient checking.
    """

    batch = points.shape[0]
    npts = points[0].size
    x = np.concatenate([points.reshape(batch, -1), rays.reshape(batch, -1)], axis=1)
    mu = x @ model.w_mu.T + model.b_mu
    lv = x @ model.w_lv.T + model.b_lv
    std = np.exp(0.5 * lv)
    var = std * std
    z = mu + std * eps
    xh = z @ model.w_dec.T + model.b_dec

    d_xh = np.zeros_like(xh)
    d_mu = np.zeros_like(mu)
    d_lv = np.zeros_like(lv)
    rec_sum = kl_sum = grad_sum = 0.0
    tile_shape = points.shape[1:]
    ray_shape = rays.shape[1:]
    for i in range(batch):
        pred_pts = xh[i, :npts].reshape(tile_shape)
        pred_rays = xh[i, npts:].reshape(ray_shape)
        rec, d_pts, d_rays = loss_rec_with_grad(
            pred_pts, pred_rays, points[i], rays[i], pixel_weights[i], valid[i]
        )
        gval, d_pts_g = loss_grad_with_grad(pred_pts, points[i], valid[i])
        kl, d_mu_kl, d_var_kl = loss_kl_with_grad(mu[i], var[i])
        rec_sum += rec
        grad_sum += gval
        kl_sum += kl
        d_xh[i, :npts] = (d_pts + weights.lambda2 * d_pts_g).reshape(-1)
        d_xh[i, npts:] = d_rays.reshape(-1)
        d_mu[i] = weights.lambda1 * d_mu_kl
        d_lv[i] = weights.lambda1 * d_var_kl * var[i]

    d_z = d_xh @ model.w_dec
    d_mu += d_z
    d_lv += d_z * (0.5 * std * eps)

    components = {
        "rec": rec_sum / batch,
        "kl": kl_sum / batch,
        "grad": grad_sum / batch,
    }
    total = (
        components["rec"]
        + weights.lambda1 * components["kl"]
        + weights.lambda2 * components["grad"]
    )
    grads = ToyAEModel(
        w_mu=d_mu.T @ x / batch,
        b_mu=d_mu.mean(axis=0),
        w_lv=d_lv.T @ x / batch,
        b_lv=d_lv.mean(axis=0),
        w_dec=d_xh.T @ z / batch,
        b_dec=d_xh.mean(axis=0),
    )
    return float(total), components, grads


class _Adam:
    """Plain Adam on a flat parameter vector."""

    def __init__(self, dim: int, lr: float, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.m = np.zeros(dim)
        self.v = np.zeros(dim)
        self.t = 0

    def step(self, params: np.ndarray, grad: np.ndarray) -> np.ndarray:
        self.t += 1
        self.m = self.beta1 * self.m + (1.0 - self.beta1) * grad
        self.v = self.beta2 * self.v + (1.0 - self.beta2) * grad * grad
        m_hat = self.m / (1.0 - self.beta1**self.t)
        v_hat = self.v / (1.0 - self.beta2**self.t)
        return params - self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


def init_toy_ae(latent_dim: int, input_dim: int, rng: np.random.Generator) -> ToyAEModel:
    """Small random initialization; log-variance head starts near var = 1."""

    return ToyAEModel(
        w_mu=rng.normal(scale=1.0 / np.sqrt(input_dim), size=(latent_dim, input_dim)),
        b_mu=np.zeros(latent_dim),
        w_lv=rng.normal(scale=0.01 / np.sqrt(input_dim), size=(latent_dim, input_dim)),
        b_lv=np.zeros(latent_dim),
        w_dec=rng.normal(scale=1.0 / np.sqrt(latent_dim), size=(input_dim, latent_dim)),
        b_dec=np.zeros(input_dim),
    )


def train_toy_linear_ae(
    tiles: list[tuple[Pointmap, Raymap]], config: ToyAEConfig | None = None
) -> ToyAETrainResult:
    """Trains the toy VAE with Adam on the full objective.

    Deterministic in config.seed. Raises RuntimeError if the loss diverges
    (becomes non-finite).
    """

    config = ToyAEConfig() if config is None else config
    points, rays, pixel_weights, valid = tiles_to_arrays(tiles)
    batch = points.shape[0]
    input_dim = points[0].size + rays[0].size
    rng = np.random.default_rng(config.seed)
    model = init_toy_ae(config.latent_dim, input_dim, rng)
    params = model.flatten()
    adam = _Adam(params.size, config.learning_rate)

    losses, recs, kls, grads_curve = [], [], [], []
    for step in range(config.steps + 1):
        model = ToyAEModel.unflatten(params, config.latent_dim, input_dim)
        eps = rng.standard_normal((batch, config.latent_dim))
        try:
            total, comps, grads = toy_ae_objective(
                model, points, rays, pixel_weights, valid, eps, config.weights
            )
        except ValueError as exc:
            # variance under/overflow inside the objective is divergence too
            raise RuntimeError(f"training diverged at step {step}: {exc}") from exc
        if not np.isfinite(total):
            raise RuntimeError(f"training diverged at step {step}: loss={total}")
        losses.append(total)
        recs.append(comps["rec"])
        kls.append(comps["kl"])
        grads_curve.append(comps["grad"])
        if step < config.steps:
            params = adam.step(params, grads.flatten())

    return ToyAETrainResult(
        model=model,
        loss_curve=np.array(losses),
        rec_curve=np.array(recs),
        kl_curve=np.array(kls),
        grad_curve=np.array(grads_curve),
    )
