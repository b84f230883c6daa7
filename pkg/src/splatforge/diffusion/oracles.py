"""Closed-form v-predictors for analytically tractable data distributions.

These serve as exact denoisers when validating the sampler: for delta and
Gaussian-mixture data the posterior mean E[x0 | x_t] has a closed form, and
the matching v prediction follows from x0 = alpha_t * x_t - sigma_t * v.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np
from scipy.special import logsumexp
from scipy.stats import multivariate_normal

from .schedule import NoiseSchedule

DenoiserFn = Callable[[np.ndarray, int], np.ndarray]

MixtureComponent = tuple[float, np.ndarray, np.ndarray]


def _v_from_x0_hat(
    x_t: np.ndarray, x0_hat: np.ndarray, t: int, schedule: NoiseSchedule
) -> np.ndarray:
    alpha, sigma = schedule.coeffs(t)
    if sigma <= 0.0:
        raise ValueError(f"posterior v is undefined at noiseless t={t}")
    return (alpha * x_t - x0_hat) / sigma


def delta_data_oracle(x_star: np.ndarray, schedule: NoiseSchedule) -> DenoiserFn:
    """Exact v-predictor for data concentrated at a single point x_star."""

    x_star = np.asarray(x_star, dtype=np.float64)

    def denoiser(x_t: np.ndarray, t: int) -> np.ndarray:
        x_t = np.asarray(x_t, dtype=np.float64)
        return _v_from_x0_hat(x_t, np.broadcast_to(x_star, x_t.shape), t, schedule)

    return denoiser


def _normalize_mixture(
    mixture: Sequence[MixtureComponent],
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Validates components, returning (weights (n,), means (n,d), covs (n,d,d))."""

    if len(mixture) == 0:
        raise ValueError("mixture must have at least one component")
    weights = np.array([float(w) for w, _, _ in mixture], dtype=np.float64)
    if (weights < 0.0).any():
        raise ValueError("mixture weights must be non-negative")
    if abs(weights.sum() - 1.0) > 1e-9:
        raise ValueError(f"mixture weights must sum to 1, got {weights.sum()!r}")
    means = np.stack(
        [np.atleast_1d(np.asarray(m, dtype=np.float64)) for _, m, _ in mixture]
    )
    if means.ndim != 2:
        raise ValueError("mixture means must be vectors of a common dimension")
    dim = means.shape[1]
    covs = []
    for _, _, cov in mixture:
        cov = np.asarray(cov, dtype=np.float64)
        if cov.ndim == 0:
            cov = float(cov) * np.eye(dim)
        elif cov.ndim == 1:
            cov = np.diag(cov)
        if cov.shape != (dim, dim):
            raise ValueError(f"covariance shape {cov.shape} does not match dim {dim}")
        if not np.allclose(cov, cov.T, atol=1e-12):
            raise ValueError("covariances must be symmetric")
        if np.linalg.eigvalsh(cov).min() < -1e-12:
            raise ValueError("covariances must be positive semi-definite")
        covs.append(cov)
    return weights, means, np.stack(covs)


def gm_posterior_v(
    x_t: np.ndarray,
    t: int,
    mixture: Sequence[MixtureComponent],
    schedule: NoiseSchedule,
) -> np.ndarray:
    """Exact v-prediction for Gaussian-mixture data.

    For data x0 ~ sum_i w_i N(m_i, C_i) the noisy marginal at t is the
    mixture of N(alpha m_i, alpha^2 C_i + sigma^2 I); the posterior mean is
    the responsibility-weighted blend of the per-component linear estimators
    m_i + alpha C_i (alpha^2 C_i + sigma^2 I)^{-1} (x_t - alpha m_i).
    Responsibilities are computed in log space for numerical stability.

    Args:
        x_t: states of shape (..., d), the last axis being the data dim.
        t: timestep with sigma_t > 0.
        mixture: components as (weight, mean, covariance); covariance may be
            a scalar, a diagonal vector, or a full (d, d) PSD matrix.
        schedule: coefficient source.

    Returns:
        v prediction, same shape as x_t.
    """

    x_t = np.asarray(x_t, dtype=np.float64)
    if x_t.ndim < 1:
        raise ValueError("x_t must have at least one axis (the data dimension)")
    weights, means, covs = _normalize_mixture(mixture)
    dim = means.shape[1]
    if x_t.shape[-1] != dim:
        raise ValueError(f"x_t last axis {x_t.shape[-1]} does not match dim {dim}")
    alpha, sigma = schedule.coeffs(t)
    if sigma <= 0.0:
        raise ValueError(f"posterior v is undefined at noiseless t={t}")

    log_resp = np.empty((len(weights),) + x_t.shape[:-1])
    post_means = np.empty((len(weights),) + x_t.shape)
    eye = np.eye(dim)
    with np.errstate(divide="ignore"):
        log_w = np.log(weights)
    for i in range(len(weights)):
        marginal_cov = alpha**2 * covs[i] + sigma**2 * eye
        log_resp[i] = log_w[i] + multivariate_normal(
            mean=alpha * means[i], cov=marginal_cov
        ).logpdf(x_t)
        # Gain of the per-component posterior mean, alpha C (a^2 C + s^2 I)^-1.
        gain = alpha * covs[i] @ np.linalg.inv(marginal_cov)
        post_means[i] = means[i] + (x_t - alpha * means[i]) @ gain.T
    resp = np.exp(log_resp - logsumexp(log_resp, axis=0, keepdims=True))
    x0_hat = np.einsum("k...,k...d->...d", resp, post_means)
    return _v_from_x0_hat(x_t, x0_hat, t, schedule)


def gaussian_mixture_oracle(
    mixture: Sequence[MixtureComponent], schedule: NoiseSchedule
) -> DenoiserFn:
    """Wraps gm_posterior_v as a (x_t, t) -> v_hat denoiser."""

    weights, means, covs = _normalize_mixture(mixture)
    components = list(zip(weights, means, covs))

    def denoiser(x_t: np.ndarray, t: int) -> np.ndarray:
        return gm_posterior_v(x_t, t, components, schedule)

    return denoiser
