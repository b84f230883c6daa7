"""Variance-preserving noise schedules and the v-parameterization algebra.

A schedule holds per-timestep signal/noise coefficients (alpha_t, sigma_t)
with alpha_t^2 + sigma_t^2 = 1, alpha_0 = 1 (clean data) and alpha
non-increasing toward pure noise at t = T. The forward process is
x_t = alpha_t * x0 + sigma_t * eps; the v-parameterization
v = alpha_t * eps - sigma_t * x0 inverts cleanly thanks to variance
preservation: x0 = alpha_t * x_t - sigma_t * v and
eps = sigma_t * x_t + alpha_t * v.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SCHEDULE_KINDS = ("linear-beta", "cosine")

# Linear-beta endpoints (per-step variances beta_1 .. beta_T).
_BETA_START = 1e-4
_BETA_END = 0.02
# Cosine schedule small offset keeping beta_1 finite.
_COSINE_S = 0.008


@dataclass(frozen=True)
class NoiseSchedule:
    """Signal (alpha) and noise (sigma) coefficient arrays, indices 0..T."""

    alphas: np.ndarray
    sigmas: np.ndarray

    def __post_init__(self) -> None:
        alphas = np.asarray(self.alphas, dtype=np.float64).copy()
        sigmas = np.asarray(self.sigmas, dtype=np.float64).copy()
        if alphas.ndim != 1 or alphas.shape != sigmas.shape or alphas.size < 2:
            raise ValueError(
                f"need matching 1-D arrays of length T+1 >= 2, got "
                f"{alphas.shape} and {sigmas.shape}"
            )
        if alphas[0] != 1.0 or sigmas[0] != 0.0:
            raise ValueError("schedule must start clean: alpha_0 = 1, sigma_0 = 0")
        if alphas.min() < -1e-12 or alphas.max() > 1.0 + 1e-12:
            raise ValueError("alphas must lie in [0, 1]")
        if sigmas.min() < -1e-12 or sigmas.max() > 1.0 + 1e-12:
            raise ValueError("sigmas must lie in [0, 1]")
        vp = alphas**2 + sigmas**2
        if np.abs(vp - 1.0).max() > 1e-9:
            raise ValueError("schedule is not variance preserving")
        if (np.diff(alphas) > 1e-12).any():
            raise ValueError("alphas must be non-increasing")
        alphas.flags.writeable = False
        sigmas.flags.writeable = False
        object.__setattr__(self, "alphas", alphas)
        object.__setattr__(self, "sigmas", sigmas)

    @property
    def num_steps(self) -> int:
        """T: the index of the fully-noised endpoint."""
        return self.alphas.size - 1

    def _check_t(self, t: int) -> int:
        t = int(t)
        if not 0 <= t <= self.num_steps:
            raise ValueError(f"t must lie in [0, {self.num_steps}], got {t}")
        return t

    def coeffs(self, t: int) -> tuple[float, float]:
        """(alpha_t, sigma_t) with t range-checked."""
        t = self._check_t(t)
        return float(self.alphas[t]), float(self.sigmas[t])


def make_schedule(kind: str, total_steps: int) -> NoiseSchedule:
    """Builds a variance-preserving schedule of the given kind.

    linear-beta: per-step variances beta_t linear from 1e-4 to 0.02, with
    alpha_t the square root of the cumulative product of (1 - beta).
    cosine: squared-cosine signal trajectory with offset s = 0.008.

    Args:
        kind: "linear-beta" or "cosine".
        total_steps: T >= 1.

    Returns:
        NoiseSchedule with T+1 entries.
    """

    if total_steps < 1:
        raise ValueError(f"total_steps must be >= 1, got {total_steps}")
    if kind == "linear-beta":
        betas = np.linspace(_BETA_START, _BETA_END, total_steps)
        alpha_bar = np.concatenate([[1.0], np.cumprod(1.0 - betas)])
    elif kind == "cosine":
        t_frac = np.arange(total_steps + 1, dtype=np.float64) / total_steps
        f = np.cos((t_frac + _COSINE_S) / (1.0 + _COSINE_S) * np.pi / 2.0) ** 2
        alpha_bar = f / f[0]
        alpha_bar[0] = 1.0
    else:
        raise ValueError(f"unknown schedule kind {kind!r}; expected {SCHEDULE_KINDS}")
    alphas = np.sqrt(alpha_bar)
    sigmas = np.sqrt(1.0 - alpha_bar)
    alphas[0] = 1.0
    sigmas[0] = 0.0
    return NoiseSchedule(alphas=alphas, sigmas=sigmas)


def rescale_zero_terminal_snr(schedule: NoiseSchedule) -> NoiseSchedule:
    """Rescales the signal trajectory so the terminal SNR is exactly zero.

    The alpha (sqrt-cumulative-signal) trajectory is mapped affinely so that
    alpha_T becomes 0 while alpha_0 stays 1; sigmas are recomputed to keep
    variance preservation. Interior SNR ordering is preserved.
    """

    a = schedule.alphas
    a_last = a[-1]
    denom = 1.0 - a_last
    if denom <= 0.0:
        raise ValueError("degenerate schedule: terminal alpha is 1")
    alphas = (a - a_last) / denom
    alphas[0] = 1.0
    alphas[-1] = 0.0
    sigmas = np.sqrt(np.clip(1.0 - alphas**2, 0.0, 1.0))
    sigmas[0] = 0.0
    sigmas[-1] = 1.0
    return NoiseSchedule(alphas=alphas, sigmas=sigmas)


def _check_shapes(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"shapes differ: {a.shape} vs {b.shape}")
    return a, b


def forward_diffuse(
    x0: np.ndarray, t: int, eps: np.ndarray, schedule: NoiseSchedule
) -> np.ndarray:
    """x_t = alpha_t * x0 + sigma_t * eps."""

    x0, eps = _check_shapes(x0, eps)
    alpha, sigma = schedule.coeffs(t)
    return alpha * x0 + sigma * eps


def v_from(
    x0: np.ndarray, eps: np.ndarray, t: int, schedule: NoiseSchedule
) -> np.ndarray:
    """v-target: v = alpha_t * eps - sigma_t * x0."""

    x0, eps = _check_shapes(x0, eps)
    alpha, sigma = schedule.coeffs(t)
    return alpha * eps - sigma * x0


def x0_from_v(
    x_t: np.ndarray, v: np.ndarray, t: int, schedule: NoiseSchedule
) -> np.ndarray:
    """Recovers the clean signal: x0 = alpha_t * x_t - sigma_t * v."""

    x_t, v = _check_shapes(x_t, v)
    alpha, sigma = schedule.coeffs(t)
    return alpha * x_t - sigma * v


def eps_from_v(
    x_t: np.ndarray, v: np.ndarray, t: int, schedule: NoiseSchedule
) -> np.ndarray:
    """Recovers the noise: eps = sigma_t * x_t + alpha_t * v."""

    x_t, v = _check_shapes(x_t, v)
    alpha, sigma = schedule.coeffs(t)
    return sigma * x_t + alpha * v
