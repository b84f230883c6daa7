"""Deterministic and stochastic DDIM sampling driven by a v-predictor.

A denoiser is any callable (x_t, t) -> v_hat operating elementwise over
leading batch axes. Sampling walks a strictly decreasing timestep sequence
from T to 0, converting each v prediction into clean-signal and noise
estimates and blending them at the target timestep.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from .schedule import NoiseSchedule, eps_from_v, x0_from_v

DenoiserFn = Callable[[np.ndarray, int], np.ndarray]


def timestep_sequence(total_steps: int, num_steps: int) -> list[int]:
    """Strictly decreasing integer timesteps from T down to 0.

    Uses the uniform stride ts_i = T - (i * T) // K; when num_steps exceeds
    total_steps the collapsed duplicates are dropped, so at most T + 1
    distinct timesteps are returned.
    """

    if total_steps < 1:
        raise ValueError(f"total_steps must be >= 1, got {total_steps}")
    if num_steps < 1:
        raise ValueError(f"num_steps must be >= 1, got {num_steps}")
    out = [total_steps]
    for i in range(1, num_steps + 1):
        t = total_steps - (i * total_steps) // num_steps
        if t < out[-1]:
            out.append(t)
    return out


def ddim_step(
    x_t: np.ndarray,
    v_hat: np.ndarray,
    t: int,
    s: int,
    eta: float,
    schedule: NoiseSchedule,
    noise: np.ndarray | None = None,
) -> np.ndarray:
    """One reverse step t -> s of the DDIM family.

    x_s = alpha_s * x0_hat + sqrt(sigma_s^2 - (eta * tau)^2) * eps_hat
        + eta * tau * noise, with
    tau = sqrt((sigma_s^2 / sigma_t^2) * (1 - alpha_t^2 / alpha_s^2)).
    eta = 0 is the deterministic probability-flow step; eta = 1 matches the
    ancestral posterior variance.

    Args:
        x_t: current state.
        v_hat: v prediction at t, same shape as x_t.
        t: source timestep, 0 < t <= T.
        s: target timestep, 0 <= s < t.
        eta: stochasticity in [0, 1].
        schedule: coefficient source.
        noise: standard normal draw, required when eta > 0.

    Returns:
        State at timestep s.
    """

    t = int(t)
    s = int(s)
    if not 0 <= s < t <= schedule.num_steps:
        raise ValueError(
            f"need 0 <= s < t <= {schedule.num_steps}, got s={s}, t={t}"
        )
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"eta must lie in [0, 1], got {eta}")
    x0_hat = x0_from_v(x_t, v_hat, t, schedule)
    eps_hat = eps_from_v(x_t, v_hat, t, schedule)
    alpha_s, sigma_s = schedule.coeffs(s)
    alpha_t, sigma_t = schedule.coeffs(t)
    # alpha_s > 0 because s < T, sigma_t > 0 because t > 0.
    tau_sq = (sigma_s**2 / sigma_t**2) * (1.0 - alpha_t**2 / alpha_s**2)
    tau_sq = max(tau_sq, 0.0)
    dir_coeff = np.sqrt(max(sigma_s**2 - eta**2 * tau_sq, 0.0))
    x_s = alpha_s * x0_hat + dir_coeff * eps_hat
    if eta > 0.0:
        if noise is None:
            raise ValueError("noise is required when eta > 0")
        noise = np.asarray(noise, dtype=np.float64)
        if noise.shape != x_s.shape:
            raise ValueError(
                f"noise shape {noise.shape} does not match state {x_s.shape}"
            )
        x_s = x_s + eta * np.sqrt(tau_sq) * noise
    return x_s


def sample(
    denoiser: DenoiserFn,
    schedule: NoiseSchedule,
    num_steps: int,
    eta: float,
    seed: int,
    shape: tuple[int, ...],
) -> np.ndarray:
    """Draws a sample by iterating ddim_step from pure noise at t = T.

    The initial state is a standard normal draw, which matches the forward
    process endpoint exactly when the schedule has zero terminal SNR. All
    randomness flows from the seed, so identical arguments reproduce the
    output bit for bit.

    Args:
        denoiser: v-predictor (x_t, t) -> v_hat.
        schedule: noise schedule to walk.
        num_steps: number of reverse steps (capped by the schedule length).
        eta: stochasticity in [0, 1].
        seed: RNG seed for the initial state and any step noise.
        shape: state shape; leading axes act as independent batch entries.

    Returns:
        The state at t = 0.
    """

    return _walk(denoiser, schedule, num_steps, eta, seed, shape, record=None)[1]


def sample_trajectory(
    denoiser: DenoiserFn,
    schedule: NoiseSchedule,
    num_steps: int,
    eta: float,
    seed: int,
    shape: tuple[int, ...],
) -> tuple[list[int], np.ndarray]:
    """Like sample but records every intermediate state.

    Returns:
        (timesteps, states) where states[i] is the state at timesteps[i];
        states has shape (len(timesteps), *shape).
    """

    states: list[np.ndarray] = []
    timesteps, _ = _walk(
        denoiser, schedule, num_steps, eta, seed, shape, record=states.append
    )
    return timesteps, np.stack(states, axis=0)


def _walk(
    denoiser: DenoiserFn,
    schedule: NoiseSchedule,
    num_steps: int,
    eta: float,
    seed: int,
    shape: tuple[int, ...],
    record: Callable[[np.ndarray], None] | None,
) -> tuple[list[int], np.ndarray]:
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"eta must lie in [0, 1], got {eta}")
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(shape)
    timesteps = timestep_sequence(schedule.num_steps, num_steps)
    if record is not None:
        record(x)
    for t, s in zip(timesteps[:-1], timesteps[1:]):
        v_hat = denoiser(x, t)
        noise = rng.standard_normal(shape) if eta > 0.0 else None
        x = ddim_step(x, v_hat, t, s, eta, schedule, noise=noise)
        if record is not None:
            record(x)
    return timesteps, x
