"""Variance-preserving diffusion: schedules, v-algebra, DDIM sampling."""

from .oracles import (
    DenoiserFn,
    MixtureComponent,
    delta_data_oracle,
    gaussian_mixture_oracle,
    gm_posterior_v,
)
from .sampler import ddim_step, sample, sample_trajectory, timestep_sequence
from .schedule import (
    SCHEDULE_KINDS,
    NoiseSchedule,
    eps_from_v,
    forward_diffuse,
    make_schedule,
    rescale_zero_terminal_snr,
    v_from,
    x0_from_v,
)

__all__ = [
    "SCHEDULE_KINDS",
    "DenoiserFn",
    "MixtureComponent",
    "NoiseSchedule",
    "ddim_step",
    "delta_data_oracle",
    "eps_from_v",
    "forward_diffuse",
    "gaussian_mixture_oracle",
    "gm_posterior_v",
    "make_schedule",
    "rescale_zero_terminal_snr",
    "sample",
    "sample_trajectory",
    "timestep_sequence",
    "v_from",
    "x0_from_v",
]
