"""VAE losses, gradient verification, evaluation metrics, and the toy trainer."""

from .gradcheck import GradientCheckReport, check_gradients
from .metrics import (
    IMAGE_METRICS,
    PSNR_CAP_DB,
    SSIM_SIGMA,
    SSIM_WINDOW,
    UNAVAILABLE_METRICS,
    metric_absrel,
    metric_delta,
    metric_duv,
    metric_psnr,
    metric_ssim,
)
from .toyae import (
    ToyAEConfig,
    ToyAEModel,
    ToyAETrainResult,
    init_toy_ae,
    make_tile_dataset,
    tiles_to_arrays,
    toy_ae_objective,
    train_toy_linear_ae,
)
from .vae import (
    LatentStats,
    LossWeights,
    loss_grad,
    loss_grad_with_grad,
    loss_kl,
    loss_kl_with_grad,
    loss_photometric_l2,
    loss_rec,
    loss_rec_with_grad,
    loss_total,
)

__all__ = [
    "GradientCheckReport",
    "IMAGE_METRICS",
    "LatentStats",
    "LossWeights",
    "PSNR_CAP_DB",
    "SSIM_SIGMA",
    "SSIM_WINDOW",
    "ToyAEConfig",
    "ToyAEModel",
    "ToyAETrainResult",
    "UNAVAILABLE_METRICS",
    "check_gradients",
    "init_toy_ae",
    "loss_grad",
    "loss_grad_with_grad",
    "loss_kl",
    "loss_kl_with_grad",
    "loss_photometric_l2",
    "loss_rec",
    "loss_rec_with_grad",
    "loss_total",
    "make_tile_dataset",
    "metric_absrel",
    "metric_delta",
    "metric_duv",
    "metric_psnr",
    "metric_ssim",
    "tiles_to_arrays",
    "toy_ae_objective",
    "train_toy_linear_ae",
]
