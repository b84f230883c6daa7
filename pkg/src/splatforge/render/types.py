"""Rendered image container shared by the splatting and ray-tracing paths."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class RenderedImage:
    """A rendered view with coverage and (optionally) expected depth.

    Attributes:
        rgb: (H, W, 3) float64 colors in [0, 1].
        alpha: (H, W) float64 coverage in [0, 1]; 1 - accumulated transmittance
            for splatting, the hit mask for ray tracing.
        depth: optional (H, W) float64 expected depth (camera-frame z).
            Zero where alpha is zero.
        skipped_degenerate: number of Gaussians dropped because their projected
            covariance was numerically degenerate (condition number > 1e12).
    """

    rgb: np.ndarray
    alpha: np.ndarray
    depth: np.ndarray | None = None
    skipped_degenerate: int = 0

    def __post_init__(self) -> None:
        rgb = np.asarray(self.rgb, dtype=np.float64)
        alpha = np.asarray(self.alpha, dtype=np.float64)
        if rgb.ndim != 3 or rgb.shape[2] != 3:
            raise ValueError(f"rgb must be (H, W, 3), got {rgb.shape}")
        if alpha.shape != rgb.shape[:2]:
            raise ValueError(
                f"alpha shape {alpha.shape} does not match rgb {rgb.shape[:2]}"
            )
        if not np.isfinite(rgb).all() or not np.isfinite(alpha).all():
            raise ValueError("rendered channels must be finite")
        if rgb.min() < 0.0 or rgb.max() > 1.0:
            raise ValueError("rgb must lie in [0, 1]")
        if alpha.min() < 0.0 or alpha.max() > 1.0:
            raise ValueError("alpha must lie in [0, 1]")
        depth = self.depth
        if depth is not None:
            depth = np.asarray(depth, dtype=np.float64)
            if depth.shape != alpha.shape:
                raise ValueError(
                    f"depth shape {depth.shape} does not match {alpha.shape}"
                )
            if not np.isfinite(depth).all():
                raise ValueError("depth must be finite")
            depth.flags.writeable = False
        rgb.flags.writeable = False
        alpha.flags.writeable = False
        object.__setattr__(self, "rgb", rgb)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "depth", depth)

    @property
    def height(self) -> int:
        return self.rgb.shape[0]

    @property
    def width(self) -> int:
        return self.rgb.shape[1]
