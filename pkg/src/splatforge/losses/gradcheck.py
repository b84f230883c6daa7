"""Central finite-difference verification of analytic gradients."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

# Relative error denominators are floored here, so gradients smaller than
# this are compared absolutely; keeps finite-difference roundoff (~1e-12
# for order-1 losses) from registering as large relative error.
_DENOM_FLOOR = 1e-6


@dataclass(frozen=True)
class GradientCheckReport:
    """Outcome of comparing an analytic gradient to finite differences."""

    max_rel_error: float
    worst_index: int
    n_checked: int
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_rel_error <= self.tolerance


def check_gradients(
    fn: Callable[[np.ndarray], tuple[float, np.ndarray]],
    point: np.ndarray,
    epsilon: float = 1e-5,
    tolerance: float = 1e-4,
    max_coords: int | None = None,
    rng: np.random.Generator | None = None,
) -> GradientCheckReport:
    """Compares fn's analytic gradient to central finite differences.

    Args:
        fn: maps a flat float64 vector to (loss value, flat gradient).
        point: evaluation point (flattened internally).
        epsilon: central-difference step.
        tolerance: maximum accepted relative error.
        max_coords: if set, check a random subset of coordinates of this size
            (for large parameter vectors).
        rng: generator for subset selection; required if max_coords is set.

    Returns:
        GradientCheckReport; .passed is True when the maximum elementwise
        relative error is within tolerance.
    """

    point = np.asarray(point, dtype=np.float64).reshape(-1)
    _, analytic = fn(point)
    analytic = np.asarray(analytic, dtype=np.float64).reshape(-1)
    if analytic.shape != point.shape:
        raise ValueError(
            f"gradient shape {analytic.shape} != point shape {point.shape}"
        )

    coords = np.arange(point.size)
    if max_coords is not None and max_coords < point.size:
        if rng is None:
            rng = np.random.default_rng(0)
        coords = rng.choice(point.size, size=max_coords, replace=False)

    max_rel = 0.0
    worst = -1
    for i in coords:
        shifted = point.copy()
        shifted[i] = point[i] + epsilon
        plus, _ = fn(shifted)
        shifted[i] = point[i] - epsilon
        minus, _ = fn(shifted)
        fd = (plus - minus) / (2.0 * epsilon)
        denom = max(abs(fd), abs(analytic[i]), _DENOM_FLOOR)
        rel = abs(fd - analytic[i]) / denom
        if rel > max_rel:
            max_rel = rel
            worst = int(i)
    return GradientCheckReport(
        max_rel_error=max_rel,
        worst_index=worst,
        n_checked=len(coords),
        tolerance=tolerance,
    )
