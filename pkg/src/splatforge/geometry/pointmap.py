"""Pointmap and raymap value types."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["Pointmap", "Raymap"]


@dataclass(frozen=True)
class Pointmap:
    """H x W grid of scene-frame 3D points with a per-pixel validity mask."""

    points: np.ndarray
    valid: np.ndarray

    def __post_init__(self) -> None:
        points = np.asarray(self.points, dtype=np.float64).copy()
        if points.ndim != 3 or points.shape[2] != 3:
            raise ValueError(f"points must be (H, W, 3), got {points.shape}")
        valid = np.asarray(self.valid, dtype=bool).copy()
        if valid.shape != points.shape[:2]:
            raise ValueError("valid mask shape does not match points")
        if not np.all(np.isfinite(points[valid])):
            raise ValueError("non-finite coordinates at valid pixels")
        points.flags.writeable = False
        valid.flags.writeable = False
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "valid", valid)

    @property
    def height(self) -> int:
        return self.points.shape[0]

    @property
    def width(self) -> int:
        return self.points.shape[1]

    def valid_points(self) -> np.ndarray:
        """Flat (N, 3) array of points at valid pixels."""
        return self.points[self.valid]

    def with_points(self, points: np.ndarray) -> "Pointmap":
        """New pointmap with the same mask and replaced coordinates."""
        return Pointmap(points, self.valid)


@dataclass(frozen=True)
class Raymap:
    """Per-pixel ray origins and unit directions (a 6-dim pose encoding)."""

    origins: np.ndarray
    directions: np.ndarray

    def __post_init__(self) -> None:
        origins = np.asarray(self.origins, dtype=np.float64).copy()
        directions = np.asarray(self.directions, dtype=np.float64).copy()
        if origins.ndim != 3 or origins.shape[2] != 3:
            raise ValueError(f"origins must be (H, W, 3), got {origins.shape}")
        if directions.shape != origins.shape:
            raise ValueError("directions shape does not match origins")
        norms = np.linalg.norm(directions, axis=-1)
        if np.abs(norms - 1.0).max() > 1e-9:
            raise ValueError("ray directions must be unit length")
        origins.flags.writeable = False
        directions.flags.writeable = False
        object.__setattr__(self, "origins", origins)
        object.__setattr__(self, "directions", directions)

    @property
    def height(self) -> int:
        return self.origins.shape[0]

    @property
    def width(self) -> int:
        return self.origins.shape[1]

    def as_array(self) -> np.ndarray:
        """Stacked (H, W, 6) origin + direction encoding."""
        return np.concatenate([self.origins, self.directions], axis=-1)
