"""Rendering: Gaussian splatting rasterizer and ground-truth ray tracer."""

from .raytrace import Box, Plane, Primitive, Sphere, SyntheticScene, raytrace_synthetic
from .splatting import ALPHA_FLOOR, MAX_CONDITION, render_reference, render_tiled
from .types import RenderedImage

__all__ = [
    "ALPHA_FLOOR",
    "MAX_CONDITION",
    "Box",
    "Plane",
    "Primitive",
    "RenderedImage",
    "Sphere",
    "SyntheticScene",
    "raytrace_synthetic",
    "render_reference",
    "render_tiled",
]
