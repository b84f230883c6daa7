"""Request and response models for the HTTP service.

All file references are paths relative to the service workspace; the app
rejects anything that resolves outside it.
"""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, Field

PathKind = Literal["circular", "forward-facing", "spline"]


class SynthesizeRequest(BaseModel):
    out_dir: str = "."
    seed: int = 0
    complexity: int = Field(default=3, ge=0)
    num_views: int = Field(default=16, ge=1)
    width: int = Field(default=512, ge=8)
    height: int = Field(default=512, ge=8)
    path_kind: PathKind = "forward-facing"
    offset_scale: float = Field(default=0.05, ge=0.0)
    up: tuple[float, float, float] = (0.0, 1.0, 0.0)


class SynthesizeResponse(BaseModel):
    manifest: str
    images: list[str]
    pointmaps: list[str]
    num_views: int
    num_primitives: int
    normalization_scale: float
    first_view_mean_depth: float
    elapsed_s: float


class ReconstructRequest(BaseModel):
    manifest: str
    out: str = "scene.splat"
    opacity_threshold: float = Field(default=0.01, ge=0.0)
    opacity_logit: float = 6.0
    log_scale: float = -0.7


class ReconstructResponse(BaseModel):
    asset: str
    num_gaussians: int
    num_before_cull: int
    num_views: int
    file_bytes: int
    elapsed_s: float


class RenderRequest(BaseModel):
    asset: str
    manifest: str
    out_dir: str = "."
    tile_size: int = Field(default=16, ge=1)
    workers: int = Field(default=1, ge=1)
    path_kind: PathKind | None = None
    num_views: int | None = Field(default=None, ge=1)


class RenderResponse(BaseModel):
    images: list[str]
    num_views: int
    num_gaussians: int
    skipped_degenerate: int
    elapsed_s: float


class EvalRequest(BaseModel):
    asset: str
    manifest: str
    tile_size: int = Field(default=16, ge=1)


class EvalResponse(BaseModel):
    rows: list[dict]


class SamplerDemoRequest(BaseModel):
    out_dir: str = "."
    schedule: Literal["linear-beta", "cosine"] = "cosine"
    total_steps: int = Field(default=1000, ge=2)
    steps: int = Field(default=50, ge=1)
    eta: float = Field(default=0.0, ge=0.0, le=1.0)
    seed: int = 0
    oracle: Literal["delta", "mixture"] = "delta"
    num_samples: int = Field(default=16, ge=1)
    dim: int = Field(default=3, ge=1)


class SamplerDemoResponse(BaseModel):
    trajectory: str
    metadata: str
    num_transitions: int
    terminal_error: float | None
    elapsed_s: float


class HealthResponse(BaseModel):
    status: str
    version: str
