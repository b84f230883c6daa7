"""HTTP wrapper around the batch pipeline.

The app owns a workspace directory; every path in a request is resolved
against it and must stay inside (absolute paths and .. escapes are
rejected), so a remote deployment only ever touches its own tree. Run
standalone with:

    SPLATFORGE_WORKSPACE=/srv/scenes uvicorn splatforge.service:create_app --factory

(the workspace defaults to the current directory when the variable is
unset) or mount in process via the CLI, which is a thin client of these
routes.
"""

from __future__ import annotations

import os
from pathlib import Path

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import FileResponse

from .. import __version__, pipeline
from .schemas import (
    EvalRequest,
    EvalResponse,
    HealthResponse,
    ReconstructRequest,
    ReconstructResponse,
    RenderRequest,
    RenderResponse,
    SamplerDemoRequest,
    SamplerDemoResponse,
    SynthesizeRequest,
    SynthesizeResponse,
)


def create_app(workspace: str | Path | None = None) -> FastAPI:
    """Builds the service bound to a workspace directory.

    Falls back to the SPLATFORGE_WORKSPACE environment variable, then the
    current directory, so uvicorn's argument-less --factory mode can still
    pin a workspace.
    """

    if workspace is None:
        workspace = os.environ.get("SPLATFORGE_WORKSPACE") or Path.cwd()
    root = Path(workspace).resolve()
    app = FastAPI(title="splatforge", version=__version__)
    app.state.workspace = root
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    def resolve(relative: str) -> Path:
        # Workspace confinement: no absolute paths, no .. escapes, and no
        # symlink detours (resolve() flattens them before the check).
        candidate = Path(relative)
        if candidate.is_absolute():
            raise HTTPException(400, f"absolute paths are not allowed: {relative}")
        resolved = (root / candidate).resolve()
        if resolved != root and root not in resolved.parents:
            raise HTTPException(400, f"path escapes the workspace: {relative}")
        return resolved

    def run(fn, *args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except FileNotFoundError as exc:
            raise HTTPException(404, str(exc)) from exc
        except ValueError as exc:
            raise HTTPException(422, str(exc)) from exc

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(status="ok", version=__version__)

    @app.post("/synthesize", response_model=SynthesizeResponse)
    def synthesize(req: SynthesizeRequest) -> SynthesizeResponse:
        config = pipeline.SynthesisConfig(
            seed=req.seed,
            complexity=req.complexity,
            num_views=req.num_views,
            width=req.width,
            height=req.height,
            path_kind=req.path_kind,
            offset_scale=req.offset_scale,
            up=req.up,
        )
        report = run(pipeline.synthesize_views, config, resolve(req.out_dir))
        return SynthesizeResponse(**report)

    @app.post("/reconstruct", response_model=ReconstructResponse)
    def reconstruct(req: ReconstructRequest) -> ReconstructResponse:
        report = run(
            pipeline.reconstruct_scene,
            resolve(req.manifest),
            resolve(req.out),
            opacity_threshold=req.opacity_threshold,
            opacity_logit=req.opacity_logit,
            log_scale=req.log_scale,
        )
        return ReconstructResponse(**report)

    @app.post("/render", response_model=RenderResponse)
    def render(req: RenderRequest) -> RenderResponse:
        report = run(
            pipeline.render_asset,
            resolve(req.asset),
            resolve(req.manifest),
            resolve(req.out_dir),
            tile_size=req.tile_size,
            workers=req.workers,
            path_kind=req.path_kind,
            num_views=req.num_views,
        )
        return RenderResponse(**report)

    @app.post("/eval", response_model=EvalResponse)
    def evaluate(req: EvalRequest) -> EvalResponse:
        rows = run(
            pipeline.evaluate_asset,
            resolve(req.asset),
            resolve(req.manifest),
            tile_size=req.tile_size,
        )
        return EvalResponse(rows=rows)

    @app.post("/sampler-demo", response_model=SamplerDemoResponse)
    def sampler_demo(req: SamplerDemoRequest) -> SamplerDemoResponse:
        report = run(
            pipeline.run_sampler_demo,
            resolve(req.out_dir),
            schedule=req.schedule,
            total_steps=req.total_steps,
            steps=req.steps,
            eta=req.eta,
            seed=req.seed,
            oracle=req.oracle,
            num_samples=req.num_samples,
            dim=req.dim,
        )
        return SamplerDemoResponse(**report)

    @app.get("/files/{path:path}")
    def files(path: str) -> FileResponse:
        target = resolve(path)
        if not target.is_file():
            raise HTTPException(404, f"no such file: {path}")
        return FileResponse(target)

    return app
