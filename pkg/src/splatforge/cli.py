"""Batch command-line client for the scene pipeline.

Every subcommand is a thin client of the HTTP service: by default an
in-process app is mounted (no socket, same filesystem), and --server
points the same requests at a running deployment instead. Option
precedence is flags, then the --config JSON file's per-subcommand
section, then built-in defaults.
"""

from __future__ import annotations

import asyncio
import json
from pathlib import Path

import click
import httpx
from click.core import ParameterSource

from . import __version__

_IN_PROCESS_BASE = "http://splatforge.local"


def _parse_resolution(value) -> tuple[int, int]:
    """Accepts "WxH" strings or [W, H] pairs."""

    if isinstance(value, (list, tuple)) and len(value) == 2:
        return int(value[0]), int(value[1])
    parts = str(value).lower().split("x")
    if len(parts) != 2:
        raise click.BadParameter(f"expected WxH, got {value!r}")
    try:
        return int(parts[0]), int(parts[1])
    except ValueError:
        raise click.BadParameter(f"expected WxH, got {value!r}")


def _parse_triple(value) -> tuple[float, float, float]:
    if isinstance(value, (list, tuple)) and len(value) == 3:
        return tuple(float(v) for v in value)
    parts = str(value).split(",")
    if len(parts) != 3:
        raise click.BadParameter(f"expected X,Y,Z, got {value!r}")
    return tuple(float(p) for p in parts)


class Client:
    """Posts pipeline requests either in process or to a remote server."""

    def __init__(self, server: str | None):
        self.server = server.rstrip("/") if server else None

    def path(self, value: str | Path) -> str:
        # In-process mode mounts the filesystem root as the workspace, so
        # local paths pass through resolved; remote paths are the caller's
        # words, interpreted relative to the server's workspace.
        if self.server is not None:
            return str(value)
        return str(Path(value).expanduser().resolve().relative_to("/"))

    def post(self, route: str, payload: dict) -> dict:
        if self.server is not None:
            response = httpx.post(
                f"{self.server}{route}", json=payload, timeout=None
            )
        else:
            response = asyncio.run(self._post_in_process(route, payload))
        if response.status_code != 200:
            try:
                detail = response.json().get("detail", response.text)
            except ValueError:
                detail = response.text
            raise click.ClickException(f"{route} failed: {detail}")
        return response.json()

    async def _post_in_process(self, route: str, payload: dict) -> httpx.Response:
        from .service import create_app

        transport = httpx.ASGITransport(app=create_app(Path("/")))
        async with httpx.AsyncClient(
            transport=transport, base_url=_IN_PROCESS_BASE, timeout=None
        ) as client:
            return await client.post(route, json=payload)


def _merged(ctx: click.Context, **values) -> dict:
    """Applies flag > config-file > default precedence per option."""

    config = ctx.obj.get("config", {}) or {}
    section = config.get(ctx.command.name, {})
    out = {}
    for key, value in values.items():
        from_flag = ctx.get_parameter_source(key) == ParameterSource.COMMANDLINE
        out[key] = value if from_flag or key not in section else section[key]
    return out


def _echo_report(report: dict) -> None:
    for key, value in report.items():
        if isinstance(value, float):
            value = f"{value:.6g}"
        click.echo(f"{key}: {value}")


@click.group()
@click.version_option(__version__)
@click.option("--server", default=None, metavar="URL",
              help="Base URL of a running service; default runs in process.")
@click.option("--config", "config_path", default=None,
              type=click.Path(exists=True, dir_okay=False),
              help="JSON file with per-subcommand option defaults.")
@click.pass_context
def main(ctx: click.Context, server: str | None, config_path: str | None) -> None:
    """Deterministic batch pipeline: synthesize, reconstruct, render, eval."""

    config = {}
    if config_path is not None:
        try:
            config = json.loads(Path(config_path).read_text())
        except json.JSONDecodeError as exc:
            raise click.ClickException(f"config file is not valid JSON: {exc}")
    ctx.obj = {"client": Client(server), "config": config}


@main.command()
@click.option("--out", required=True, metavar="DIR", help="Output directory.")
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--resolution", default="512x512", show_default=True,
              help="View resolution as WxH.")
@click.option("--views", default=16, show_default=True, type=int)
@click.option("--complexity", default=3, show_default=True, type=int)
@click.option("--path", "path_kind", default="forward-facing", show_default=True,
              type=click.Choice(["circular", "forward-facing", "spline"]))
@click.option("--offset-scale", default=0.05, show_default=True, type=float)
@click.option("--up", default="0,1,0", show_default=True,
              help="Path up-vector as X,Y,Z.")
@click.pass_context
def synthesize(ctx, out, seed, resolution, views, complexity, path_kind,
               offset_scale, up):
    """Ray-trace a procedural scene into views, pointmaps and a manifest."""

    opts = _merged(ctx, seed=seed, resolution=resolution, views=views,
                   complexity=complexity, path_kind=path_kind,
                   offset_scale=offset_scale, up=up)
    width, height = _parse_resolution(opts["resolution"])
    client = ctx.obj["client"]
    report = client.post("/synthesize", {
        "out_dir": client.path(out),
        "seed": opts["seed"],
        "complexity": opts["complexity"],
        "num_views": opts["views"],
        "width": width,
        "height": height,
        "path_kind": opts["path_kind"],
        "offset_scale": opts["offset_scale"],
        "up": _parse_triple(opts["up"]),
    })
    _echo_report(report)


@main.command()
@click.option("--manifest", required=True, metavar="FILE")
@click.option("--out", default="scene.splat", show_default=True, metavar="FILE")
@click.option("--opacity-threshold", default=0.01, show_default=True, type=float)
@click.option("--opacity-logit", default=6.0, show_default=True, type=float)
@click.option("--log-scale", default=-0.7, show_default=True, type=float,
              help="Log factor on the Gaussian pixel footprint.")
@click.pass_context
def reconstruct(ctx, manifest, out, opacity_threshold, opacity_logit, log_scale):
    """Turn a captured manifest into a quantized .splat asset."""

    opts = _merged(ctx, opacity_threshold=opacity_threshold,
                   opacity_logit=opacity_logit, log_scale=log_scale)
    client = ctx.obj["client"]
    report = client.post("/reconstruct", {
        "manifest": client.path(manifest),
        "out": client.path(out),
        "opacity_threshold": opts["opacity_threshold"],
        "opacity_logit": opts["opacity_logit"],
        "log_scale": opts["log_scale"],
    })
    _echo_report(report)


@main.command()
@click.option("--asset", required=True, metavar="FILE")
@click.option("--manifest", required=True, metavar="FILE")
@click.option("--out", required=True, metavar="DIR")
@click.option("--tile-size", default=16, show_default=True, type=int)
@click.option("--workers", default=1, show_default=True, type=int)
@click.option("--path", "path_kind", default=None,
              type=click.Choice(["circular", "forward-facing", "spline"]),
              help="Render a fresh camera path instead of the source views.")
@click.option("--views", default=None, type=int,
              help="View count when --path is given.")
@click.pass_context
def render(ctx, asset, manifest, out, tile_size, workers, path_kind, views):
    """Render an exported asset from manifest cameras or a new path."""

    opts = _merged(ctx, tile_size=tile_size, workers=workers,
                   path_kind=path_kind, views=views)
    client = ctx.obj["client"]
    report = client.post("/render", {
        "asset": client.path(asset),
        "manifest": client.path(manifest),
        "out_dir": client.path(out),
        "tile_size": opts["tile_size"],
        "workers": opts["workers"],
        "path_kind": opts["path_kind"],
        "num_views": opts["views"],
    })
    _echo_report(report)


@main.command(name="eval")
@click.option("--asset", required=True, metavar="FILE")
@click.option("--manifest", required=True, metavar="FILE")
@click.option("--tile-size", default=16, show_default=True, type=int)
@click.option("--out", default=None, metavar="FILE",
              help="Write JSON lines here instead of stdout.")
@click.pass_context
def evaluate(ctx, asset, manifest, tile_size, out):
    """Score rendered views against stored ground truth as JSON lines."""

    opts = _merged(ctx, tile_size=tile_size)
    client = ctx.obj["client"]
    response = client.post("/eval", {
        "asset": client.path(asset),
        "manifest": client.path(manifest),
        "tile_size": opts["tile_size"],
    })
    lines = "\n".join(json.dumps(row, sort_keys=True) for row in response["rows"])
    if out is None:
        click.echo(lines)
    else:
        Path(out).write_text(lines + "\n")
        click.echo(f"wrote {len(response['rows'])} rows to {out}", err=True)


@main.command(name="sampler-demo")
@click.option("--out", required=True, metavar="DIR")
@click.option("--schedule", default="cosine", show_default=True,
              type=click.Choice(["linear-beta", "cosine"]))
@click.option("--steps", default=50, show_default=True, type=int)
@click.option("--eta", default=0.0, show_default=True, type=float)
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--oracle", default="delta", show_default=True,
              type=click.Choice(["delta", "mixture"]))
@click.option("--samples", default=16, show_default=True, type=int)
@click.option("--dim", default=3, show_default=True, type=int)
@click.option("--total-steps", default=1000, show_default=True, type=int)
@click.pass_context
def sampler_demo(ctx, out, schedule, steps, eta, seed, oracle, samples, dim,
                 total_steps):
    """Dump denoising trajectories from a closed-form oracle."""

    opts = _merged(ctx, schedule=schedule, steps=steps, eta=eta, seed=seed,
                   oracle=oracle, samples=samples, dim=dim,
                   total_steps=total_steps)
    client = ctx.obj["client"]
    report = client.post("/sampler-demo", {
        "out_dir": client.path(out),
        "schedule": opts["schedule"],
        "steps": opts["steps"],
        "eta": opts["eta"],
        "seed": opts["seed"],
        "oracle": opts["oracle"],
        "num_samples": opts["samples"],
        "dim": opts["dim"],
        "total_steps": opts["total_steps"],
    })
    _echo_report(report)


if __name__ == "__main__":
    main()
