"""Gaussian splatting rasterizer: exhaustive reference path and tiled fast path.

Both paths share the same projection and compositing semantics:

  * Each Gaussian's 3D covariance is pushed through the local affine (Jacobian)
    approximation of the perspective projection at its mean, giving a 2x2
    image-plane covariance.
  * Per pixel, contributions alpha_i = opacity_i * exp(-0.5 * d^T inv(Cov2d) d)
    are composited front to back over a single global camera-depth sort
    (ties broken by scene index), with the final color
    C = sum_i c_i * alpha_i * prod_{j<i} (1 - alpha_j) + background * T_final.
  * Contributions with alpha < 1/255 are dropped; they are invisible at 8-bit
    quantization and bounding them keeps the tiled binning conservative.

The tiled path bins Gaussians to tiles by a conservative support radius: the
largest pixel distance at which alpha can still reach the 1/255 floor,
sqrt(2 * ln(255 * opacity)) * sqrt(max eigenvalue of Cov2d). Every contribution
the reference path keeps therefore lands in a tile that evaluates it, so the
two paths differ only by floating-point summation order.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..geometry.camera import CameraIntrinsics, CameraPose
from ..splats.gaussians import GaussianScene
from .types import RenderedImage

# Contributions below this are invisible at 8-bit quantization.
ALPHA_FLOOR = 1.0 / 255.0
# Projected covariances with a worse condition number are treated as degenerate.
MAX_CONDITION = 1e12

_BLACK = np.zeros(3)


@dataclass(frozen=True)
class _ProjectedSplats:
    """Per-Gaussian screen-space quantities, sorted by camera depth.

    inv_cov rows hold the (a, b, c) upper triangle of the inverse 2x2
    covariance, so the Mahalanobis form is a*du^2 + 2*b*du*dv + c*dv^2.
    """

    uv: np.ndarray
    inv_cov: np.ndarray
    radius: np.ndarray
    depth: np.ndarray
    colors: np.ndarray
    opacities: np.ndarray
    skipped_degenerate: int

    def __len__(self) -> int:
        return self.uv.shape[0]


def _project_splats(
    scene: GaussianScene, intrinsics: CameraIntrinsics, pose: CameraPose
) -> _ProjectedSplats:
    """Projects a scene into screen space, culling unusable Gaussians.

    Drops Gaussians behind the camera, Gaussians whose opacity is at or below
    the 1/255 floor (they cannot contribute anywhere), and Gaussians whose
    projected covariance is degenerate (the latter are counted).
    """

    empty = _ProjectedSplats(
        uv=np.zeros((0, 2)),
        inv_cov=np.zeros((0, 3)),
        radius=np.zeros(0),
        depth=np.zeros(0),
        colors=np.zeros((0, 3)),
        opacities=np.zeros(0),
        skipped_degenerate=0,
    )
    if len(scene) == 0:
        return empty

    cam = pose.inverse_transform(scene.means)
    front = cam[:, 2] > 0.0
    visible = front & (scene.opacities > ALPHA_FLOOR)
    if not visible.any():
        return empty

    sub = scene.take(np.flatnonzero(visible))
    cam = cam[visible]
    x, y, z = cam[:, 0], cam[:, 1], cam[:, 2]
    fx, fy = intrinsics.fx, intrinsics.fy

    rot_w2c = pose.rotation.T
    cov_cam = np.einsum("ij,njk,lk->nil", rot_w2c, sub.covariances(), rot_w2c)

    # Jacobian of (fx*x/z + cx, fy*y/z + cy) at the mean.
    n = cam.shape[0]
    jac = np.zeros((n, 2, 3))
    jac[:, 0, 0] = fx / z
    jac[:, 0, 2] = -fx * x / (z * z)
    jac[:, 1, 1] = fy / z
    jac[:, 1, 2] = -fy * y / (z * z)
    cov2d = np.einsum("nij,njk,nlk->nil", jac, cov_cam, jac)

    a = cov2d[:, 0, 0]
    b = cov2d[:, 0, 1]
    c = cov2d[:, 1, 1]
    mean_ev = 0.5 * (a + c)
    spread = np.sqrt(np.maximum(0.25 * (a - c) ** 2 + b * b, 0.0))
    ev_max = mean_ev + spread
    ev_min = mean_ev - spread
    finite = np.isfinite(a) & np.isfinite(b) & np.isfinite(c)
    good = finite & (ev_min > 0.0) & (ev_max <= MAX_CONDITION * ev_min)
    skipped = int(n - good.sum())
    if not good.any():
        return _ProjectedSplats(
            uv=np.zeros((0, 2)),
            inv_cov=np.zeros((0, 3)),
            radius=np.zeros(0),
            depth=np.zeros(0),
            colors=np.zeros((0, 3)),
            opacities=np.zeros(0),
            skipped_degenerate=skipped,
        )

    sub = sub.take(np.flatnonzero(good))
    x, y, z = x[good], y[good], z[good]
    a, b, c = a[good], b[good], c[good]
    ev_max = ev_max[good]

    det = a * c - b * b
    inv_cov = np.stack([c / det, -b / det, a / det], axis=-1)
    uv = np.stack(
        [fx * x / z + intrinsics.cx, fy * y / z + intrinsics.cy], axis=-1
    )
    radius = np.sqrt(2.0 * np.log(255.0 * sub.opacities)) * np.sqrt(ev_max)

    # Stable ascending depth sort; equal depths keep scene order.
    order = np.argsort(z, kind="stable")
    return _ProjectedSplats(
        uv=uv[order],
        inv_cov=inv_cov[order],
        radius=radius[order],
        depth=z[order],
        colors=sub.colors[order],
        opacities=sub.opacities[order],
        skipped_degenerate=skipped,
    )


def _composite_block(
    proj: _ProjectedSplats,
    indices: np.ndarray,
    ucenters: np.ndarray,
    vcenters: np.ndarray,
    compute_depth: bool,
) -> tuple[np.ndarray, np.ndarray, np.ndarray | None]:
    """Composites the given depth-ordered Gaussians over one pixel block.

    Returns (premultiplied rgb, transmittance, weighted depth or None), each
    shaped over the (len(vcenters), len(ucenters)) block.
    """

    h, w = vcenters.shape[0], ucenters.shape[0]
    if indices.size == 0:
        rgb = np.zeros((h, w, 3))
        trans = np.ones((h, w))
        return rgb, trans, (np.zeros((h, w)) if compute_depth else None)

    du = ucenters[None, None, :] - proj.uv[indices, 0][:, None, None]
    dv = vcenters[None, :, None] - proj.uv[indices, 1][:, None, None]
    ia = proj.inv_cov[indices, 0][:, None, None]
    ib = proj.inv_cov[indices, 1][:, None, None]
    ic = proj.inv_cov[indices, 2][:, None, None]
    quad = ia * du * du + 2.0 * ib * du * dv + ic * dv * dv
    alpha = proj.opacities[indices][:, None, None] * np.exp(-0.5 * quad)
    alpha[alpha < ALPHA_FLOOR] = 0.0

    # Exclusive running transmittance; cumprod applies factors sequentially,
    # so dropped (zero-alpha) contributions are exact no-ops.
    trans_incl = np.cumprod(1.0 - alpha, axis=0)
    trans_excl = np.concatenate(
        [np.ones((1, h, w)), trans_incl[:-1]], axis=0
    )
    weight = alpha * trans_excl
    rgb = np.einsum("khw,kc->hwc", weight, proj.colors[indices])
    depth = None
    if compute_depth:
        depth = np.einsum("khw,k->hw", weight, proj.depth[indices])
    return rgb, trans_incl[-1], depth


def _finalize(
    rgb: np.ndarray,
    trans: np.ndarray,
    depth: np.ndarray | None,
    background: np.ndarray,
    skipped: int,
) -> RenderedImage:
    alpha = 1.0 - trans
    out_rgb = np.clip(rgb + trans[..., None] * background, 0.0, 1.0)
    out_depth = None
    if depth is not None:
        covered = alpha > 0.0
        out_depth = np.where(covered, depth / np.where(covered, alpha, 1.0), 0.0)
    return RenderedImage(
        rgb=out_rgb,
        alpha=np.clip(alpha, 0.0, 1.0),
        depth=out_depth,
        skipped_degenerate=skipped,
    )


def render_reference(
    scene: GaussianScene,
    intrinsics: CameraIntrinsics,
    pose: CameraPose,
    *,
    background: np.ndarray | None = None,
    compute_depth: bool = False,
) -> RenderedImage:
    """Renders by evaluating every projected Gaussian at every pixel.

    This is the correctness oracle for render_tiled: no spatial binning, just
    the global depth sort and front-to-back compositing.

    Args:
        scene: flat Gaussian scene in world coordinates.
        intrinsics: pinhole camera model.
        pose: camera-to-world pose.
        background: (3,) color composited behind the scene; black by default.
        compute_depth: if True, also produce the alpha-weighted expected depth.

    Returns:
        RenderedImage with rgb/alpha (and depth when requested).
    """

    bg = _BLACK if background is None else np.asarray(background, dtype=np.float64)
    proj = _project_splats(scene, intrinsics, pose)
    ucenters = np.arange(intrinsics.width, dtype=np.float64) + 0.5
    vcenters = np.arange(intrinsics.height, dtype=np.float64) + 0.5
    rgb, trans, depth = _composite_block(
        proj, np.arange(len(proj)), ucenters, vcenters, compute_depth
    )
    return _finalize(rgb, trans, depth, bg, proj.skipped_degenerate)


def render_tiled(
    scene: GaussianScene,
    intrinsics: CameraIntrinsics,
    pose: CameraPose,
    tile_size: int = 16,
    *,
    background: np.ndarray | None = None,
    compute_depth: bool = False,
    workers: int = 1,
) -> RenderedImage:
    """Renders with Gaussians binned to square pixel tiles.

    Compositing semantics are identical to render_reference; each tile only
    evaluates Gaussians whose conservative support disc can reach one of its
    pixel centers. Tiles are independent, so they may render in parallel;
    output is deterministic regardless of worker count.

    Args:
        scene: flat Gaussian scene in world coordinates.
        intrinsics: pinhole camera model.
        pose: camera-to-world pose.
        tile_size: tile edge length in pixels (>= 1).
        background: (3,) color composited behind the scene; black by default.
        compute_depth: if True, also produce the alpha-weighted expected depth.
        workers: thread count for tile rendering.

    Returns:
        RenderedImage with rgb/alpha (and depth when requested).
    """

    if tile_size < 1:
        raise ValueError(f"tile_size must be >= 1, got {tile_size}")
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")
    bg = _BLACK if background is None else np.asarray(background, dtype=np.float64)
    height, width = intrinsics.height, intrinsics.width
    proj = _project_splats(scene, intrinsics, pose)

    ucenters = np.arange(width, dtype=np.float64) + 0.5
    vcenters = np.arange(height, dtype=np.float64) + 0.5
    ntx = -(-width // tile_size)
    nty = -(-height // tile_size)

    # Pixel-center index ranges reachable by each Gaussian's support disc,
    # converted to inclusive tile ranges.
    tiles: list[list[int]] = [[] for _ in range(ntx * nty)]
    if len(proj):
        u_lo = np.ceil(proj.uv[:, 0] - proj.radius - 0.5).astype(np.int64)
        u_hi = np.floor(proj.uv[:, 0] + proj.radius - 0.5).astype(np.int64)
        v_lo = np.ceil(proj.uv[:, 1] - proj.radius - 0.5).astype(np.int64)
        v_hi = np.floor(proj.uv[:, 1] + proj.radius - 0.5).astype(np.int64)
        u_lo = np.clip(u_lo, 0, width - 1) // tile_size
        u_hi = np.clip(u_hi, 0, width - 1) // tile_size
        v_lo = np.clip(v_lo, 0, height - 1) // tile_size
        v_hi = np.clip(v_hi, 0, height - 1) // tile_size
        on_screen = (
            (proj.uv[:, 0] + proj.radius >= 0.5)
            & (proj.uv[:, 0] - proj.radius <= width - 0.5)
            & (proj.uv[:, 1] + proj.radius >= 0.5)
            & (proj.uv[:, 1] - proj.radius <= height - 0.5)
        )
        for k in np.flatnonzero(on_screen):
            for ty in range(v_lo[k], v_hi[k] + 1):
                row = ty * ntx
                for tx in range(u_lo[k], u_hi[k] + 1):
                    tiles[row + tx].append(k)

    rgb = np.zeros((height, width, 3))
    trans = np.ones((height, width))
    depth = np.zeros((height, width)) if compute_depth else None

    def run_tile(tile_index: int) -> None:
        ty, tx = divmod(tile_index, ntx)
        r0, r1 = ty * tile_size, min((ty + 1) * tile_size, height)
        c0, c1 = tx * tile_size, min((tx + 1) * tile_size, width)
        idx = np.asarray(tiles[tile_index], dtype=np.int64)
        t_rgb, t_trans, t_depth = _composite_block(
            proj, idx, ucenters[c0:c1], vcenters[r0:r1], compute_depth
        )
        rgb[r0:r1, c0:c1] = t_rgb
        trans[r0:r1, c0:c1] = t_trans
        if depth is not None:
            depth[r0:r1, c0:c1] = t_depth

    if workers == 1:
        for i in range(ntx * nty):
            run_tile(i)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(run_tile, range(ntx * nty)))

    return _finalize(rgb, trans, depth, bg, proj.skipped_degenerate)
