"""Rasterizer and ray-tracer tests against hand-computed compositing oracles."""

import numpy as np
import pytest

from splatforge.geometry import (
    CameraIntrinsics,
    CameraPose,
    project_points,
    unproject_depth,
)
from splatforge.render import (
    Box,
    Plane,
    RenderedImage,
    Sphere,
    SyntheticScene,
    raytrace_synthetic,
    render_reference,
    render_tiled,
)
from splatforge.splats import GaussianScene

from .test_geometry import random_pose


def square_camera(size=64, f=None):
    f = float(size) / 2 if f is None else f
    return CameraIntrinsics(fx=f, fy=f, cx=size / 2, cy=size / 2, width=size, height=size)


def random_unit_quats(rng, n):
    q = rng.normal(size=(n, 4))
    return q / np.linalg.norm(q, axis=-1, keepdims=True)


def random_gaussian_scene(seed, n, intrinsics, pose):
    """Gaussians scattered through the camera frustum with varied shapes."""
    rng = np.random.default_rng(seed)
    u = rng.uniform(2.0, intrinsics.width - 2.0, n)
    v = rng.uniform(2.0, intrinsics.height - 2.0, n)
    z = rng.uniform(1.0, 4.0, n)
    cam = np.stack(
        [(u - intrinsics.cx) / intrinsics.fx * z, (v - intrinsics.cy) / intrinsics.fy * z, z],
        axis=-1,
    )
    return GaussianScene(
        means=pose.transform(cam),
        opacities=rng.uniform(0.05, 1.0, n),
        scales=np.exp(rng.uniform(np.log(0.005), np.log(0.15), (n, 3))),
        rotations=random_unit_quats(rng, n),
        colors=rng.random((n, 3)),
    )


def scene_of(means, opacities, scales, colors):
    means = np.atleast_2d(np.asarray(means, dtype=float))
    n = means.shape[0]
    return GaussianScene(
        means=means,
        opacities=np.asarray(opacities, dtype=float).reshape(n),
        scales=np.broadcast_to(np.asarray(scales, dtype=float), (n, 3)).copy(),
        rotations=np.tile([1.0, 0.0, 0.0, 0.0], (n, 1)),
        colors=np.atleast_2d(np.asarray(colors, dtype=float)),
    )


class TestRenderedImage:
    def test_rejects_out_of_range_rgb(self):
        with pytest.raises(ValueError):
            RenderedImage(rgb=np.full((2, 2, 3), 1.5), alpha=np.zeros((2, 2)))

    def test_rejects_shape_mismatch(self):
        with pytest.raises(ValueError):
            RenderedImage(rgb=np.zeros((2, 2, 3)), alpha=np.zeros((3, 2)))

    def test_rejects_nonfinite(self):
        rgb = np.zeros((2, 2, 3))
        rgb[0, 0, 0] = np.nan
        with pytest.raises(ValueError):
            RenderedImage(rgb=rgb, alpha=np.zeros((2, 2)))


class TestReference:
    def test_empty_scene_is_background(self):
        intr = square_camera(16)
        bg = np.array([0.2, 0.4, 0.6])
        out = render_reference(GaussianScene.empty(), intr, CameraPose.identity(), background=bg)
        assert np.all(out.rgb == bg)
        assert np.all(out.alpha == 0.0)

    def test_opaque_center_pixel_exact_color(self):
        intr = square_camera(64)
        # mean on the ray through pixel (31, 31)'s center at depth 2
        x = (31.5 - intr.cx) / intr.fx * 2.0
        color = np.array([0.3, 0.7, 0.2])
        scene = scene_of([[x, x, 2.0]], [1.0], 0.05, [color])
        out = render_reference(scene, intr, CameraPose.identity())
        assert np.array_equal(out.rgb[31, 31], color)
        assert out.alpha[31, 31] == 1.0

    def test_two_gaussian_hand_composite(self):
        intr = square_camera(64)
        d = (31.5 - intr.cx) / intr.fx
        scene = scene_of(
            [[d, d, 1.0], [2 * d, 2 * d, 2.0]],
            [0.6, 0.8],
            0.02,
            [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
        )
        out = render_reference(scene, intr, CameraPose.identity(), compute_depth=True)
        expected = np.array([0.6, 0.8 * (1 - 0.6), 0.0]) @ np.eye(3)
        assert np.abs(out.rgb[31, 31] - [0.6, 0.32, 0.0]).max() < 1e-12
        assert abs(out.alpha[31, 31] - 0.92) < 1e-12
        # expected depth = weighted mean of the two contribution depths
        assert abs(out.depth[31, 31] - (0.6 * 1.0 + 0.32 * 2.0) / 0.92) < 1e-12

    def test_depth_order_not_input_order(self):
        intr = square_camera(64)
        d = (31.5 - intr.cx) / intr.fx
        # farther Gaussian listed first; sort must put the nearer one in front
        scene = scene_of(
            [[2 * d, 2 * d, 2.0], [d, d, 1.0]],
            [0.8, 0.6],
            0.02,
            [[0.0, 1.0, 0.0], [1.0, 0.0, 0.0]],
        )
        out = render_reference(scene, intr, CameraPose.identity())
        assert np.abs(out.rgb[31, 31] - [0.6, 0.32, 0.0]).max() < 1e-12

    def test_equal_depth_ties_broken_by_index(self):
        intr = square_camera(64)
        d = (31.5 - intr.cx) / intr.fx
        means = [[d, d, 1.0], [d, d, 1.0]]
        red_first = scene_of(means, [0.5, 0.5], 0.02, [[1, 0, 0], [0, 1, 0]])
        green_first = scene_of(means, [0.5, 0.5], 0.02, [[0, 1, 0], [1, 0, 0]])
        a = render_reference(red_first, intr, CameraPose.identity())
        b = render_reference(green_first, intr, CameraPose.identity())
        assert np.abs(a.rgb[31, 31] - [0.5, 0.25, 0.0]).max() < 1e-12
        assert np.abs(b.rgb[31, 31] - [0.25, 0.5, 0.0]).max() < 1e-12

    def test_permutation_invariance(self):
        intr = square_camera(32)
        pose = CameraPose.identity()
        scene = random_gaussian_scene(7, 40, intr, pose)
        rng = np.random.default_rng(8)
        perm = rng.permutation(len(scene))
        out_a = render_reference(scene, intr, pose)
        out_b = render_reference(scene.take(perm), intr, pose)
        assert np.array_equal(out_a.rgb, out_b.rgb)
        assert np.array_equal(out_a.alpha, out_b.alpha)

    def test_alpha_monotone_in_scene_size(self):
        intr = square_camera(32)
        pose = CameraPose.identity()
        scene = random_gaussian_scene(9, 30, intr, pose)
        partial = scene.take(np.arange(29))
        full = render_reference(scene, intr, pose)
        part = render_reference(partial, intr, pose)
        assert (full.alpha - part.alpha).min() > -1e-12

    def test_scale_invariance(self):
        intr = square_camera(32)
        rng = np.random.default_rng(10)
        pose = random_pose(rng)
        scene = random_gaussian_scene(11, 30, intr, pose)
        factor = 3.7
        scaled = GaussianScene(
            means=scene.means * factor,
            opacities=scene.opacities,
            scales=scene.scales * factor,
            rotations=scene.rotations,
            colors=scene.colors,
        )
        scaled_pose = pose.scaled(factor)
        out_a = render_reference(scene, intr, pose)
        out_b = render_reference(scaled, intr, scaled_pose)
        assert np.abs(out_a.rgb - out_b.rgb).max() < 1e-6

    def test_degenerate_covariance_skipped_and_counted(self):
        intr = square_camera(32)
        scene = scene_of([[0.0, 0.0, 2.0]], [0.9], [10.0, 1e-10, 1e-10], [[1, 1, 1]])
        out = render_reference(scene, intr, CameraPose.identity())
        assert out.skipped_degenerate == 1
        assert np.all(out.rgb == 0.0)
        assert np.all(out.alpha == 0.0)

    def test_behind_camera_culled(self):
        intr = square_camera(16)
        scene = scene_of([[0.0, 0.0, -2.0]], [1.0], 0.1, [[1, 1, 1]])
        out = render_reference(scene, intr, CameraPose.identity())
        assert np.all(out.alpha == 0.0)


class TestTiled:
    def test_single_tile_matches_reference(self):
        intr = square_camera(32)
        pose = CameraPose.identity()
        scene = random_gaussian_scene(12, 50, intr, pose)
        ref = render_reference(scene, intr, pose)
        one = render_tiled(scene, intr, pose, tile_size=32)
        assert np.abs(one.rgb - ref.rgb).max() <= 1e-6
        assert np.abs(one.alpha - ref.alpha).max() <= 1e-6

    @pytest.mark.parametrize("seed", range(8))
    def test_matches_reference_random_scenes(self, seed):
        intr = square_camera(64)
        rng = np.random.default_rng(100 + seed)
        pose = random_pose(rng)
        scene = random_gaussian_scene(seed, 100, intr, pose)
        ref = render_reference(scene, intr, pose, compute_depth=True)
        tiled = render_tiled(scene, intr, pose, tile_size=16, compute_depth=True)
        assert np.abs(tiled.rgb - ref.rgb).max() <= 1e-4
        assert np.abs(tiled.alpha - ref.alpha).max() <= 1e-4
        assert np.abs(tiled.depth - ref.depth).max() <= 1e-3

    def test_offscreen_gaussian_contributes_nothing(self):
        intr = square_camera(32)
        pose = CameraPose.identity()
        visible = scene_of([[0.0, 0.0, 2.0]], [0.8], 0.05, [[0.2, 0.5, 0.9]])
        # second Gaussian projects far left of the image with a small footprint
        off_x = (-400.0 - intr.cx) / intr.fx * 2.0
        both = GaussianScene(
            means=np.array([[0.0, 0.0, 2.0], [off_x, 0.0, 2.0]]),
            opacities=np.array([0.8, 1.0]),
            scales=np.full((2, 3), 0.05),
            rotations=np.tile([1.0, 0, 0, 0], (2, 1)),
            colors=np.array([[0.2, 0.5, 0.9], [1.0, 0.0, 0.0]]),
        )
        for renderer in (render_reference, render_tiled):
            a = renderer(visible, intr, pose)
            b = renderer(both, intr, pose)
            assert np.abs(a.rgb - b.rgb).max() < 1e-12

    def test_odd_image_and_tile_sizes(self):
        intr = CameraIntrinsics(fx=20.0, fy=24.0, cx=13.5, cy=9.0, width=27, height=19)
        rng = np.random.default_rng(13)
        pose = random_pose(rng)
        scene = random_gaussian_scene(14, 60, intr, pose)
        ref = render_reference(scene, intr, pose)
        for tile_size in (1, 5, 27):
            tiled = render_tiled(scene, intr, pose, tile_size=tile_size)
            assert np.abs(tiled.rgb - ref.rgb).max() <= 1e-4

    def test_worker_count_does_not_change_output(self):
        intr = square_camera(64)
        pose = CameraPose.identity()
        scene = random_gaussian_scene(15, 80, intr, pose)
        serial = render_tiled(scene, intr, pose, tile_size=16, workers=1)
        threaded = render_tiled(scene, intr, pose, tile_size=16, workers=4)
        assert np.array_equal(serial.rgb, threaded.rgb)
        assert np.array_equal(serial.alpha, threaded.alpha)

    def test_rejects_bad_tile_size(self):
        intr = square_camera(16)
        with pytest.raises(ValueError):
            render_tiled(GaussianScene.empty(), intr, CameraPose.identity(), tile_size=0)


class TestRaytrace:
    def test_on_axis_sphere_depth_and_shading(self):
        intr = CameraIntrinsics(fx=32.5, fy=32.5, cx=32.5, cy=32.5, width=65, height=65)
        albedo = np.array([0.9, 0.5, 0.1])
        scene = SyntheticScene((Sphere([0.0, 0.0, 3.0], 1.0, albedo),))
        image, depth = raytrace_synthetic(scene, intr, CameraPose.identity())
        assert depth[32, 32] == 3.0 - 1.0
        assert np.array_equal(image.rgb[32, 32], albedo)
        assert image.alpha[32, 32] == 1.0

    def test_sphere_silhouette_is_symmetric(self):
        intr = square_camera(64)
        scene = SyntheticScene((Sphere([0.0, 0.0, 3.0], 1.0, [1, 1, 1]),))
        image, _ = raytrace_synthetic(scene, intr, CameraPose.identity())
        assert np.array_equal(image.alpha, image.alpha[::-1, :])
        assert np.array_equal(image.alpha, image.alpha[:, ::-1])
        assert 0 < image.alpha.sum() < image.alpha.size

    def test_plane_constant_depth(self):
        intr = square_camera(32)
        scene = SyntheticScene((Plane([0.0, 0.0, 2.0], [0.0, 0.0, 1.0], [0.5, 0.5, 0.5]),))
        image, depth = raytrace_synthetic(scene, intr, CameraPose.identity())
        assert np.all(image.alpha == 1.0)
        assert np.abs(depth - 2.0).max() < 1e-12

    def test_box_front_face(self):
        intr = CameraIntrinsics(fx=32.5, fy=32.5, cx=32.5, cy=32.5, width=65, height=65)
        albedo = np.array([0.2, 0.8, 0.4])
        scene = SyntheticScene((Box([0.0, 0.0, 3.0], [2.0, 2.0, 2.0], albedo),))
        image, depth = raytrace_synthetic(scene, intr, CameraPose.identity())
        assert depth[32, 32] == 2.0
        assert np.array_equal(image.rgb[32, 32], albedo)

    def test_miss_gives_background_and_invalid_depth(self):
        intr = square_camera(16)
        bg = np.array([0.1, 0.2, 0.3])
        scene = SyntheticScene((), background=bg)
        image, depth = raytrace_synthetic(scene, intr, CameraPose.identity())
        assert np.all(image.rgb == bg)
        assert np.all(image.alpha == 0.0)
        assert np.all(depth == 0.0)

    def test_nearest_hit_wins(self):
        intr = square_camera(32)
        near = Sphere([0.0, 0.0, 2.0], 0.5, [1.0, 0.0, 0.0])
        far = Plane([0.0, 0.0, 5.0], [0.0, 0.0, 1.0], [0.0, 0.0, 1.0])
        image, depth = raytrace_synthetic(SyntheticScene((near, far)), intr, CameraPose.identity())
        center = intr.height // 2
        assert depth[center, center] < 2.0
        assert image.rgb[center, center, 0] > 0.0
        assert image.rgb[center, center, 2] == 0.0

    def test_depth_reprojects_to_pixel_centers(self):
        intr = square_camera(48)
        rng = np.random.default_rng(16)
        pose = random_pose(rng)
        center = pose.transform(np.array([0.0, 0.0, 3.0]))
        scene = SyntheticScene((Sphere(center, 1.2, [0.7, 0.7, 0.7]),))
        image, depth = raytrace_synthetic(scene, intr, pose)
        valid = image.alpha > 0.5
        assert valid.any()
        pm = unproject_depth(intr, pose, np.where(valid, depth, 1.0), valid=valid)
        uv, z = project_points(intr, pose, pm.points)
        uu, vv = np.meshgrid(np.arange(48) + 0.5, np.arange(48) + 0.5)
        err = np.linalg.norm(uv - np.stack([uu, vv], axis=-1), axis=-1)
        assert err[valid].max() < 1e-9

    def test_camera_inside_box_hits_far_face(self):
        intr = square_camera(16)
        scene = SyntheticScene((Box([0.0, 0.0, 0.0], [10.0, 10.0, 10.0], [1, 1, 1]),))
        image, depth = raytrace_synthetic(scene, intr, CameraPose.identity())
        assert np.all(image.alpha == 1.0)
        assert abs(depth[8, 8] - 5.0) < 1e-9

    def test_primitive_validation(self):
        with pytest.raises(ValueError):
            Sphere([0, 0, 0], -1.0, [1, 1, 1])
        with pytest.raises(ValueError):
            Box([0, 0, 0], [1.0, 0.0, 1.0], [1, 1, 1])
        with pytest.raises(ValueError):
            Plane([0, 0, 0], [0, 0, 0], [1, 1, 1])
        with pytest.raises(ValueError):
            Sphere([0, 0, 0], 1.0, [1.5, 0, 0])
