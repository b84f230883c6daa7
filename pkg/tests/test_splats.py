"""Calibration, analytic head, and scene assembly tests."""

import numpy as np
import pytest

from splatforge.geometry import (
    CameraIntrinsics,
    CameraPose,
    Pointmap,
    project_points,
    unproject_depth,
)
from splatforge.splats import (
    Gaussian3D,
    GaussianScene,
    HeadParams,
    analytic_gaussian_head,
    calibrate_pointmap,
    cull_transparent,
    merge_splatter_images,
    quat_to_matrix,
)

from .test_geometry import random_pose


def camera(w=8, h=6, f=50.0):
    return CameraIntrinsics(fx=f, fy=f, cx=w / 2, cy=h / 2, width=w, height=h)


def reprojection_error(pointmap, intr, pose):
    uv, _ = project_points(intr, pose, pointmap.points)
    uu, vv = np.meshgrid(
        np.arange(intr.width) + 0.5, np.arange(intr.height) + 0.5
    )
    centers = np.stack([uu, vv], axis=-1)
    err = np.linalg.norm(uv - centers, axis=-1)
    return err[pointmap.valid]


class TestGaussian3D:
    def test_validates_opacity(self):
        with pytest.raises(ValueError):
            Gaussian3D([0, 0, 0], 1.5, [1, 1, 1], [1, 0, 0, 0], [1, 0, 0])

    def test_validates_scale(self):
        with pytest.raises(ValueError):
            Gaussian3D([0, 0, 0], 0.5, [1, -1, 1], [1, 0, 0, 0], [1, 0, 0])

    def test_validates_quaternion_norm(self):
        with pytest.raises(ValueError):
            Gaussian3D([0, 0, 0], 0.5, [1, 1, 1], [1, 1, 0, 0], [1, 0, 0])

    def test_covariance_is_spd(self):
        rng = np.random.default_rng(0)
        for _ in range(10):
            q = rng.normal(size=4)
            q /= np.linalg.norm(q)
            g = Gaussian3D([0, 0, 0], 0.5, rng.uniform(0.1, 2.0, 3), q, [1, 1, 1])
            cov = g.covariance()
            assert np.abs(cov - cov.T).max() < 1e-12
            assert np.linalg.eigvalsh(cov).min() > 0

    def test_quat_to_matrix_identity(self):
        assert np.abs(quat_to_matrix(np.array([1.0, 0, 0, 0])) - np.eye(3)).max() == 0


class TestCalibrate:
    def test_point_on_ray_is_fixed(self):
        rng = np.random.default_rng(1)
        intr = camera()
        pose = random_pose(rng)
        pm = unproject_depth(intr, pose, rng.uniform(1.0, 3.0, size=(6, 8)))
        out = calibrate_pointmap(pm, intr, pose)
        assert np.abs(out.points - pm.points).max() < 1e-9

    def test_keep_z_snap_xy(self):
        intr = CameraIntrinsics(fx=1.0, fy=1.0, cx=0.5, cy=0.5, width=1, height=1)
        pm = Pointmap(np.array([[[0.3, -0.2, 2.0]]]), np.ones((1, 1), bool))
        out = calibrate_pointmap(pm, intr, CameraPose.identity())
        assert out.points[0, 0] == pytest.approx([0.0, 0.0, 2.0])

    def test_reprojection_oracle(self):
        rng = np.random.default_rng(2)
        intr = camera()
        for _ in range(10):
            pose = random_pose(rng)
            # random points scattered in front of the camera
            depth = rng.uniform(0.5, 4.0, size=(6, 8))
            pm = unproject_depth(intr, pose, depth)
            noisy = pm.with_points(pm.points + rng.normal(scale=0.05, size=pm.points.shape))
            out = calibrate_pointmap(noisy, intr, pose)
            assert reprojection_error(out, intr, pose).max() < 1e-6

    def test_depth_preserved_exactly(self):
        rng = np.random.default_rng(3)
        intr = camera()
        pose = random_pose(rng)
        points = pose.transform(rng.normal(size=(6, 8, 3)) + np.array([0, 0, 2.5]))
        pm = Pointmap(points, np.ones((6, 8), bool))
        out = calibrate_pointmap(pm, intr, pose)
        z_in = pose.inverse_transform(pm.points)[..., 2]
        z_out = pose.inverse_transform(out.points)[..., 2]
        assert np.abs(z_out[out.valid] - z_in[out.valid]).max() < 1e-9

    def test_idempotent(self):
        rng = np.random.default_rng(4)
        intr = camera()
        pose = random_pose(rng)
        points = pose.transform(rng.normal(size=(6, 8, 3)) + np.array([0, 0, 2.5]))
        pm = Pointmap(points, np.ones((6, 8), bool))
        once = calibrate_pointmap(pm, intr, pose)
        twice = calibrate_pointmap(once, intr, pose)
        assert np.abs(twice.points - once.points).max() < 1e-12
        assert np.array_equal(twice.valid, once.valid)

    def test_behind_camera_marked_invalid(self):
        intr = camera()
        points = np.zeros((6, 8, 3))
        points[..., 2] = 2.0
        points[3, 3, 2] = -1.0
        pm = Pointmap(points, np.ones((6, 8), bool))
        out = calibrate_pointmap(pm, intr, CameraPose.identity())
        assert not out.valid[3, 3]
        assert out.valid.sum() == 47


class TestAnalyticHead:
    def _view(self, rng, intr, pose):
        depth = rng.uniform(1.0, 3.0, size=(intr.height, intr.width))
        pm = unproject_depth(intr, pose, depth)
        image = rng.random((intr.height, intr.width, 3))
        return image, pm

    def test_opacity_saturates(self):
        rng = np.random.default_rng(5)
        intr = camera()
        pose = CameraPose.identity()
        image, pm = self._view(rng, intr, pose)
        (si,) = analytic_gaussian_head(
            [image], [pm], [(intr, pose)], HeadParams(opacity_logit=20.0)
        )
        assert np.all(np.abs(si.opacities - 1.0) < 1e-8)

    def test_scale_linear_in_z(self):
        intr = camera()
        pose = CameraPose.identity()
        base = np.zeros((6, 8, 3))
        base[..., 2] = 1.0
        doubled = base * 2.0
        img = np.zeros((6, 8, 3))
        mask = np.ones((6, 8), bool)
        (a,) = analytic_gaussian_head([img], [Pointmap(base, mask)], [(intr, pose)])
        (b,) = analytic_gaussian_head([img], [Pointmap(doubled, mask)], [(intr, pose)])
        assert np.abs(b.scales - 2.0 * a.scales).max() < 1e-12

    def test_full_grid_count(self):
        rng = np.random.default_rng(6)
        intr = camera()
        pose = CameraPose.identity()
        image, pm = self._view(rng, intr, pose)
        (si,) = analytic_gaussian_head([image], [pm], [(intr, pose)])
        assert si.valid.sum() == intr.height * intr.width

    def test_means_reproject_to_pixel_centers(self):
        rng = np.random.default_rng(7)
        intr = camera()
        pose = random_pose(rng)
        image, pm = self._view(rng, intr, pose)
        pm = calibrate_pointmap(pm, intr, pose)
        (si,) = analytic_gaussian_head([image], [pm], [(intr, pose)])
        out = Pointmap(si.means, si.valid)
        assert reprojection_error(out, intr, pose).max() < 1e-6

    def test_rotation_aligns_axis_with_ray(self):
        rng = np.random.default_rng(8)
        intr = camera()
        pose = random_pose(rng)
        image, pm = self._view(rng, intr, pose)
        (si,) = analytic_gaussian_head([image], [pm], [(intr, pose)])
        mats = quat_to_matrix(si.rotations)
        rays = si.means - pose.translation
        rays /= np.linalg.norm(rays, axis=-1, keepdims=True)
        third = mats[..., :, 2]
        dots = np.einsum("hwc,hwc->hw", third, rays)
        assert np.abs(dots - 1.0).max() < 1e-9

    def test_dimension_mismatch_rejected(self):
        intr = camera()
        pm = Pointmap(np.zeros((2, 2, 3)), np.zeros((2, 2), bool))
        with pytest.raises(ValueError):
            analytic_gaussian_head([np.zeros((6, 8, 3))], [pm], [(intr, CameraPose.identity())])


class TestMergeCull:
    def _splatter(self, rng, intr, pose):
        image = rng.random((intr.height, intr.width, 3))
        pm = unproject_depth(intr, pose, rng.uniform(1.0, 3.0, (intr.height, intr.width)))
        (si,) = analytic_gaussian_head([image], [pm], [(intr, pose)])
        return si

    def test_single_image_count(self):
        rng = np.random.default_rng(9)
        intr = camera(w=8, h=8)
        si = self._splatter(rng, intr, CameraPose.identity())
        scene = merge_splatter_images([si])
        assert len(scene) == 64

    def test_multi_view_count(self):
        rng = np.random.default_rng(10)
        intr = camera()
        sis = [self._splatter(rng, intr, random_pose(rng)) for _ in range(3)]
        scene = merge_splatter_images(sis)
        assert len(scene) == 3 * 6 * 8
        assert set(np.unique(scene.source_view)) == {0, 1, 2}

    def test_empty_list(self):
        assert len(merge_splatter_images([])) == 0

    def test_cull_keeps_above_threshold(self):
        scene = GaussianScene(
            means=np.zeros((2, 3)),
            opacities=np.array([0.001, 0.5]),
            scales=np.ones((2, 3)),
            rotations=np.tile([1.0, 0, 0, 0], (2, 1)),
            colors=np.zeros((2, 3)),
        )
        out = cull_transparent(scene, 0.01)
        assert len(out) == 1
        assert out.opacities[0] == 0.5

    def test_cull_zero_threshold_is_identity(self):
        rng = np.random.default_rng(11)
        intr = camera()
        scene = merge_splatter_images([self._splatter(rng, intr, CameraPose.identity())])
        out = cull_transparent(scene, 0.0)
        assert len(out) == len(scene)

    def test_cull_above_one_empties(self):
        rng = np.random.default_rng(12)
        intr = camera()
        scene = merge_splatter_images([self._splatter(rng, intr, CameraPose.identity())])
        assert len(cull_transparent(scene, 1.0 + 1e-9)) == 0

    def test_cull_preserves_order(self):
        rng = np.random.default_rng(13)
        opac = rng.random(50)
        scene = GaussianScene(
            means=rng.normal(size=(50, 3)),
            opacities=opac,
            scales=np.ones((50, 3)),
            rotations=np.tile([1.0, 0, 0, 0], (50, 1)),
            colors=np.zeros((50, 3)),
        )
        out = cull_transparent(scene, 0.5)
        kept = opac[opac >= 0.5]
        assert np.array_equal(out.opacities, kept)
