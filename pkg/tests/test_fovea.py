import numpy as np
import pytest

import fovsplat as fs
from fovsplat.fovea import point_fragments
from conftest import make_camera
from oracles import pyramid_two_pass


def make_cloud(rng, n, z_range=(0.8, 4.0), d=4, size_range=(0.002, 0.1)):
    pos = rng.uniform([-1.2, -1.2, z_range[0]], [1.2, 1.2, z_range[1]], (n, 3))
    sizes = rng.uniform(*size_range, n)
    feats = rng.uniform(0, 1, (n, d))
    opac = rng.uniform(0.2, 1.0, n)
    return fs.NeuralPointCloud(pos, sizes, feats, opac)


class TestFoveaRadius:
    def test_paper_configuration(self):
        cfg = fs.FoveaConfig(pixels_per_degree=15.7, fovea_degrees=17.0,
                             resolution_scale=1.4)
        assert 370 < 15.7 * 17.0 * 1.4 < 380
        assert fs.fovea_radius_px(cfg) == 256

    def test_power_of_two_rounding(self):
        cfg = fs.FoveaConfig(pixels_per_degree=10, fovea_degrees=10,
                             resolution_scale=1.0)
        assert fs.fovea_radius_px(cfg) == 64

    def test_smaller_fovea(self):
        cfg = fs.FoveaConfig(pixels_per_degree=15.7, fovea_degrees=7.5,
                             resolution_scale=1.0)
        assert fs.fovea_radius_px(cfg) == 64


class TestSubfrustum:
    def test_centered_gaze(self):
        cam = make_camera(1024, 1024)
        sub = fs.make_subfrustum(cam, (cam.cx, cam.cy), 256)
        assert sub.origin == (cam.cx - 256, cam.cy - 256)
        assert sub.size == 512

    def test_corner_gaze_clamped(self):
        cam = make_camera(1024, 1024)
        sub = fs.make_subfrustum(cam, (0, 0), 256)
        assert sub.origin == (0, 0)

    def test_crop_equivalence_random_points(self):
        rng = np.random.default_rng(13)
        for _ in range(4):
            w, h = rng.integers(200, 400), rng.integers(200, 400)
            cam = make_camera(int(w), int(h), focal=float(rng.uniform(100, 400)),
                              z=float(rng.uniform(-0.5, 0.5)),
                              yaw=float(rng.uniform(-0.3, 0.3)))
            gaze = rng.uniform([0, 0], [w, h])
            sub = fs.make_subfrustum(cam, gaze, 64)
            pts = rng.uniform([-2, -2, 0.5], [2, 2, 6], (2500, 3))
            uv_base, z_base = cam.project(pts)
            uv_sub, z_sub = sub.camera.project(pts)
            vis = z_base > cam.near
            shift = uv_base[vis] - np.array(sub.origin)
            assert np.max(np.abs(uv_sub[vis] - shift)) < 1e-4
            assert np.allclose(z_sub[vis], z_base[vis])

    def test_crop_too_large_rejected(self):
        cam = make_camera(100, 100)
        with pytest.raises(ValueError, match="exceeds"):
            fs.make_subfrustum(cam, (50, 50), 64)


class TestCulling:
    def setup_wall(self, cam, depth_value=1.0, alpha_value=1.0):
        depth = np.full((cam.height, cam.width), depth_value)
        alpha = np.full((cam.height, cam.width), alpha_value)
        return depth, alpha

    def test_point_behind_opaque_wall_culled(self):
        cam = make_camera(128, 128)
        sub = fs.make_subfrustum(cam, (64, 64), 32)
        depth, alpha = self.setup_wall(cam, depth_value=1.0, alpha_value=1.0)
        cloud = fs.NeuralPointCloud(np.array([[0, 0, 2.0]]), np.array([0.05]),
                                    np.zeros((1, 4)), np.array([0.9]))
        assert fs.cull_points(cloud, sub, depth, alpha).size == 0

    def test_point_in_front_retained(self):
        cam = make_camera(128, 128)
        sub = fs.make_subfrustum(cam, (64, 64), 32)
        depth, alpha = self.setup_wall(cam, depth_value=1.0, alpha_value=1.0)
        cloud = fs.NeuralPointCloud(np.array([[0, 0, 0.5]]), np.array([0.05]),
                                    np.zeros((1, 4)), np.array([0.9]))
        assert fs.cull_points(cloud, sub, depth, alpha).tolist() == [0]

    def test_translucent_periphery_never_culls(self):
        rng = np.random.default_rng(3)
        cam = make_camera(128, 128)
        sub = fs.make_subfrustum(cam, (64, 64), 48)
        cloud = make_cloud(rng, 500)
        depth = rng.uniform(0.1, 0.5, (128, 128))  # everything "behind"
        alpha = np.full((128, 128), 0.85)           # below the 0.9 gate
        with_occ = fs.cull_points(cloud, sub, depth, alpha)
        frustum_only = fs.cull_points(cloud, sub, depth, alpha, use_occlusion=False)
        assert np.array_equal(with_occ, frustum_only)

    def test_frustum_only_oracle(self):
        rng = np.random.default_rng(5)
        cam = make_camera(160, 120)
        sub = fs.make_subfrustum(cam, (70, 65), 40)
        cloud = make_cloud(rng, 800, z_range=(0.02, 6.0))
        got = fs.cull_points(cloud, sub, np.zeros((120, 160)), np.zeros((120, 160)))
        uv, z = cam.project(cloud.positions)
        ox, oy = sub.origin
        expect = np.nonzero((z > cam.near) & (z < cam.far)
                            & (uv[:, 0] >= ox) & (uv[:, 0] < ox + 80)
                            & (uv[:, 1] >= oy) & (uv[:, 1] < oy + 80))[0]
        assert np.array_equal(got, expect)


class TestPyramid:
    def test_unit_size_point_lands_in_layer0(self, warm_kernels):
        cam = make_camera(128, 128, focal=100.0)
        sub = fs.make_subfrustum(cam, (64, 64), 16)
        # depth 2, size chosen so s_px = size*fx/z = 1
        z = 2.0
        target_px = (10, 12)  # crop coords
        u = sub.origin[0] + target_px[0] + 0.5
        v = sub.origin[1] + target_px[1] + 0.5
        pos = np.array([[(u - cam.cx) / cam.fx * z, (v - cam.cy) / cam.fy * z, z]])
        cloud = fs.NeuralPointCloud(pos, np.array([z / cam.fx]),
                                    np.array([[1.0, 0.5, 0.25, 0.0]]), np.array([0.7]))
        pyr = fs.splat_pyramid(cloud, np.array([0]), sub)
        assert pyr.layers[0][target_px[1], target_px[0], 4] == pytest.approx(0.7, abs=1e-12)
        assert pyr.layers[0].sum() == pytest.approx(pyr.layers[0][target_px[1], target_px[0]].sum())
        for l in range(1, pyr.n_layers):
            assert pyr.layers[l].sum() == 0.0

    def test_size_two_point_lands_in_layer1(self, warm_kernels):
        cam = make_camera(128, 128, focal=100.0)
        sub = fs.make_subfrustum(cam, (64, 64), 16)
        z = 2.0
        pos = np.array([[0.0, 0.0, z]])
        cloud = fs.NeuralPointCloud(pos, np.array([2.0 * z / cam.fx]),
                                    np.array([[1.0, 0, 0, 0]]), np.array([0.5]))
        pyr = fs.splat_pyramid(cloud, np.array([0]), sub)
        assert pyr.layers[0].sum() == 0.0
        assert pyr.layers[1].sum() > 0.0
        assert pyr.fragment_counts[0] == 0
        assert pyr.fragment_counts[1] > 0

    def test_matches_two_pass_oracle(self, warm_kernels):
        rng = np.random.default_rng(17)
        cam = make_camera(160, 160, focal=150.0)
        sub = fs.make_subfrustum(cam, (75, 82), 24)
        cloud = make_cloud(rng, 600, size_range=(0.001, 0.2))
        idx = fs.cull_points(cloud, sub, np.zeros((160, 160)), np.zeros((160, 160)))
        pyr = fs.splat_pyramid(cloud, idx, sub)
        layers, counts = pyramid_two_pass(cloud, idx, sub, pyr.n_layers, 16)
        for l in range(pyr.n_layers):
            assert np.array_equal(pyr.layers[l], layers[l]), f"layer {l}"
        assert pyr.fragment_counts == counts

    def test_order_independence(self, warm_kernels):
        rng = np.random.default_rng(23)
        cam = make_camera(128, 128)
        sub = fs.make_subfrustum(cam, (64, 64), 24)
        cloud = make_cloud(rng, 400)
        idx = np.arange(len(cloud))
        pyr_a = fs.splat_pyramid(cloud, idx, sub)
        perm = rng.permutation(len(cloud))
        shuffled = cloud.select(perm)
        pyr_b = fs.splat_pyramid(shuffled, np.arange(len(cloud)), sub)
        # distinct depths: fragment order is depth-sorted, so any input
        # permutation blends identically
        assert len(np.unique(cloud.positions[:, 2])) == len(cloud)
        for l in range(pyr_a.n_layers):
            assert np.allclose(pyr_a.layers[l], pyr_b.layers[l], atol=1e-12)

    def test_alpha_channel_in_unit_range(self, warm_kernels):
        rng = np.random.default_rng(29)
        cam = make_camera(128, 128)
        sub = fs.make_subfrustum(cam, (64, 64), 32)
        cloud = make_cloud(rng, 2000, size_range=(0.01, 0.3))
        pyr = fs.splat_pyramid(cloud, np.arange(len(cloud)), sub)
        for lay in pyr.layers:
            assert lay[:, :, -1].min() >= 0.0
            assert lay[:, :, -1].max() <= 1.0 + 1e-12

    def test_oversized_points_clamp_to_coarsest(self, warm_kernels):
        cam = make_camera(128, 128, focal=100.0)
        sub = fs.make_subfrustum(cam, (64, 64), 16)
        cloud = fs.NeuralPointCloud(np.array([[0, 0, 1.0]]), np.array([5.0]),
                                    np.array([[1.0, 0, 0, 0]]), np.array([0.5]))
        pyr = fs.splat_pyramid(cloud, np.array([0]), sub)
        assert pyr.fragment_counts[-1] > 0
        assert sum(pyr.fragment_counts[:-1]) == 0
