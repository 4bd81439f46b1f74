import numpy as np
import pytest
from hypothesis import given, strategies as st

import fovsplat as fs
from fovsplat.composite import radial_mask_image, to_uint8


class TestSmootherstep:
    @pytest.mark.parametrize("x,y", [(0.0, 0.0), (1.0, 1.0), (0.5, 0.5)])
    def test_anchor_values(self, x, y):
        assert fs.smootherstep(x) == pytest.approx(y, abs=1e-12)

    def test_matches_quintic_on_domain(self):
        xs = np.linspace(0, 1, 101)
        poly = 6 * xs ** 5 - 15 * xs ** 4 + 10 * xs ** 3
        assert np.allclose(fs.smootherstep(xs), poly, atol=1e-12)

    def test_endpoint_derivatives_vanish(self):
        # central finite differences on the quintic (the ramp's analytic
        # extension); the in-domain values are pinned to it above
        def poly(x):
            return 6 * x ** 5 - 15 * x ** 4 + 10 * x ** 3
        h = 1e-4
        for x0 in (0.0, 1.0):
            d1 = (poly(x0 + h) - poly(x0 - h)) / (2 * h)
            d2 = (poly(x0 + h) - 2 * poly(x0) + poly(x0 - h)) / h ** 2
            assert abs(d1) < 1e-6
            assert abs(d2) < 1e-6

    @given(st.floats(min_value=-2, max_value=3))
    def test_clamped_range(self, x):
        y = fs.smootherstep(x)
        assert 0.0 <= y <= 1.0

    @given(st.floats(min_value=0, max_value=1), st.floats(min_value=0, max_value=1))
    def test_monotone(self, a, b):
        lo, hi = min(a, b), max(a, b)
        assert fs.smootherstep(lo) <= fs.smootherstep(hi) + 1e-15


class TestRadialFactor:
    def test_at_gaze(self):
        f_p = fs.radial_factor(100.0, 100.0, (100.0, 100.0), d_f=256, m=0.75)
        assert f_p == pytest.approx(-3.0)

    def test_at_radius(self):
        f_p = fs.radial_factor(356.0, 100.0, (100.0, 100.0), d_f=256, m=0.75)
        assert f_p == pytest.approx(1.0)

    def test_blend_midpoint(self):
        f_p = fs.radial_factor(100.0 + 0.875 * 256, 100.0, (100.0, 100.0),
                               d_f=256, m=0.75)
        assert f_p == pytest.approx(0.5)


class TestEdgeFactor:
    def test_constant_image_zero(self):
        img = np.full((16, 16, 3), 0.4)
        assert not fs.edge_factor(img).any()

    def test_vertical_step_magnitude(self):
        img = np.zeros((12, 12, 3))
        img[:, 6:, :] = 1.0
        fe = fs.edge_factor(img)
        interior = fe[3:-3]
        # hand convolution: columns adjacent to the step see |gx| = 4
        assert np.allclose(interior[:, 5], 4.0)
        assert np.allclose(interior[:, 6], 4.0)
        assert np.allclose(interior[:, :4], 0.0)

    def test_transpose_symmetry(self):
        rng = np.random.default_rng(0)
        img = rng.uniform(0, 1, (20, 20))
        assert np.allclose(fs.edge_factor(img.T), fs.edge_factor(img).T, atol=1e-12)


class TestBlendMask:
    def test_pure_foveal_inside(self):
        m = fs.blend_mask(np.full((4, 4), -0.5), np.zeros((4, 4)))
        assert np.allclose(m.c, 1.0)

    def test_pure_peripheral_outside(self):
        m = fs.blend_mask(np.ones((4, 4)), np.zeros((4, 4)))
        assert np.allclose(m.c, 0.0)

    def test_midpoint(self):
        m = fs.blend_mask(np.full((2, 2), 0.5), np.zeros((2, 2)), gamma_edge=0.2)
        assert np.allclose(m.c, 0.5)

    def test_resolution_mismatch(self):
        with pytest.raises(ValueError, match="mismatch"):
            fs.blend_mask(np.zeros((4, 4)), np.zeros((5, 5)))

    def test_c_in_unit_interval_for_any_edge(self):
        rng = np.random.default_rng(1)
        f_p = rng.uniform(-4, 2, (8, 8))
        f_e = rng.uniform(0, 50, (8, 8))
        m = fs.blend_mask(f_p, f_e)
        assert m.c.min() >= 0.0 and m.c.max() <= 1.0

    def test_radial_profile_monotone_and_anchored(self):
        size = 128
        f_p = radial_mask_image(size, (0, 0), (64.0, 64.0), d_f=48, m=0.75)
        mask = fs.blend_mask(f_p, np.zeros_like(f_p))
        row = mask.c[64, 64:]
        r = np.arange(row.size) + 0.5
        inside = r <= 0.75 * 48
        assert np.allclose(row[inside], 1.0)
        # entire blend band is non-increasing with radius
        assert np.all(np.diff(row) <= 1e-12)
        assert row[int(np.ceil(48.0))] == 0.0


class TestCompose:
    def test_c_one_replaces_crop(self):
        rng = np.random.default_rng(2)
        p = rng.uniform(0, 1, (32, 32, 3))
        f = rng.uniform(0, 1, (16, 16, 3))
        mask = fs.BlendMask(c=np.ones((16, 16)), f_p=None, f_e=None)
        out = fs.compose(p, f, mask, (8, 8))
        assert np.array_equal(out[8:24, 8:24], f)
        assert np.array_equal(out[:8], p[:8])

    def test_c_zero_is_identity(self):
        rng = np.random.default_rng(3)
        p = rng.uniform(0, 1, (32, 32, 3))
        f = rng.uniform(0, 1, (16, 16, 3))
        mask = fs.BlendMask(c=np.zeros((16, 16)), f_p=None, f_e=None)
        out = fs.compose(p, f, mask, (8, 8))
        assert np.array_equal(out, p)

    def test_half_mix(self):
        p = np.zeros((8, 8, 3))
        f = np.ones((4, 4, 3))
        mask = fs.BlendMask(c=np.full((4, 4), 0.5), f_p=None, f_e=None)
        out = fs.compose(p, f, mask, (2, 2))
        assert np.allclose(out[2:6, 2:6], 0.5)

    def test_equal_images_any_mask_exact(self):
        rng = np.random.default_rng(4)
        p = rng.uniform(0, 1, (32, 32, 3))
        f = p[8:24, 8:24].copy()
        mask = fs.BlendMask(c=rng.uniform(0, 1, (16, 16)), f_p=None, f_e=None)
        out = fs.compose(p, f, mask, (8, 8))
        assert np.array_equal(out, p)

    def test_out_of_bounds_rejected(self):
        p = np.zeros((16, 16, 3))
        f = np.zeros((8, 8, 3))
        mask = fs.BlendMask(c=np.zeros((8, 8)), f_p=None, f_e=None)
        with pytest.raises(ValueError, match="bounds"):
            fs.compose(p, f, mask, (12, 12))

    def test_continuous_across_crop_border(self):
        # with f_e = 0, c = 0 on the r_norm = 1 ring, so the composite equals
        # P everywhere the crop boundary is at least d_f from the gaze
        rng = np.random.default_rng(5)
        p = rng.uniform(0, 1, (128, 128, 3))
        f = rng.uniform(0, 1, (64, 64, 3))
        f_p = radial_mask_image(64, (32, 32), (64.0, 64.0), d_f=28, m=0.75)
        mask = fs.blend_mask(f_p, np.zeros_like(f_p))
        out = fs.compose(p, f, mask, (32, 32))
        border = np.concatenate([out[32, 32:96], out[95, 32:96],
                                 out[32:96, 32], out[32:96, 95]])
        expect = np.concatenate([p[32, 32:96], p[95, 32:96],
                                 p[32:96, 32], p[32:96, 95]])
        assert np.array_equal(border, expect)


class TestTonemap:
    def test_identity_under_unit_params(self):
        rng = np.random.default_rng(6)
        img = rng.uniform(0, 2, (8, 8, 3))
        out = fs.tonemap(img, exposure=0.0, gamma=1.0)
        assert np.array_equal(out, np.clip(img, 0, 1))

    def test_exposure_doubles(self):
        img = np.full((2, 2, 3), 0.25)
        assert np.allclose(fs.tonemap(img, exposure=1.0, gamma=1.0), 0.5)

    def test_gamma_curve(self):
        img = np.full((2, 2, 3), 0.25)
        out = fs.tonemap(img, exposure=0.0, gamma=2.2)
        assert np.allclose(out, 0.25 ** (1 / 2.2))
        assert out[0, 0, 0] == pytest.approx(0.5326, abs=2e-4)

    def test_quantization_only_at_export(self):
        img = np.full((2, 2, 3), 0.5001)
        out = fs.tonemap(img, 0.0, 1.0)
        assert out[0, 0, 0] == pytest.approx(0.5001)
        assert to_uint8(out)[0, 0, 0] == 128
