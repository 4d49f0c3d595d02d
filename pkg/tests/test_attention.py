import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from swarmseg.attention import (
    AttentionParams,
    attention_map,
    interface_metrics,
    patch_features,
    patch_grid,
    saliency_map,
    self_attention,
)
from swarmseg.edges import canny, gaussian_blur, gradient_magnitude, sobel_gradients
from swarmseg.geometry import distance_transform
from swarmseg.imaging import binarize, normalize
from swarmseg.phantom import PhantomSpec, synth_sample


def step_interface():
    img, _ = synth_sample(PhantomSpec(u_depth=0, background_std=0, deposit_std=0))
    grad = gradient_magnitude(sobel_gradients(gaussian_blur(img, 1.4)))
    edges = canny(binarize(img, 166))
    return img, grad, edges, distance_transform(edges)


class TestAttentionMap:
    def test_floor_for_zero_gradient(self):
        out = attention_map(np.zeros((3, 4)), np.full((3, 4), 7.0))
        np.testing.assert_array_equal(out, 0.25)

    def test_maximum(self):
        assert attention_map(np.ones((1, 1)), np.zeros((1, 1)))[0, 0] == 1.0

    def test_step_phantom_ranges(self):
        img, grad, edges, dist = step_interface()
        attn = attention_map(normalize(grad), dist)
        near = attn[(dist <= 1)]
        assert np.all((near >= 0.6) & (near <= 1.0))
        assert np.all(attn[dist > 10] == 0.25)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            attention_map(np.zeros((2, 2)), np.zeros((2, 3)))

    @given(arrays(np.float64, (3, 3), elements=st.floats(0, 1)),
           arrays(np.float64, (3, 3), elements=st.floats(0, 500)),
           st.floats(0, 0.99), st.floats(0.5, 50))
    def test_range_and_monotonicity(self, g, d, floor, decay):
        p = AttentionParams(floor=floor, decay=decay)
        a = attention_map(g, d, p)
        assert np.all(a >= floor - 1e-15) and np.all(a <= 1 + 1e-15)
        assert np.all(attention_map(np.minimum(g + 0.1, 1), d, p) >= a)
        assert np.all(attention_map(g, d + 1, p) <= a)

    def test_params_validation(self):
        for bad in (dict(floor=1.0), dict(decay=0), dict(patch_size=1)):
            with pytest.raises(ValueError):
                AttentionParams(**bad)


class TestPatchFeatures:
    def test_uniform(self):
        f = patch_features(np.full((20, 20), 77, np.uint8), np.zeros((20, 20)), 8)
        assert len(f) == 9
        assert np.all(f == f[0])

    def test_tiling(self):
        f = patch_features(np.zeros((16, 16), np.uint8), np.zeros((16, 16)), 8)
        assert f.shape == (4, 3)
        assert patch_grid(17, 16, 8) == (3, 2)

    def test_two_tone(self):
        img = np.zeros((8, 16), np.uint8)
        img[:, :8] = 40
        img[:, 8:] = 200
        g = np.zeros((8, 16))
        g[:, 8:] = 0.5
        f = patch_features(img, g, 8)
        np.testing.assert_allclose(f[:, 0], [40 / 255, 200 / 255])
        np.testing.assert_allclose(f[:, 1], [0, 0])
        np.testing.assert_allclose(f[:, 2], [0, 0.5])

    def test_ragged_patch_std(self):
        img = np.zeros((3, 10), np.uint8)
        img[:, 8] = 100
        f = patch_features(img, np.zeros((3, 10)), 8)
        # Second patch has 2 columns: half 0, half 100 -> mean 50, std 50.
        np.testing.assert_allclose(f[1], [50 / 255, 50 / 128, 0])


class TestSelfAttention:
    def test_identical_features(self):
        s = self_attention(np.tile([0.3, 0.2, 0.1], (6, 1)))
        np.testing.assert_allclose(s, 1 / 6, atol=1e-15)

    def test_single_patch(self):
        assert self_attention(np.array([[0.5, 0.1, 0.9]])).tolist() == [[1.0]]

    def test_matches_direct_evaluation(self, rng):
        f = rng.random((5, 3))
        s = self_attention(f)
        scale = 1 / math.sqrt(3)
        for i in range(5):
            e = [math.exp(scale * sum(f[i, k] * f[j, k] for k in range(3))) for j in range(5)]
            total = math.fsum(e)
            np.testing.assert_allclose(s[i], [v / total for v in e], rtol=1e-12)
        np.testing.assert_allclose(s.sum(axis=1), 1, atol=1e-9)

    def test_large_logits_stay_finite(self):
        s = self_attention(np.array([[100.0, 0, 0], [0, 100.0, 0]]))
        assert np.all(np.isfinite(s))
        np.testing.assert_allclose(s.sum(axis=1), 1, atol=1e-12)

    def test_non_finite(self):
        with pytest.raises(ValueError):
            self_attention(np.array([[np.inf, 0, 0]]))


class TestSaliency:
    def test_uniform_matrix(self):
        out = saliency_map(np.full((4, 4), 0.25), (2, 2), (16, 16), 8)
        assert not out.any()

    def test_single_attended_patch(self):
        s = np.full((4, 4), 0.0)
        s[:, 2] = 1.0
        out = saliency_map(s, (2, 2), (10, 12), 6)
        assert out.shape == (10, 12)
        assert np.all(out[6:, :6] == 1.0)
        assert out.max() == 1.0 and (out == 1.0).sum() == 4 * 6

    def test_layout_mismatch(self):
        with pytest.raises(ValueError):
            saliency_map(np.eye(3), (2, 2), (16, 16), 8)

    def test_band_gets_top_decile(self):
        img = np.full((64, 64), 128, np.uint8)
        img[24:40:2, :] = 30
        img[25:40:2, :] = 230
        band_rows = {3, 4}
        g = normalize(gradient_magnitude(sobel_gradients(gaussian_blur(img, 1.4))))
        s = self_attention(patch_features(img, g, 8))
        incoming = s.mean(axis=0)
        top = np.argsort(-incoming, kind="stable")[: math.ceil(0.1 * len(incoming))]
        hits = sum(1 for p in top if p // 8 in band_rows)
        assert hits / len(top) >= 0.8


class TestInterfaceMetrics:
    def test_hole_free(self):
        m = np.zeros((12, 12), np.uint8)
        m[2:10, 2:10] = 255
        e = canny(m)
        met = interface_metrics(m, m, e, distance_transform(e), 100, 3)
        assert met.defect_density == 0.0

    def test_ten_pixel_hole(self):
        m = np.zeros((14, 14), np.uint8)
        m[2:12, 2:12] = 255      # 100-pixel deposit footprint
        m[5:7, 4:9] = 0          # 10-pixel void inside it
        e = canny(m)
        met = interface_metrics(m, m, e, distance_transform(e), 128, 3)
        assert met.defect_density == pytest.approx(0.1)

    def test_step_sharpness(self):
        img, grad, edges, dist = step_interface()
        met = interface_metrics(img, binarize(img, 166), edges, dist, 166, 10, grad=grad)
        assert met.transition_sharpness > 3
        assert 0 <= met.edge_density <= 1 and met.threshold == 166
        assert met.white_fraction == pytest.approx(100 / 256)

    def test_flat_image_zero_sharpness(self):
        img = np.full((8, 8), 9, np.uint8)
        e = np.zeros((8, 8), np.uint8)
        e[0, 0] = 255
        met = interface_metrics(img, np.zeros((8, 8), np.uint8), e, distance_transform(e), 50, 2)
        assert met.transition_sharpness == 0 and met.defect_density == 0

    @settings(max_examples=30, deadline=None)
    @given(arrays(np.bool_, (10, 10)))
    def test_densities_are_fractions(self, b):
        m = np.where(b, 255, 0).astype(np.uint8)
        e = m.copy()
        e[0, 0] = 255
        met = interface_metrics(m, m, e, distance_transform(e), 128, 2)
        assert 0 <= met.defect_density <= 1
        assert 0 <= met.edge_density <= 1
        assert met.transition_sharpness >= 0
