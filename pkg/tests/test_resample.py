from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lookupf.resample import resize_bilinear, resize_nearest


class TestBilinear:
    def test_identity_is_exact(self):
        rng = np.random.default_rng(0)
        arr = rng.integers(0, 256, (7, 9), np.uint8)
        out = resize_bilinear(arr, 7, 9)
        assert out.dtype == np.float64
        assert np.array_equal(out, arr.astype(np.float64))

    def test_constant_survives_exactly(self):
        arr = np.full((5, 5), 13.25, np.float64)
        for oh, ow in [(5, 5), (3, 8), (17, 2), (64, 64)]:
            out = resize_bilinear(arr, oh, ow)
            assert np.array_equal(out, np.full((oh, ow), 13.25))

    def test_two_by_two_center(self):
        arr = np.array([[0.0, 10.0], [20.0, 30.0]])
        out = resize_bilinear(arr, 1, 1)
        # single output pixel samples the exact center: mean of corners
        assert out[0, 0] == pytest.approx(15.0)

    def test_upsample_interpolates_between_samples(self):
        arr = np.array([[0.0, 100.0]])
        out = resize_bilinear(arr, 1, 4)
        # half-pixel-center mapping: x = (i + .5)/2 - .5 over src coords
        assert out[0] == pytest.approx([0.0, 25.0, 75.0, 100.0])

    def test_values_within_input_range(self):
        rng = np.random.default_rng(3)
        arr = rng.uniform(-5, 5, (11, 6))
        out = resize_bilinear(arr, 23, 17)
        assert out.min() >= arr.min() - 1e-12
        assert out.max() <= arr.max() + 1e-12

    def test_channels_resized_independently(self):
        rng = np.random.default_rng(4)
        arr = rng.uniform(0, 1, (6, 5, 3))
        out = resize_bilinear(arr, 9, 8)
        for c in range(3):
            assert np.array_equal(out[:, :, c], resize_bilinear(arr[:, :, c], 9, 8))

    @given(
        h=st.integers(1, 12), w=st.integers(1, 12),
        oh=st.integers(1, 12), ow=st.integers(1, 12),
        seed=st.integers(0, 1000),
    )
    @settings(max_examples=60, deadline=None)
    def test_shape_and_finiteness(self, h, w, oh, ow, seed):
        arr = np.random.default_rng(seed).uniform(-1, 1, (h, w))
        out = resize_bilinear(arr, oh, ow)
        assert out.shape == (oh, ow)
        assert np.isfinite(out).all()


class TestNearest:
    def test_identity(self):
        rng = np.random.default_rng(1)
        arr = rng.integers(0, 2, (6, 6), np.uint8)
        assert np.array_equal(resize_nearest(arr, 6, 6), arr)

    def test_preserves_dtype_and_binaryness(self):
        bits = (np.random.default_rng(2).uniform(size=(9, 7)) > 0.5).astype(np.uint8)
        out = resize_nearest(bits, 20, 5)
        assert out.dtype == np.uint8
        assert set(np.unique(out)) <= {0, 1}

    def test_exact_2x(self):
        arr = np.array([[1, 2], [3, 4]], np.uint8)
        out = resize_nearest(arr, 4, 4)
        expected = np.array([[1, 1, 2, 2], [1, 1, 2, 2], [3, 3, 4, 4], [3, 3, 4, 4]], np.uint8)
        assert np.array_equal(out, expected)
