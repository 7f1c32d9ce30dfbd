import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from cfalab.color import (
    LMS,
    MOBILE_CCM,
    PSNR_CAP_DB,
    RGB,
    RGBW,
    ColorError,
    ColorMatrix,
    ColorSystem,
    Domain,
    PlanarImage,
    RangeError,
    SingularMatrixError,
    apply_color_matrix,
    basis_to_channels,
    channels_to_basis,
    psnr,
    srgb_decode,
    srgb_encode,
)


def mp_decode(v):
    # reference transfer curve evaluated in 50-digit arithmetic
    v = mpmath.mpf(float(v))
    if v <= mpmath.mpf("0.04045"):
        return v / mpmath.mpf("12.92")
    return ((v + mpmath.mpf("0.055")) / mpmath.mpf("1.055")) ** mpmath.mpf("2.4")


def img(a, domain=Domain.ENCODED_SRGB):
    a = np.asarray(a, dtype=float)
    if a.ndim == 2:
        a = a[None]
    return PlanarImage(a, domain)


class TestPlanarImage:
    def test_shape_and_readonly(self):
        x = img(np.zeros((3, 4, 5)))
        assert x.shape == (3, 4, 5) and (x.channels, x.height, x.width) == (3, 4, 5)
        assert x.samples.dtype == np.float32
        with pytest.raises(ValueError):
            x.samples[0, 0, 0] = 1.0

    def test_encoded_range_checked(self):
        with pytest.raises(RangeError):
            img([[0.5, 1.5]])

    def test_clipping_is_explicit(self):
        x = img([[-0.5, 0.5, 2.0]], Domain.LINEAR_SCENE)
        y, n = x.clipped(0.0, 1.0)
        assert n == 2
        np.testing.assert_array_equal(y.samples[0, 0], [0.0, 0.5, 1.0])


class TestSrgb:
    def test_decode_matches_high_precision_reference(self):
        v = np.linspace(0, 1, 1001)
        got = srgb_decode(img(v[None, :])).samples[0, 0].astype(float)
        ref = np.array([float(mp_decode(x)) for x in v.astype(np.float32)])
        np.testing.assert_allclose(got, ref, atol=1e-7)

    def test_knee_continuity(self):
        lo = float(mp_decode(0.04045))
        assert abs(lo - 0.04045 / 12.92) < 1e-12
        # both branches agree at the knee to better than 1e-7
        hi = ((0.04045 + 0.055) / 1.055) ** 2.4
        assert abs(lo - hi) < 1e-7

    def test_round_trip(self):
        v = np.random.default_rng(0).uniform(0, 1, (3, 32, 32))
        back = srgb_encode(srgb_decode(img(v))).samples
        assert np.abs(back - v.astype(np.float32)).max() < 1e-6

    def test_decode_error_names_index(self):
        x = PlanarImage(np.zeros((1, 2, 2)), Domain.LINEAR_SCENE)
        with pytest.raises(ColorError):
            srgb_decode(x)

    def test_encode_clips_and_reports(self):
        x = img([[-0.1, 0.5, 1.2]], Domain.LINEAR_SCENE)
        y, n = srgb_encode(x, report=True)
        assert n == 2
        assert y.domain is Domain.ENCODED_SRGB
        assert y.samples.min() >= 0 and y.samples.max() <= 1

    def test_known_values(self):
        got = srgb_decode(img([[0.0, 1.0, 0.5]])).samples[0, 0]
        np.testing.assert_allclose(got, [0.0, 1.0, 0.21404114], atol=1e-7)


class TestColorMatrix:
    def test_mobile_ccm_rows_sum_to_one(self):
        np.testing.assert_allclose(MOBILE_CCM.entries.sum(axis=1), 1.0, atol=1e-12)

    def test_inverse(self):
        np.testing.assert_allclose(MOBILE_CCM.entries @ MOBILE_CCM.inverse, np.eye(3), atol=1e-12)

    def test_singular(self):
        with pytest.raises(SingularMatrixError):
            ColorMatrix([[1, 2, 3], [2, 4, 6], [0, 0, 1]]).inverse

    def test_apply_and_undo(self):
        x = img(np.random.default_rng(1).uniform(0, 1, (3, 8, 8)), Domain.LINEAR_SCENE)
        y = apply_color_matrix(apply_color_matrix(x, MOBILE_CCM, inverse=True), MOBILE_CCM)
        np.testing.assert_allclose(y.samples, x.samples, atol=1e-6)

    def test_gray_maps_to_gray(self):
        x = img(np.full((3, 2, 2), 0.3), Domain.LINEAR_SCENE)
        y = apply_color_matrix(x, MOBILE_CCM, inverse=True).samples
        np.testing.assert_allclose(y, 0.3, atol=1e-7)


class TestColorSystems:
    def test_rgb_basis(self):
        l, c1, c2 = channels_to_basis(np.array([1.0, 0.0, 0.0]), RGB)
        assert (l, c1, c2) == (1.0, -1.0, 1.0)

    def test_rgbw_basis(self):
        coords = channels_to_basis(np.array([0.0, 0.0, 0.0, 1.0]), RGBW)
        np.testing.assert_array_equal(coords, [4, 0, 0, -4])

    def test_lms_basis(self):
        coords = channels_to_basis(np.array([1.0, 1.0, 1.0]), LMS)
        np.testing.assert_array_equal(coords, [8, 0, 0])

    @pytest.mark.parametrize("cs", [RGB, RGBW, LMS], ids=lambda c: c.name)
    def test_gray_has_zero_chroma(self, cs):
        coords = channels_to_basis(np.ones(cs.n_channels), cs)
        np.testing.assert_allclose(coords[1:], 0.0)

    @pytest.mark.parametrize("cs", [RGB, RGBW, LMS], ids=lambda c: c.name)
    @settings(max_examples=50, deadline=None)
    @given(data=st.data())
    def test_basis_round_trip(self, cs, data):
        v = data.draw(arrays(np.float64, (cs.n_channels, 3), elements=st.floats(-10, 10)))
        back = basis_to_channels(channels_to_basis(v, cs), cs)
        np.testing.assert_allclose(back, v, atol=1e-9)

    def test_degenerate_basis_rejected(self):
        with pytest.raises(SingularMatrixError):
            ColorSystem("bad", ("A", "B"), [1, 1], [[2, 2]], [[1, 0, 0], [0, 1, 0]])

    def test_wrong_channel_count(self):
        with pytest.raises(ColorError):
            channels_to_basis(np.ones(4), RGB)

    def test_white_balance_makes_gray_neutral(self):
        for cs in (RGB, RGBW, LMS):
            ch = cs.sensitivity_mix @ np.ones(3) * cs.white_balance_gains()
            np.testing.assert_allclose(ch, 1.0)


class TestPsnr:
    def test_identical_is_capped(self):
        a = np.random.default_rng(0).uniform(size=(3, 8, 8))
        assert psnr(a, a) == PSNR_CAP_DB

    def test_known_mse(self):
        a = np.zeros((1, 10, 10))
        b = np.full((1, 10, 10), 0.1)
        assert psnr(a, b) == pytest.approx(20.0)

    def test_border_excluded(self):
        a = np.zeros((1, 10, 10))
        b = a.copy()
        b[0, 0, :] = 1.0
        assert psnr(a, b, border=1) == PSNR_CAP_DB

    def test_empty_interior(self):
        with pytest.raises(ColorError, match="border"):
            psnr(np.zeros((1, 10, 10)), np.zeros((1, 10, 10)), border=5)

    def test_shape_mismatch(self):
        with pytest.raises(ColorError):
            psnr(np.zeros((1, 2, 2)), np.zeros((1, 3, 3)))
