import numpy as np
import pytest

from cfalab.color import LMS, RGB, RGBW, Domain, PlanarImage, channels_to_basis
from cfalab.postprocess import PostprocessConfig, denoise_chroma, postprocess, suppress_false_color


def img(a):
    return PlanarImage(np.asarray(a, dtype=float), Domain.LINEAR_SENSOR)


def chroma(a, cs):
    return channels_to_basis(np.asarray(a, dtype=float), cs)[1:]


class TestFalseColor:
    def test_impulse_removed(self):
        s = np.full((3, 32, 32), 0.5)
        s[0, 16, 16] = 0.9  # one red speck
        out = suppress_false_color(img(s), RGB).samples
        before = np.abs(chroma(s, RGB)).max()
        assert np.abs(chroma(out, RGB)).max() * 20 <= before

    def test_luminance_untouched(self):
        s = np.random.default_rng(0).uniform(size=(3, 24, 24))
        out = suppress_false_color(img(s), RGB).samples
        np.testing.assert_allclose(channels_to_basis(out.astype(float), RGB)[0], channels_to_basis(s, RGB)[0], atol=1e-5)

    def test_gray_passes_through(self):
        s = np.repeat(np.random.default_rng(1).uniform(size=(1, 16, 16)), 3, 0)
        x = img(s)
        assert suppress_false_color(x, RGB) is x


class TestDenoise:
    @pytest.mark.parametrize("cs", [RGB, LMS], ids=lambda c: c.name)
    def test_chroma_noise_reduced(self, cs):
        rng = np.random.default_rng(2)
        s = 0.5 + 0.05 * rng.standard_normal((3, 64, 64))
        out = denoise_chroma(img(s), cs).samples
        assert chroma(s, cs).std() >= 3 * chroma(out, cs)[:, 8:-8, 8:-8].std()

    def test_w_guide_is_exact(self):
        rng = np.random.default_rng(3)
        s = 0.5 + 0.05 * rng.standard_normal((4, 48, 48))
        out = denoise_chroma(img(s), RGBW).samples
        np.testing.assert_array_equal(out[3], img(s).samples[3])
        assert (out[:3] - out[3]).std() * 3 <= (s[:3] - s[3]).std()

    def test_zero_sigma_is_noop(self):
        x = img(np.random.default_rng(4).uniform(size=(3, 8, 8)))
        assert denoise_chroma(x, RGB, cfg=PostprocessConfig(sigma=0.0)) is x


class TestPostprocess:
    def test_off_is_identity(self):
        x = img(np.random.default_rng(5).uniform(size=(3, 16, 16)))
        assert postprocess(x, RGB, PostprocessConfig.off()) is x

    def test_order(self):
        # on a flat image both steps are no-ops, so step order cannot matter
        x = img(np.full((4, 16, 16), 0.3))
        a = postprocess(x, RGBW, PostprocessConfig(), binned_w=True).samples
        b = postprocess(x, RGBW, PostprocessConfig(denoise_first=False)).samples
        np.testing.assert_allclose(a, b, atol=1e-7)

    def test_bad_config(self):
        with pytest.raises(ValueError):
            PostprocessConfig(median_size=4)
        with pytest.raises(ValueError):
            PostprocessConfig(sigma=-1)

    def test_channel_mismatch(self):
        with pytest.raises(ValueError):
            suppress_false_color(img(np.zeros((4, 8, 8))), RGB)
