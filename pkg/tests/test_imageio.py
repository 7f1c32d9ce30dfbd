import numpy as np
import pytest

from cfalab.color import Domain, PlanarImage
from cfalab.imageio import ImageIOError, read_image, read_image_codes, read_raw, write_codes, write_image, write_raw


@pytest.mark.parametrize("suffix", [".png", ".ppm"])
@pytest.mark.parametrize("bits", [8, 16])
def test_rgb_round_trip(tmp_path, suffix, bits):
    rng = np.random.default_rng(0)
    peak = (1 << bits) - 1
    codes = rng.integers(0, peak + 1, (3, 9, 13))
    x = PlanarImage(codes / peak, Domain.ENCODED_SRGB)
    p = write_image(tmp_path / f"a{suffix}", x, bits)
    back, got_peak = read_image_codes(p)
    assert got_peak == peak
    np.testing.assert_array_equal(back, codes)


def test_gray_png(tmp_path):
    codes = np.arange(20, dtype=np.uint16).reshape(1, 4, 5)
    p = write_codes(tmp_path / "g.png", codes, 8)
    np.testing.assert_array_equal(read_image_codes(p)[0], codes)


def test_domain_sidecar(tmp_path):
    x = PlanarImage(np.full((3, 4, 4), 0.5), Domain.LINEAR_SCENE)
    p = write_image(tmp_path / "lin.png", x)
    assert read_image(p).domain is Domain.LINEAR_SCENE
    q = write_image(tmp_path / "enc.png", PlanarImage(np.full((3, 4, 4), 0.5), Domain.ENCODED_SRGB))
    assert read_image(q).domain is Domain.ENCODED_SRGB


def test_raw_dump(tmp_path):
    x = PlanarImage(np.random.default_rng(1).normal(size=(2, 5, 6)), Domain.LINEAR_SENSOR)
    y = read_raw(write_raw(tmp_path / "r.bin", x))
    assert y.domain is Domain.LINEAR_SENSOR
    np.testing.assert_array_equal(y.samples, x.samples)


def test_errors(tmp_path):
    with pytest.raises(ImageIOError):
        read_image(tmp_path / "missing.png")
    (tmp_path / "a.tif").write_bytes(b"xx")
    with pytest.raises(ImageIOError):
        read_image(tmp_path / "a.tif")
    with pytest.raises(ImageIOError):
        write_codes(tmp_path / "b.png", np.zeros((2, 3, 3), int), 8)
    with pytest.raises(ImageIOError):
        write_codes(tmp_path / "c.png", np.full((1, 2, 2), 300), 8)
    with pytest.raises(ImageIOError):
        write_image(tmp_path / "d.png", PlanarImage(np.zeros((3, 2, 2)), Domain.ENCODED_SRGB), bits=12)
