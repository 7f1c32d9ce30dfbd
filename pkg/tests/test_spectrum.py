import cmath
import math

import numpy as np
import pytest

from cfalab.cfa import CATALOG, make_cfa
from cfalab.spectrum import (
    analyze_tile,
    check_degeneracy,
    conjugate_key,
    distance,
    export_spectrum_csv,
    fold,
    reconstruct_indicators,
)

PI = math.pi


def dft_oracle(tile):
    # textbook double sum, one channel indicator at a time
    P, Q = tile.period_y, tile.period_x
    n = tile.color_system.n_channels
    out = np.zeros((n, P, Q), complex)
    for c in range(n):
        for v in range(P):
            for u in range(Q):
                s = 0j
                for y in range(P):
                    for x in range(Q):
                        if tile.grid[y, x] == c:
                            s += cmath.exp(-2j * PI * (u * x / Q + v * y / P))
                out[c, v, u] = s / (P * Q)
    return out


@pytest.mark.parametrize("name", CATALOG)
def test_coefficients_match_oracle(name):
    tile = make_cfa(name).tile
    np.testing.assert_allclose(analyze_tile(tile).coefficient_cube(), dft_oracle(tile), atol=1e-12)


@pytest.mark.parametrize("name", CATALOG)
def test_parseval(name):
    tile = make_cfa(name).tile
    rep = analyze_tile(tile)
    for c in range(tile.color_system.n_channels):
        energy = sum(abs(k.coeff[c]) ** 2 for k in rep.carriers)
        assert abs(energy - tile.density()[c]) < 1e-9


@pytest.mark.parametrize("name", CATALOG)
def test_reconstruction(name):
    tile = make_cfa(name).tile
    ind = np.stack([(tile.grid == c) for c in range(tile.color_system.n_channels)]).astype(float)
    assert np.abs(reconstruct_indicators(analyze_tile(tile)) - ind).max() < 1e-9


@pytest.mark.parametrize("name", CATALOG)
def test_basis_coordinates_reproduce_coefficients(name):
    rep = analyze_tile(make_cfa(name).tile)
    M = rep.tile.color_system.basis_matrix
    for c in rep.carriers:
        np.testing.assert_allclose(M.T @ c.basis_coords, c.coeff, atol=1e-12)


def test_dc_is_pure_luminance():
    for name in CATALOG:
        rep = analyze_tile(make_cfa(name).tile)
        dc = rep.luminance_carrier
        assert dc.dominant_direction() == 0 and dc.purity() > 0.999999


class TestBayer:
    rep = analyze_tile(make_cfa("bayer").tile)

    def test_carrier_set(self):
        assert sorted((round(c.freq[0], 9), round(c.freq[1], 9)) for c in self.rep.carriers) == sorted(
            [(0.0, 0.0), (round(PI, 9), 0.0), (0.0, round(PI, 9)), (round(PI, 9), round(PI, 9))]
        )

    def test_values(self):
        # G R / B G: c1 at the corner, c2 with opposite signs on the axes
        np.testing.assert_allclose(self.rep.find(0, 0).basis_coords, [0.25, 0, 0], atol=1e-12)
        np.testing.assert_allclose(self.rep.find(PI, PI).basis_coords, [0, 0.25, 0], atol=1e-12)
        np.testing.assert_allclose(self.rep.find(PI, 0).basis_coords, [0, 0, -0.25], atol=1e-12)
        np.testing.assert_allclose(self.rep.find(0, PI).basis_coords, [0, 0, 0.25], atol=1e-12)


class TestQuadBayer:
    rep = analyze_tile(make_cfa("quad_bayer").tile)

    @pytest.mark.parametrize("f", [(PI, PI), (PI, 0), (0, PI)])
    def test_zeros(self, f):
        assert self.rep.find(*f) is None
        cube = self.rep.coefficient_cube()
        u, v = int(round(f[0] / (PI / 2))) % 4, int(round(f[1] / (PI / 2))) % 4
        assert np.abs(cube[:, v, u]).max() == 0.0

    def test_nonzero_set(self):
        h = PI / 2
        expected = {(0, 0)} | {(sx * h, 0) for sx in (1, -1)} | {(0, sy * h) for sy in (1, -1)}
        expected |= {(sx * h, sy * h) for sx in (1, -1) for sy in (1, -1)}
        got = {(round(c.freq[0], 9), round(c.freq[1], 9)) for c in self.rep.carriers}
        assert got == {(round(fold(a), 9), round(fold(b), 9)) for a, b in expected}

    def test_dc_and_magnitudes(self):
        np.testing.assert_allclose(self.rep.find(0, 0).basis_coords, [0.25, 0, 0], atol=1e-12)
        for c in self.rep.chroma_carriers:
            assert np.abs(c.basis_coords).max() == pytest.approx(0.125 * math.sqrt(2), rel=1e-9) or \
                np.abs(c.basis_coords).max() == pytest.approx(0.125, rel=1e-9)


class TestHelpers:
    def test_fold(self):
        assert fold(3 * PI / 2) == pytest.approx(-PI / 2)
        assert fold(-PI) == pytest.approx(PI)
        assert fold(0.0) == 0.0

    def test_distance_wraps(self):
        assert distance((PI, 0), (-PI + 0.1, 0)) == pytest.approx(0.1)
        assert distance((PI / 2, PI / 2), metric="chebyshev") == pytest.approx(PI / 2)
        with pytest.raises(ValueError):
            distance((0, 0), metric="taxicab")

    def test_conjugate_key(self):
        assert conjugate_key((PI / 2, -PI / 2)) == conjugate_key((-PI / 2, PI / 2))

    def test_csv_shape(self):
        text = export_spectrum_csv(analyze_tile(make_cfa("bayer").tile))
        lines = text.strip().splitlines()
        assert lines[0] == "wx,wy,abs_l,abs_c1,abs_c2"
        assert len(lines) == 5


EXPECTED = {
    "bayer": [],
    "quad_bayer": ["c2"],
    "nona_bayer": [],
    "hexadeca_bayer": [],
    "rgbw_kodak": ["c1"],
    "rgbw_ia": [],
    "quad_rgbw": [],
    "lms_single": [],
    "quad_lms": [],
}


@pytest.mark.parametrize("name", CATALOG)
def test_degeneracy_verdicts(name):
    v = check_degeneracy(analyze_tile(make_cfa(name).tile))
    assert v.failed_directions == EXPECTED[name]
    assert v.passed == (not EXPECTED[name])


def test_kodak_c1_has_one_copy():
    v = check_degeneracy(analyze_tile(make_cfa("rgbw_kodak").tile))["c1"]
    assert v.strong_copies == 1 and not v.passed


def test_verdict_json():
    doc = check_degeneracy(analyze_tile(make_cfa("quad_bayer").tile)).to_json()
    assert doc["verdict"] == "FAIL"
    assert {d["direction"] for d in doc["directions"]} == {"c1", "c2"}
