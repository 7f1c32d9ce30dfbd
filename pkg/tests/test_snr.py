import math

import pytest

from cfalab.cfa import DIGITAL, FD, make_cfa
from cfalab.snr import (
    DOUBLE_BINNABLE,
    KNOWN_DISCREPANCIES,
    SINGLE_BINNABLE,
    BinChain,
    Regime,
    advantage_table,
    compare_with_published,
    readout_cost,
    stage_gain_db,
    table_csv,
    table_text,
)


def entry(cfa, mode):
    return next(e for e in advantage_table() if e.cfa == cfa and e.mode == mode)


class TestStageGains:
    def test_fd_read_limited(self):
        assert stage_gain_db(FD, 4, Regime.READ_LIMITED) == pytest.approx(20 * math.log10(4))

    @pytest.mark.parametrize("mode,regime", [(DIGITAL, "read-limited"), (FD, "shot-limited"), (DIGITAL, "shot-limited")])
    def test_sqrt_n(self, mode, regime):
        assert stage_gain_db(mode, 4, regime) == pytest.approx(10 * math.log10(4))

    def test_bad_fan_in(self):
        with pytest.raises(ValueError):
            stage_gain_db(FD, 1, Regime.READ_LIMITED)
        with pytest.raises(ValueError):
            BinChain(((FD, 1),))

    def test_chain_adds(self):
        chain = BinChain(((FD, 4), (DIGITAL, 4)))
        assert chain.gain_db(Regime.READ_LIMITED) == pytest.approx(12.0412 + 6.0206, abs=1e-3)


class TestReadoutCost:
    @pytest.mark.parametrize("name,rounds,expected", [
        ("quad_bayer", 1, (25.0, 4.0)),
        ("rgbw_ia", 1, (50.0, 2.0)),
        ("hexadeca_bayer", 2, (6.25, 16.0)),
        ("quad_rgbw", 2, (12.5, 8.0)),
        ("quad_lms", 0, (100.0, 1.0)),
    ])
    def test_values(self, name, rounds, expected):
        assert readout_cost(make_cfa(name), rounds) == pytest.approx(expected)

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            readout_cost(make_cfa("quad_bayer"), 2)


class TestTables:
    def test_row_counts(self):
        rows = advantage_table()
        assert sum(e.cfa in SINGLE_BINNABLE for e in rows) == 8
        assert sum(e.cfa in DOUBLE_BINNABLE for e in rows) == 9

    def test_reference_row(self):
        e = entry("quad_bayer", "full resolution")
        assert (e.low_light_db, e.bright_light_db, e.power_pct, e.frame_rate_x) == (0, 0, 100, 1)

    def test_hexadeca_once(self):
        e = entry("hexadeca_bayer", "binned once")
        assert e.low_light_db == pytest.approx(12, abs=0.2) and e.bright_light_db == pytest.approx(6, abs=0.2)
        assert (e.power_pct, e.frame_rate_x) == (25, 4)

    def test_rgbw_binned_once_uses_equalizer(self):
        # 2:1 FD diagonal binning plus a 2:1 digital step to Bayer-binned resolution
        e = entry("rgbw_ia", "binned once")
        assert e.low_light_db == pytest.approx(6 + 20 * math.log10(2) + 10 * math.log10(2))

    def test_every_cell_within_tolerance(self):
        checks = compare_with_published(advantage_table())
        assert len(checks) == 17 * 4
        assert all(c.ok for c in checks)
        annotated = {(c.cfa, c.mode, c.field) for c in checks if c.annotated}
        assert annotated == set(KNOWN_DISCREPANCIES)

    def test_known_discrepancies_really_differ(self):
        assert entry("lms_single", "binned once").frame_rate_x == 2
        assert entry("quad_lms", "binned twice").low_light_db == pytest.approx(22.26, abs=0.01)

    def test_breach_is_detected(self):
        rows = advantage_table(["quad_bayer"])
        fake = {("quad_bayer", "binned once"): (11.0, 6, 25, 4)}
        bad = [c for c in compare_with_published(rows, fake) if not c.ok]
        assert [(c.field, c.published) for c in bad] == [("low_light_db", 11.0)]

    def test_formatting(self):
        rows = advantage_table(["hexadeca_bayer"])
        csv_lines = table_csv(rows).splitlines()
        assert csv_lines[0].startswith("Color Filter Array,Bin Mode")
        assert csv_lines[3] == "Hexadeca Bayer,binned twice,18.0618,12.0412,6.25,16"
        assert table_text(rows, "T").splitlines()[0] == "T"
