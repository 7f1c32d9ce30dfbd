"""Closed-form SNR advantage, power and frame-rate model for binned readout.

Each bin stage contributes a fixed gain: floating-diffusion n:1 binning sums
charge before one read, so in the read-noise limit signal grows n-fold while
noise stays put (20 log10 n); digital n:1 sums n noisy reads (10 log10 n).
In the shot-noise limit every mode gives 10 log10 n.  Patterns whose binned
output holds more values than the 4:1-binned Bayer reference get a trailing
digital "resolution equalizer" so advantages are compared at equal output
resolution.
"""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass

from .cfa import BinMode, CfaSpec, DIGITAL, FD, make_cfa


class Regime(str, enum.Enum):
    READ_LIMITED = "read-limited"
    SHOT_LIMITED = "shot-limited"


MODE_LABELS = ("full resolution", "binned once", "binned twice")


def stage_gain_db(mode, n: int, regime) -> float:
    mode, regime = BinMode(mode), Regime(regime)
    if n < 2:
        raise ValueError("bin fan-in must be >= 2")
    if regime is Regime.READ_LIMITED and mode is FD:
        return 20.0 * math.log10(n)
    return 10.0 * math.log10(n)


@dataclass(frozen=True)
class BinChain:
    stages: tuple  # ((mode, n), ...)
    resolution_equalizer: int | None = None

    def __post_init__(self):
        for _, n in self.stages:
            if n < 2:
                raise ValueError("bin fan-in must be >= 2")

    def gain_db(self, regime) -> float:
        g = sum(stage_gain_db(m, n, regime) for m, n in self.stages)
        if self.resolution_equalizer:
            g += stage_gain_db(DIGITAL, self.resolution_equalizer, regime)
        return g


@dataclass(frozen=True)
class CfaSnrConstants:
    base_low_db: float
    base_bright_db: float


#: Per-family low-light / bright-light advantage at full resolution over the
#: Bayer family; stated constants, not derived from filter responses.
FAMILY_CONSTANTS = {
    "rgb": CfaSnrConstants(0.0, 0.0),
    "rgbw": CfaSnrConstants(6.0, 3.0),
    "lms": CfaSnrConstants(4.2, 2.1),
}

DISPLAY_NAMES = {
    "bayer": "Bayer",
    "quad_bayer": "Quad Bayer",
    "nona_bayer": "Nona Bayer",
    "hexadeca_bayer": "Hexadeca Bayer",
    "rgbw_kodak": "RGBW-Kodak",
    "rgbw_ia": "RGBW-IA",
    "lms_single": "LMS",
    "quad_rgbw": "Quad-RGBW",
    "quad_lms": "Quad-LMS",
}

SINGLE_BINNABLE = ("quad_bayer", "rgbw_kodak", "rgbw_ia", "lms_single")
DOUBLE_BINNABLE = ("hexadeca_bayer", "quad_rgbw", "quad_lms")


@dataclass(frozen=True)
class SnrEntry:
    cfa: str
    mode: str
    low_light_db: float
    bright_light_db: float
    power_pct: float
    frame_rate_x: float
    note: str = ""


def values_read(spec: CfaSpec, rounds: int) -> float:
    """Output values per input pixel after ``rounds`` bin stages."""
    v = 1.0
    for stage in spec.bin_chain[:rounds]:
        v *= stage.n_planes / stage.decimation**2
    return v


def readout_cost(spec: CfaSpec, rounds: int) -> tuple[float, float]:
    """(power %, frame-rate multiplier) relative to full-resolution readout."""
    if not 0 <= rounds <= spec.max_rounds:
        raise ValueError(f"{spec.name} supports 0..{spec.max_rounds} rounds")
    v = values_read(spec, rounds)
    return 100.0 * v, 1.0 / v


def chain_for(spec: CfaSpec, rounds: int) -> BinChain:
    stages = tuple((s.mode, s.fan_in) for s in spec.bin_chain[:rounds])
    reference = 0.25**rounds  # 4:1 binned Bayer output per input pixel
    ratio = values_read(spec, rounds) / reference
    eq = int(round(ratio)) if ratio > 1 + 1e-9 else None
    return BinChain(stages, eq)


def snr_entry(spec: CfaSpec, rounds: int, constants: CfaSnrConstants | None = None) -> SnrEntry:
    c = constants or FAMILY_CONSTANTS[spec.color_system.name]
    chain = chain_for(spec, rounds)
    power, fps = readout_cost(spec, rounds)
    return SnrEntry(
        cfa=spec.name,
        mode=MODE_LABELS[rounds],
        low_light_db=c.base_low_db + chain.gain_db(Regime.READ_LIMITED),
        bright_light_db=c.base_bright_db + chain.gain_db(Regime.SHOT_LIMITED),
        power_pct=power,
        frame_rate_x=fps,
    )


def advantage_table(catalog=SINGLE_BINNABLE + DOUBLE_BINNABLE) -> list[SnrEntry]:
    rows = []
    for name in catalog:
        spec = make_cfa(name) if isinstance(name, str) else name
        for r in range(spec.max_rounds + 1):
            rows.append(snr_entry(spec, r))
    return rows


# (cfa, mode) -> (low dB, bright dB, power %, frame rate x)
PAPER_SINGLE = {
    ("quad_bayer", "full resolution"): (0, 0, 100, 1),
    ("quad_bayer", "binned once"): (12, 6, 25, 4),
    ("rgbw_kodak", "full resolution"): (6, 3, 100, 1),
    ("rgbw_kodak", "binned once"): (15, 9, 50, 2),
    ("rgbw_ia", "full resolution"): (6, 3, 100, 1),
    ("rgbw_ia", "binned once"): (15, 9, 50, 2),
    ("lms_single", "full resolution"): (4.2, 2.1, 100, 1),
    ("lms_single", "binned once"): (13.2, 8.1, 50, 4),
}
PAPER_DOUBLE = {
    ("hexadeca_bayer", "full resolution"): (0, 0, 100, 1),
    ("hexadeca_bayer", "binned once"): (12, 6, 25, 4),
    ("hexadeca_bayer", "binned twice"): (18, 12, 6.25, 16),
    ("quad_rgbw", "full resolution"): (6, 3, 100, 1),
    ("quad_rgbw", "binned once"): (18, 9, 25, 4),
    ("quad_rgbw", "binned twice"): (24, 15, 12.5, 8),
    ("quad_lms", "full resolution"): (4.2, 2.1, 100, 1),
    ("quad_lms", "binned once"): (16.2, 8.1, 25, 4),
    ("quad_lms", "binned twice"): (22.1, 14.1, 12.5, 8),
}

#: Published cells the composition model does not reproduce exactly.
KNOWN_DISCREPANCIES = {
    ("lms_single", "binned once", "frame_rate_x"): (
        "published 4x; two values per 2x2 block give 2x (consistent with the published 50% power)"
    ),
    ("quad_lms", "binned twice", "low_light_db"): (
        "published 22.1 dB; composition gives 4.2 + 12.04 + 6.02 = 22.26 dB"
    ),
}

DB_TOLERANCE = 0.2
FIELDS = ("low_light_db", "bright_light_db", "power_pct", "frame_rate_x")


@dataclass(frozen=True)
class CellCheck:
    cfa: str
    mode: str
    field: str
    model: float
    published: float
    ok: bool
    annotated: bool
    note: str = ""


def compare_with_published(entries, published=None) -> list[CellCheck]:
    """Check every modelled cell against the published summary tables.

    dB cells pass within :data:`DB_TOLERANCE`; power and frame rate must match
    exactly.  Annotated cells are reported with their note; a mismatching
    annotated cell still counts as ``ok`` because the discrepancy is known.
    """
    published = published or {**PAPER_SINGLE, **PAPER_DOUBLE}
    out = []
    for e in entries:
        key = (e.cfa, e.mode)
        if key not in published:
            continue
        for f, ref in zip(FIELDS, published[key]):
            val = getattr(e, f)
            tol = DB_TOLERANCE if f.endswith("_db") else 1e-9
            match = abs(val - ref) <= tol + 1e-12
            note = KNOWN_DISCREPANCIES.get((e.cfa, e.mode, f), "")
            out.append(CellCheck(e.cfa, e.mode, f, val, ref, match or bool(note), bool(note), note))
    return out


HEADER = ("Color Filter Array", "Bin Mode", "Low Light SNR Advantage (dB)",
          "Bright Light SNR Advantage (dB)", "Power Consumption (%)", "Frame Rate (x)")


def _cells(e: SnrEntry) -> list[str]:
    return [
        DISPLAY_NAMES.get(e.cfa, e.cfa),
        e.mode,
        f"{e.low_light_db:.6g}",
        f"{e.bright_light_db:.6g}",
        f"{e.power_pct:.6g}",
        f"{e.frame_rate_x:.6g}",
    ]


def table_csv(entries) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(HEADER)
    for e in entries:
        w.writerow(_cells(e))
    return buf.getvalue()


def table_text(entries, title: str = "") -> str:
    rows = [list(HEADER)] + [_cells(e) for e in entries]
    widths = [max(len(r[i]) for r in rows) for i in range(len(HEADER))]
    lines = [title] if title else []
    for i, r in enumerate(rows):
        lines.append("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip())
        if i == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"
