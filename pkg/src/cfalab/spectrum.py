"""Exact carrier spectra of periodic CFAs and the demosaickability check.

A CFA with a P x Q tile modulates the channel signals onto at most P*Q
carrier frequencies (2*pi*u/Q, 2*pi*v/P).  At each frequency the modulation
is a linear form over the channels; expressed in the (l, c1, ...) basis of
the color system it tells which luminance/chrominance combination sits there.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .cfa import CfaTile

PRUNE_TOL = 1e-12
PI = math.pi


def fold(w: float) -> float:
    """Fold an angular frequency into (-pi, pi]."""
    w = math.fmod(w, 2 * PI)
    if w <= -PI + 1e-12:
        w += 2 * PI
    elif w > PI + 1e-12:
        w -= 2 * PI
    return w


@dataclass(frozen=True, eq=False)
class Carrier:
    freq: tuple[float, float]  # (wx, wy), radians/pixel in (-pi, pi]
    index: tuple[int, int]  # (u, v) DFT bin within the tile
    coeff: np.ndarray  # complex, one entry per channel
    basis_coords: np.ndarray  # complex, (l, c1, ...)
    magnitude: float

    @property
    def is_dc(self) -> bool:
        return self.index == (0, 0)

    @property
    def self_conjugate(self) -> bool:
        return all(abs(abs(w) - PI) < 1e-9 or abs(w) < 1e-9 for w in self.freq)

    def dominant_direction(self) -> int:
        """Index into the (l, c1, ...) basis with the largest coordinate."""
        return int(np.argmax(np.abs(self.basis_coords)))

    def purity(self) -> float:
        """Share of |basis_coords|^2 held by the dominant coordinate."""
        e = np.abs(self.basis_coords) ** 2
        return float(e.max() / e.sum())


@dataclass(frozen=True, eq=False)
class SpectrumReport:
    tile: CfaTile
    carriers: tuple
    n_candidates: int

    @property
    def luminance_carrier(self) -> Carrier:
        return next(c for c in self.carriers if c.is_dc)

    @property
    def chroma_carriers(self) -> tuple:
        return tuple(c for c in self.carriers if not c.is_dc)

    def find(self, wx: float, wy: float, tol: float = 1e-9) -> Carrier | None:
        wx, wy = fold(wx), fold(wy)
        for c in self.carriers:
            if abs(c.freq[0] - wx) < tol and abs(c.freq[1] - wy) < tol:
                return c
        return None

    def coefficient_cube(self) -> np.ndarray:
        """Dense (channel, v, u) coefficient array including pruned zeros."""
        t = self.tile
        out = np.zeros((t.color_system.n_channels, t.period_y, t.period_x), complex)
        for c in self.carriers:
            u, v = c.index
            out[:, v, u] = c.coeff
        return out


def analyze_tile(tile: CfaTile) -> SpectrumReport:
    cs = tile.color_system
    P, Q = tile.period_y, tile.period_x
    ind = np.stack([(tile.grid == c).astype(np.float64) for c in range(cs.n_channels)])
    F = np.fft.fft2(ind) / (P * Q)
    carriers = []
    for v in range(P):
        for u in range(Q):
            a = F[:, v, u]
            if np.abs(a).max() < PRUNE_TOL:
                continue
            beta = np.linalg.solve(cs.basis_matrix.T.astype(complex), a)
            freq = (fold(2 * PI * u / Q), fold(2 * PI * v / P))
            carriers.append(Carrier(freq, (u, v), a, beta, float(np.linalg.norm(beta))))
    carriers.sort(key=lambda c: (round(c.freq[1], 9), round(c.freq[0], 9)))
    return SpectrumReport(tile, tuple(carriers), P * Q)


def reconstruct_indicators(report: SpectrumReport) -> np.ndarray:
    """Inverse DFT of the carrier set: the per-channel indicator functions."""
    t = report.tile
    return np.real(np.fft.ifft2(report.coefficient_cube() * t.period_x * t.period_y))


def wrapped_delta(a, b) -> tuple[float, float]:
    return fold(a[0] - b[0]), fold(a[1] - b[1])


def distance(a, b=(0.0, 0.0), metric: str = "euclidean") -> float:
    dx, dy = wrapped_delta(a, b)
    if metric == "chebyshev":
        return max(abs(dx), abs(dy))
    if metric == "euclidean":
        return math.hypot(dx, dy)
    raise ValueError(f"unknown metric {metric!r}")


def conjugate_key(freq) -> tuple:
    """Identify a carrier and its conjugate with one hashable key."""
    a = (round(freq[0], 9), round(freq[1], 9))
    b = (round(fold(-freq[0]), 9), round(fold(-freq[1]), 9))
    return min(a, b)


@dataclass
class DirectionVerdict:
    direction: str
    best_freq: tuple | None
    distance: float
    share: float
    copies: int  # isolated copies beyond theta_min, conjugate pairs counted once
    passed: bool
    reason: str
    strong_copies: int = 0  # all strong copies, conjugate pairs counted once

    def to_json(self) -> dict:
        return {
            "direction": self.direction,
            "best_freq": None if self.best_freq is None else [round(f, 9) for f in self.best_freq],
            "distance": round(self.distance, 9),
            "share": round(self.share, 9),
            "copies": self.copies,
            "strong_copies": self.strong_copies,
            "verdict": "PASS" if self.passed else "FAIL",
            "reason": self.reason,
        }


@dataclass
class DegeneracyReport:
    directions: list = field(default_factory=list)
    params: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(d.passed for d in self.directions)

    @property
    def failed_directions(self) -> list[str]:
        return [d.direction for d in self.directions if not d.passed]

    def __getitem__(self, name: str) -> DirectionVerdict:
        return next(d for d in self.directions if d.direction == name)

    def to_json(self) -> dict:
        return {
            "verdict": "PASS" if self.passed else "FAIL",
            "directions": [d.to_json() for d in self.directions],
            "params": self.params,
        }


def strong_carriers(report: SpectrumReport, direction: int, rho: float = 0.10) -> list[Carrier]:
    """Non-DC carriers whose |coordinate| in ``direction`` is >= rho x the direction's peak."""
    chroma = report.chroma_carriers
    mags = np.array([abs(c.basis_coords[direction]) for c in chroma])
    if mags.size == 0 or mags.max() < PRUNE_TOL:
        return []
    return [c for c, m in zip(chroma, mags) if m >= rho * mags.max()]


def check_degeneracy(
    report: SpectrumReport,
    theta_min: float = 0.7 * PI,
    rho: float = 0.10,
    sep_min: float = 0.2 * PI,
    theta_single: float = PI,
    min_copies: int = 2,
    metric: str = "euclidean",
) -> DegeneracyReport:
    """Necessary condition for good chrominance recovery, per chroma direction.

    A direction passes when some strong copy of it lies at least ``theta_min``
    from DC and at least ``sep_min`` from every strong carrier of another
    direction, and either that copy reaches ``theta_single`` or there are
    ``min_copies`` such copies (conjugate pairs counted once) for an
    orientation-adaptive demosaicker to choose between.
    """
    if not report.carriers:
        raise ValueError("empty spectrum report")
    cs = report.tile.color_system
    n = cs.n_channels
    strong = {d: strong_carriers(report, d, rho) for d in range(1, n)}
    rep = DegeneracyReport(
        params=dict(
            theta_min=theta_min,
            rho=rho,
            sep_min=sep_min,
            theta_single=theta_single,
            min_copies=min_copies,
            metric=metric,
        )
    )
    for d in range(1, n):
        name = cs.basis_names[d]
        cands = strong[d]
        total = sum(abs(c.basis_coords[d]) for c in report.chroma_carriers)
        if not cands:
            rep.directions.append(DirectionVerdict(name, None, 0.0, 0.0, 0, False, "absent", 0))
            continue
        others = [c for e, cl in strong.items() if e != d for c in cl]

        def isolated(c):
            return all(distance(c.freq, o.freq) >= sep_min for o in others)

        far = [c for c in cands if distance(c.freq, metric=metric) >= theta_min and isolated(c)]
        pool = far or cands
        best = max(pool, key=lambda c: (distance(c.freq, metric=metric), abs(c.basis_coords[d])))
        dist = distance(best.freq, metric=metric)
        copies = len({conjugate_key(c.freq) for c in far})
        if not far:
            passed, reason = False, "no isolated copy beyond theta_min"
        elif dist >= theta_single - 1e-9:
            passed, reason = True, "copy at or beyond theta_single"
        elif copies >= min_copies:
            passed, reason = True, f"{copies} isolated copies"
        else:
            passed, reason = False, "single copy below theta_single"
        share = abs(best.basis_coords[d]) / total
        n_strong = len({conjugate_key(c.freq) for c in cands})
        rep.directions.append(DirectionVerdict(name, best.freq, dist, share, copies, passed, reason, n_strong))
    return rep


def spectrum_rows(report: SpectrumReport) -> list[list[float]]:
    """(wx, wy, |l|, |c1|, ...) per carrier, in the report's frequency order."""
    return [[c.freq[0], c.freq[1], *np.abs(c.basis_coords)] for c in report.carriers]


def export_spectrum_csv(report: SpectrumReport) -> str:
    names = report.tile.color_system.basis_names
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["wx", "wy", *[f"abs_{n}" for n in names]])
    for row in spectrum_rows(report):
        w.writerow([f"{v:.6g}" if abs(v) > 1e-15 else "0" for v in row])
    return buf.getvalue()
