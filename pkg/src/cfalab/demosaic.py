"""Frequency-domain demosaicking by carrier demodulation.

The mosaic of a periodic CFA is a baseband luminance plus chrominance
signals modulated onto the carriers found by :func:`cfalab.spectrum.analyze_tile`.
Each strong, single-direction carrier gets a demodulator (complex shift to
baseband followed by a separable low-pass).  Copies of the same chrominance
direction are blended per pixel with weights that favor the copy showing the
least excess local energy, i.e. the least luminance crosstalk.  Luminance is
what remains after the selected chrominance is remodulated onto every carrier
and subtracted from the mosaic.

Each low-pass is a windowed sinc convolved with a short box matched to the tile
period along that axis.  The box puts exact zeros on every other carrier of
the lattice, so flat color fields demodulate without beat patterns no matter
how closely the carriers are packed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .cfa import CfaTile
from .color import RGB, ColorSystem, Domain, PlanarImage, basis_to_channels
from .spectrum import SpectrumReport, analyze_tile, conjugate_key, strong_carriers

PI = math.pi


class DemosaicError(ValueError):
    pass


@dataclass(frozen=True)
class FilterBankConfig:
    lum_radius: float = 0.5 * PI
    chroma_radius: float = 0.25 * PI
    taps: int = 15
    window: str = "hann"
    adapt_window: int = 9
    rho: float = 0.10
    purity_min: float = 0.99
    lattice_null: bool = True

    def __post_init__(self):
        if self.taps % 2 == 0 or self.taps < 3:
            raise ValueError("taps must be odd and >= 3")
        if self.window not in ("hann", "hamming"):
            raise ValueError("window must be 'hann' or 'hamming'")
        if not 0 < self.chroma_radius < PI or not 0 < self.lum_radius <= PI:
            raise ValueError("filter radii must lie in (0, pi)")
        if self.adapt_window < 1:
            raise ValueError("adapt_window must be >= 1")

    @property
    def border(self) -> int:
        """Border excluded from quality metrics."""
        return 2 * self.taps


def _window(n: int, kind: str) -> np.ndarray:
    # endpoints kept nonzero: the window spans n + 2 points and drops both ends
    t = np.arange(1, n + 1) / (n + 1)
    if kind == "hann":
        return 0.5 - 0.5 * np.cos(2 * PI * t)
    return 0.54 - 0.46 * np.cos(2 * PI * t)


def lattice_box(period: int) -> np.ndarray:
    """Symmetric averaging kernel with zeros at every multiple of 2*pi/period."""
    if period <= 1:
        return np.ones(1)
    if period % 2:
        return np.full(period, 1.0 / period)
    k = np.ones(period + 1)
    k[0] = k[-1] = 0.5
    return k / period


def lowpass_1d(cutoff: float, taps: int, window: str = "hann", period: int = 1) -> np.ndarray:
    n = np.arange(taps) - (taps - 1) / 2
    h = (cutoff / PI) * np.sinc(cutoff * n / PI) * _window(taps, window)
    if period > 1:
        h = np.convolve(h, lattice_box(period))
    return h / h.sum()


def frequency_response(kernel: np.ndarray, w) -> np.ndarray:
    """DTFT of a centered odd-length kernel at angular frequency ``w``."""
    n = np.arange(kernel.size) - (kernel.size - 1) / 2
    w = np.atleast_1d(np.asarray(w, dtype=np.float64))
    return np.real(np.exp(-1j * np.outer(w, n)) @ kernel)


@dataclass(frozen=True, eq=False)
class PlannedCarrier:
    freq: tuple
    direction: int  # index into (l, c1, ...)
    coeff: complex  # basis coordinate of ``direction`` at this carrier
    self_conjugate: bool
    kernel_x: np.ndarray
    kernel_y: np.ndarray

    def response(self, dw) -> float:
        """Separable frequency response at offset ``dw`` from the carrier."""
        return float(frequency_response(self.kernel_x, dw[0])[0] * frequency_response(self.kernel_y, dw[1])[0])

    @property
    def group(self) -> int:
        return self.direction


@dataclass(frozen=True, eq=False)
class RemodTerm:
    freq: tuple
    basis_coords: np.ndarray
    self_conjugate: bool


@dataclass(frozen=True, eq=False)
class DemosaicPlan:
    spectrum: SpectrumReport
    carriers: tuple
    remod_terms: tuple
    lum_kernel: tuple
    config: FilterBankConfig

    @property
    def color_system(self) -> ColorSystem:
        return self.spectrum.tile.color_system

    @property
    def copy_groups(self) -> dict[int, tuple[int, ...]]:
        groups: dict[int, list[int]] = {}
        for i, c in enumerate(self.carriers):
            groups.setdefault(c.direction, []).append(i)
        return {d: tuple(v) for d, v in sorted(groups.items())}

    @property
    def dc_luminance(self) -> float:
        return float(np.real(self.spectrum.luminance_carrier.basis_coords[0]))

    def to_json(self) -> dict:
        names = self.color_system.basis_names
        return {
            "tile": self.spectrum.tile.names,
            "config": {k: getattr(self.config, k) for k in self.config.__dataclass_fields__},
            "carriers": [
                {
                    "freq": [round(f, 9) for f in c.freq],
                    "direction": names[c.direction],
                    "copy_group": names[c.group],
                    "coeff": [round(c.coeff.real, 12), round(c.coeff.imag, 12)],
                    "taps": [int(c.kernel_x.size), int(c.kernel_y.size)],
                }
                for c in self.carriers
            ],
            "remodulated": [[round(f, 9) for f in t.freq] for t in self.remod_terms],
        }


def _half_plane(carriers) -> list:
    seen, out = set(), []
    for c in carriers:
        key = conjugate_key(c.freq)
        if key in seen:
            continue
        seen.add(key)
        out.append(c)
    return out


def build_plan(report: SpectrumReport, cfg: FilterBankConfig = FilterBankConfig()) -> DemosaicPlan:
    if not report.carriers:
        raise DemosaicError("empty spectrum")
    tile = report.tile
    n = tile.color_system.n_channels
    kx = lowpass_1d(cfg.chroma_radius, cfg.taps, cfg.window, tile.period_x if cfg.lattice_null else 1)
    ky = lowpass_1d(cfg.chroma_radius, cfg.taps, cfg.window, tile.period_y if cfg.lattice_null else 1)
    planned = []
    for d in range(1, n):
        strong = [c for c in strong_carriers(report, d, cfg.rho)
                  if c.dominant_direction() == d and c.purity() >= cfg.purity_min]
        if not strong:
            raise DemosaicError(f"no usable carrier for {tile.color_system.basis_names[d]}")
        for c in _half_plane(strong):
            planned.append(PlannedCarrier(c.freq, d, complex(c.basis_coords[d]), c.self_conjugate, kx, ky))
    remod = tuple(
        RemodTerm(c.freq, c.basis_coords, c.self_conjugate) for c in _half_plane(report.chroma_carriers)
    )
    lx = lowpass_1d(cfg.lum_radius, cfg.taps, cfg.window, tile.period_x if cfg.lattice_null else 1)
    ly = lowpass_1d(cfg.lum_radius, cfg.taps, cfg.window, tile.period_y if cfg.lattice_null else 1)
    return DemosaicPlan(report, tuple(planned), remod, (lx, ly), cfg)


def plan_for(tile: CfaTile, cfg: FilterBankConfig = FilterBankConfig()) -> DemosaicPlan:
    return build_plan(analyze_tile(tile), cfg)


def _phase(shape, freq) -> np.ndarray:
    h, w = shape
    y = np.arange(h)[:, None]
    x = np.arange(w)[None, :]
    return np.exp(1j * (freq[0] * x + freq[1] * y))


def _sep_filter(a: np.ndarray, kx: np.ndarray, ky: np.ndarray) -> np.ndarray:
    if np.iscomplexobj(a):
        return _sep_filter(a.real, kx, ky) + 1j * _sep_filter(a.imag, kx, ky)
    out = ndimage.convolve1d(a, kx, axis=1, mode="mirror")
    return ndimage.convolve1d(out, ky, axis=0, mode="mirror")


def _plane(m) -> np.ndarray:
    if isinstance(m, PlanarImage):
        if m.channels != 1:
            raise DemosaicError("mosaic must be single-channel")
        return m.samples[0].astype(np.float64)
    return np.asarray(m, dtype=np.float64)


@dataclass
class CarrierEstimates:
    """Demodulator outputs for one mosaic.

    ``baseband[i]`` is the complex low-passed demodulation at carrier i,
    ``estimates[i]`` the same expressed in units of the carrier's chroma
    direction, ``energy[i]`` its local energy in those units.
    """

    baseband: list
    estimates: list
    energy: list
    luminance_lowpass: np.ndarray
    scale: float
    luminance: np.ndarray | None = None


def demodulate(mosaic, plan: DemosaicPlan) -> CarrierEstimates:
    m = _plane(mosaic)
    cfg = plan.config
    if min(m.shape) < max(max(c.kernel_x.size, c.kernel_y.size) for c in plan.carriers):
        raise DemosaicError(f"mosaic {m.shape} smaller than the demodulation kernels")
    base, est, energy = [], [], []
    for c in plan.carriers:
        z = _sep_filter(m * np.conj(_phase(m.shape, c.freq)), c.kernel_x, c.kernel_y)
        u = z / c.coeff
        base.append(z)
        est.append(u.real)
        energy.append(ndimage.uniform_filter(np.abs(u) ** 2, cfg.adapt_window, mode="mirror"))
    lum_lp = _sep_filter(m, *plan.lum_kernel) / plan.dc_luminance
    return CarrierEstimates(base, est, energy, lum_lp, float(np.mean(m * m)))


def select_chroma_copies(est: CarrierEstimates, plan: DemosaicPlan, cfg: FilterBankConfig | None = None,
                         return_weights: bool = False):
    """Blend the copies of each chroma direction into one plane.

    Crosstalk of copy k is its local energy in excess of the direction's
    per-pixel median; weights are inversely proportional to crosstalk plus a
    scale-relative floor, then normalized.  Single-copy directions pass through.
    """
    n = plan.color_system.n_channels
    shape = est.estimates[0].shape
    planes, weights = [], {}
    floor_abs = 1e-9 * est.scale + 1e-300
    for d in range(1, n):
        idx = plan.copy_groups.get(d, ())
        if not idx:
            raise DemosaicError(f"no copy for direction {d}")
        if len(idx) == 1:
            w = np.ones((1,) + shape)
        else:
            e = np.stack([est.energy[i] for i in idx])
            med = np.median(e, axis=0)
            cross = np.maximum(e - med, 0.0)
            w = 1.0 / (cross + 0.01 * med + floor_abs)
            w /= w.sum(axis=0)
        weights[d] = w
        planes.append(np.einsum("kyx,kyx->yx", w, np.stack([est.estimates[i] for i in idx])))
    return (planes, weights) if return_weights else planes


def remodulate(chroma: list, plan: DemosaicPlan) -> np.ndarray:
    """Mosaic-domain chrominance implied by the chroma planes at every carrier."""
    shape = chroma[0].shape
    total = np.zeros(shape)
    stack = np.stack(chroma)
    for t in plan.remod_terms:
        amp = np.tensordot(t.basis_coords[1:], stack, axes=(0, 0))
        term = amp * _phase(shape, t.freq)
        total += term.real if t.self_conjugate else 2.0 * term.real
    return total


def luminance_from(mosaic, chroma: list, plan: DemosaicPlan) -> np.ndarray:
    return (_plane(mosaic) - remodulate(chroma, plan)) / plan.dc_luminance


def reconstruct_channels(lum: np.ndarray, chroma: list, cs: ColorSystem) -> PlanarImage:
    if len(chroma) != cs.n_channels - 1:
        raise DemosaicError(f"{cs.name} needs {cs.n_channels - 1} chroma planes, got {len(chroma)}")
    coords = np.stack([lum, *chroma])
    return PlanarImage(basis_to_channels(coords, cs), Domain.LINEAR_SENSOR)


def demosaic_mosaic(mosaic, tile: CfaTile, cfg: FilterBankConfig = FilterBankConfig(),
                    plan: DemosaicPlan | None = None) -> PlanarImage:
    """Demosaic one single-plane mosaic laid out with ``tile``."""
    plan = plan or plan_for(tile, cfg)
    m = _plane(mosaic)
    est = demodulate(m, plan)
    chroma = select_chroma_copies(est, plan, cfg)
    lum = luminance_from(m, chroma, plan)
    return reconstruct_channels(lum, chroma, tile.color_system)


def difference_tile(color_tile: CfaTile) -> CfaTile:
    """RGB tile for the (color - W) difference of a binned RGBW color plane."""
    cs = color_tile.color_system
    names = [[cs.channel_names[i] for i in row] for row in color_tile.grid]
    return CfaTile.from_names(names, RGB)


def demosaic_binned_with_w(color_mosaic, w_plane, color_tile: CfaTile,
                           cfg: FilterBankConfig = FilterBankConfig()) -> PlanarImage:
    """Demosaic a binned RGBW frame: color mosaic and co-sited W plane.

    The (mosaic - W) difference is demosaicked as an RGB mosaic and W is added
    back to each channel.  Output channels are (R, G, B, W).
    """
    c = _plane(color_mosaic)
    w = _plane(w_plane)
    if c.shape != w.shape:
        raise DemosaicError(f"color plane {c.shape} and W plane {w.shape} differ")
    diff = demosaic_mosaic(c - w, difference_tile(color_tile), cfg).samples.astype(np.float64)
    return PlanarImage(np.concatenate([diff + w[None], w[None]]), Domain.LINEAR_SENSOR)


@dataclass(frozen=True, eq=False)
class JointPlan:
    """Per-plane demodulators for several co-sited mosaics of one color system."""

    cs: ColorSystem
    terms: tuple  # per plane: tuple of (freq, coeff vector, self_conjugate)
    rows: np.ndarray  # stacked real measurement forms
    solve: np.ndarray  # least-squares inverse of ``rows``
    detail: np.ndarray  # maps per-plane residuals to channels
    kernels: tuple


def build_joint_plan(tiles, cfg: FilterBankConfig = FilterBankConfig()) -> JointPlan:
    cs = tiles[0].color_system
    terms, rows, kernels = [], [], []
    for t in tiles:
        rep = analyze_tile(t)
        plane_terms = []
        for c in _half_plane(rep.carriers):
            plane_terms.append((c.freq, c.coeff, c.self_conjugate or c.is_dc))
            rows.append(c.coeff.real)
            if not (c.self_conjugate or c.is_dc):
                rows.append(c.coeff.imag)
        terms.append(tuple(plane_terms))
        kernels.append((lowpass_1d(cfg.chroma_radius, cfg.taps, cfg.window, t.period_x),
                        lowpass_1d(cfg.chroma_radius, cfg.taps, cfg.window, t.period_y)))
    A = np.array(rows)
    if np.linalg.matrix_rank(A) < cs.n_channels:
        raise DemosaicError("planes do not determine every channel")
    # high-frequency detail goes along the direction with the least chrominance
    A0 = np.array([analyze_tile(t).luminance_carrier.coeff.real for t in tiles])
    Q = cs.chroma_basis.T @ cs.chroma_basis + 1e-6 * np.eye(cs.n_channels)
    Qi = np.linalg.inv(Q)
    detail = Qi @ A0.T @ np.linalg.pinv(A0 @ Qi @ A0.T)
    return JointPlan(cs, tuple(terms), A, np.linalg.pinv(A), detail, tuple(kernels))


def demosaic_planes(planes, tiles, cfg: FilterBankConfig = FilterBankConfig()) -> PlanarImage:
    """Jointly demosaic co-sited planes (e.g. the two diagonal planes of binned LMS).

    Every carrier of every plane yields a low-passed linear measurement of the
    channels; a per-pixel least-squares fit gives the low-pass channels and the
    residual of each plane adds back full-resolution detail.
    """
    jp = build_joint_plan(tiles, cfg)
    ms = [_plane(p) for p in planes]
    shape = ms[0].shape
    if any(m.shape != shape for m in ms):
        raise DemosaicError("planes must share dimensions")
    meas = []
    for m, terms, (kx, ky) in zip(ms, jp.terms, jp.kernels):
        for freq, _, real_only in terms:
            z = _sep_filter(m * np.conj(_phase(shape, freq)), kx, ky)
            meas.append(z.real)
            if not real_only:
                meas.append(z.imag)
    s_low = np.tensordot(jp.solve, np.stack(meas), axes=(1, 0))
    resid = []
    for m, terms in zip(ms, jp.terms):
        model = np.zeros(shape)
        for freq, coeff, real_only in terms:
            term = np.tensordot(coeff, s_low, axes=(0, 0)) * _phase(shape, freq)
            model += term.real if real_only else 2.0 * term.real
        resid.append(m - model)
    s = s_low + np.tensordot(jp.detail, np.stack(resid), axes=(1, 0))
    return PlanarImage(s, Domain.LINEAR_SENSOR)


def demosaic(frame, cfg: FilterBankConfig = FilterBankConfig()) -> PlanarImage:
    """Demosaic a :class:`~cfalab.sensor.RawFrame` in any bin mode.

    Values are taken in scene-signal units (binned sums are not rescaled).
    Single-plane frames go through :func:`demosaic_mosaic`; binned RGBW frames
    through :func:`demosaic_binned_with_w`; other two-plane frames through
    :func:`demosaic_planes`.
    """
    tiles = frame.tiles
    planes = [frame.signal(i) for i in range(len(frame.planes))]
    if len(tiles) == 1:
        return demosaic_mosaic(planes[0], tiles[0], cfg)
    cs = tiles[0].color_system
    if "W" in cs.channel_names:
        w_idx = cs.index("W")
        for i, t in enumerate(tiles):
            if t.is_uniform() and t.channels_present() == {w_idx}:
                j = 1 - i
                return demosaic_binned_with_w(planes[j], planes[i], tiles[j], cfg)
    return demosaic_planes(planes, tiles, cfg)
