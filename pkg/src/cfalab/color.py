"""Pixel buffers, sRGB transfer, color matrices and luminance/chrominance bases.

Every stage of the simulation exchanges :class:`PlanarImage` values.  The
(l, c1, ..., c_{n-1}) bases of the three filter families live here as
:class:`ColorSystem` instances so that the CFA, spectral and demosaicking code
all agree on what "chrominance" means.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field

import numpy as np

log = logging.getLogger(__name__)

PSNR_CAP_DB = 99.0

# IEC 61966-2-1 constants
_SRGB_KNEE_ENCODED = 0.04045
_SRGB_KNEE_LINEAR = 0.0031308


class ColorError(ValueError):
    """Raised for invalid pixel data or degenerate color transforms."""


class RangeError(ColorError):
    pass


class SingularMatrixError(ColorError):
    pass


class Domain(str, enum.Enum):
    ENCODED_SRGB = "encoded-sRGB"
    LINEAR_SCENE = "linear-scene"
    LINEAR_SENSOR = "linear-sensor"


def _check_unit_range(samples: np.ndarray) -> None:
    bad = ~((samples >= 0.0) & (samples <= 1.0))
    if bad.any():
        idx = tuple(int(i) for i in np.argwhere(bad)[0])
        raise RangeError(
            f"encoded sample {samples[idx]!r} at (channel, y, x)={idx} outside [0, 1]"
        )


@dataclass(frozen=True, eq=False)
class PlanarImage:
    """Multi-channel image stored as a (channel, y, x) float32 array.

    Encoded-sRGB images are range checked on construction.  Linear buffers may
    carry negative values (filter ringing, color differences); clipping to the
    physical range happens explicitly in :func:`srgb_encode` or
    :meth:`clipped`.
    """

    samples: np.ndarray
    domain: Domain = Domain.LINEAR_SCENE

    def __post_init__(self):
        s = np.asarray(self.samples)
        if s.ndim == 2:
            s = s[None]
        if s.ndim != 3:
            raise ColorError(f"samples must be (channel, y, x), got shape {s.shape}")
        s = np.ascontiguousarray(s, dtype=np.float32)
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)
        object.__setattr__(self, "domain", Domain(self.domain))
        if self.domain is Domain.ENCODED_SRGB:
            _check_unit_range(s)

    @property
    def channels(self) -> int:
        return self.samples.shape[0]

    @property
    def height(self) -> int:
        return self.samples.shape[1]

    @property
    def width(self) -> int:
        return self.samples.shape[2]

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.samples.shape

    def with_samples(self, samples, domain: Domain | None = None) -> "PlanarImage":
        return PlanarImage(samples, self.domain if domain is None else domain)

    def clipped(self, lo: float = 0.0, hi: float = np.inf) -> tuple["PlanarImage", int]:
        """Return the image clipped to [lo, hi] and the number of samples changed."""
        n = int(np.count_nonzero((self.samples < lo) | (self.samples > hi)))
        return self.with_samples(np.clip(self.samples, lo, hi)), n

    def __eq__(self, other):
        if not isinstance(other, PlanarImage):
            return NotImplemented
        return self.domain is other.domain and np.array_equal(self.samples, other.samples)


def _decode(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    return np.where(v <= _SRGB_KNEE_ENCODED, v / 12.92, ((v + 0.055) / 1.055) ** 2.4)


def _encode(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    return np.where(
        v <= _SRGB_KNEE_LINEAR, 12.92 * v, 1.055 * np.power(v, 1.0 / 2.4) - 0.055
    )


def srgb_decode(img: PlanarImage) -> PlanarImage:
    """Undo the sRGB tone curve: encoded-sRGB -> linear-scene."""
    if img.domain is not Domain.ENCODED_SRGB:
        raise ColorError(f"srgb_decode expects encoded-sRGB input, got {img.domain.value}")
    _check_unit_range(img.samples)
    return PlanarImage(_decode(img.samples), Domain.LINEAR_SCENE)


def srgb_encode(img: PlanarImage, report: bool = False):
    """Apply the sRGB tone curve to a linear image.

    Samples are clipped to [0, 1] first.  With ``report=True`` the number of
    clipped samples is returned alongside the image.
    """
    if img.domain is Domain.ENCODED_SRGB:
        raise ColorError("image is already sRGB encoded")
    s = img.samples
    n_clipped = int(np.count_nonzero((s < 0.0) | (s > 1.0)))
    if n_clipped:
        log.debug("srgb_encode clipped %d samples", n_clipped)
    out = PlanarImage(np.clip(_encode(np.clip(s, 0.0, 1.0)), 0.0, 1.0), Domain.ENCODED_SRGB)
    return (out, n_clipped) if report else out


@dataclass(frozen=True, eq=False)
class ColorMatrix:
    """3x3 linear color transform; the inverse is computed once and cached."""

    entries: np.ndarray

    def __post_init__(self):
        m = np.array(self.entries, dtype=np.float64)
        if m.shape != (3, 3):
            raise ColorError(f"color matrix must be 3x3, got {m.shape}")
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    @property
    def condition(self) -> float:
        return float(np.linalg.cond(self.entries))

    @property
    def inverse(self) -> np.ndarray:
        try:
            return self._inverse
        except AttributeError:
            pass
        if not np.isfinite(self.condition) or self.condition > 1e12:
            raise SingularMatrixError(f"color matrix is singular (cond={self.condition:.3g})")
        inv = np.linalg.inv(self.entries)
        inv.setflags(write=False)
        object.__setattr__(self, "_inverse", inv)
        return inv


#: Typical mobile sensor color correction matrix (sensor RGB -> linear sRGB).
MOBILE_CCM = ColorMatrix(
    [
        [1.81, -0.53, -0.28],
        [-0.30, 1.38, -0.08],
        [-0.13, -0.33, 1.46],
    ]
)


def apply_color_matrix(img: PlanarImage, m: ColorMatrix, inverse: bool = False) -> PlanarImage:
    if img.channels != 3:
        raise ColorError(f"color matrix needs a 3-channel image, got {img.channels}")
    mat = m.inverse if inverse else m.entries
    out = np.einsum("ij,jyx->iyx", mat, img.samples.astype(np.float64))
    return img.with_samples(out)


@dataclass(frozen=True, eq=False)
class ColorSystem:
    """A channel set together with its luminance/chrominance basis.

    ``luminance_weights`` and each row of ``chroma_basis`` are linear forms
    over the channels; stacked they form :attr:`basis_matrix`, which must be
    square and invertible.  ``sensitivity_mix`` maps linear sensor RGB to the
    channel signals (one row per channel).
    """

    name: str
    channel_names: tuple[str, ...]
    luminance_weights: np.ndarray
    chroma_basis: np.ndarray
    sensitivity_mix: np.ndarray
    basis_matrix: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        names = tuple(self.channel_names)
        n = len(names)
        lum = np.asarray(self.luminance_weights, dtype=np.float64)
        chroma = np.atleast_2d(np.asarray(self.chroma_basis, dtype=np.float64))
        mix = np.atleast_2d(np.asarray(self.sensitivity_mix, dtype=np.float64))
        if lum.shape != (n,):
            raise ColorError(f"{self.name}: luminance weights must have {n} entries")
        if chroma.shape != (n - 1, n):
            raise ColorError(f"{self.name}: need {n - 1} chroma vectors of length {n}")
        if mix.shape != (n, 3):
            raise ColorError(f"{self.name}: sensitivity_mix must be {n}x3")
        basis = np.vstack([lum, chroma])
        if np.linalg.cond(basis) > 1e12:
            raise SingularMatrixError(f"{self.name}: (l, chroma) basis is degenerate")
        for a in (lum, chroma, mix, basis):
            a.setflags(write=False)
        object.__setattr__(self, "channel_names", names)
        object.__setattr__(self, "luminance_weights", lum)
        object.__setattr__(self, "chroma_basis", chroma)
        object.__setattr__(self, "sensitivity_mix", mix)
        object.__setattr__(self, "basis_matrix", basis)
        object.__setattr__(self, "_basis_inv", np.linalg.inv(basis))

    @property
    def n_channels(self) -> int:
        return len(self.channel_names)

    @property
    def basis_names(self) -> tuple[str, ...]:
        return ("l",) + tuple(f"c{i}" for i in range(1, self.n_channels))

    def index(self, channel: str) -> int:
        return self.channel_names.index(channel)

    @property
    def basis_inverse(self) -> np.ndarray:
        return self._basis_inv

    def white_balance_gains(self) -> np.ndarray:
        """Per-channel gains that make a neutral scene produce equal channel values."""
        return 1.0 / self.sensitivity_mix.sum(axis=1)

    def __eq__(self, other):
        if not isinstance(other, ColorSystem):
            return NotImplemented
        return (
            self.channel_names == other.channel_names
            and np.array_equal(self.basis_matrix, other.basis_matrix)
            and np.array_equal(self.sensitivity_mix, other.sensitivity_mix)
        )

    def __hash__(self):
        return hash((self.name, self.channel_names))


def channels_to_basis(pixel, cs: ColorSystem) -> np.ndarray:
    """Evaluate (l, c1, ...) for channel vectors; the channel axis is axis 0."""
    v = np.asarray(pixel, dtype=np.float64)
    if v.shape[0] != cs.n_channels:
        raise ColorError(f"expected {cs.n_channels} channels, got {v.shape[0]}")
    return np.tensordot(cs.basis_matrix, v, axes=(1, 0))


def basis_to_channels(coords, cs: ColorSystem) -> np.ndarray:
    v = np.asarray(coords, dtype=np.float64)
    if v.shape[0] != cs.n_channels:
        raise ColorError(f"expected {cs.n_channels} basis coordinates, got {v.shape[0]}")
    return np.tensordot(cs.basis_inverse, v, axes=(1, 0))


def psnr(a, b, peak: float = 1.0, border: int = 0) -> float:
    """Peak signal-to-noise ratio in dB, optionally ignoring a border.

    Identical inputs report :data:`PSNR_CAP_DB` so result tables stay finite.
    """
    x = a.samples if isinstance(a, PlanarImage) else np.asarray(a)
    y = b.samples if isinstance(b, PlanarImage) else np.asarray(b)
    if x.shape != y.shape:
        raise ColorError(f"shape mismatch {x.shape} vs {y.shape}")
    if border:
        x = x[..., border:-border, border:-border]
        y = y[..., border:-border, border:-border]
    if x.size == 0:
        raise ColorError(f"border {border} leaves no pixels to compare")
    mse = np.mean((x.astype(np.float64) - y.astype(np.float64)) ** 2)
    if mse == 0.0:
        return PSNR_CAP_DB
    return float(min(PSNR_CAP_DB, 10.0 * np.log10(peak**2 / mse)))


# Bayer family: l = R+2G+B, c1 = 2G-R-B, c2 = R-B
RGB = ColorSystem(
    name="rgb",
    channel_names=("R", "G", "B"),
    luminance_weights=[1, 2, 1],
    chroma_basis=[[-1, 2, -1], [1, 0, -1]],
    sensitivity_mix=np.eye(3),
)

# RGBW family: l = R+2G+B+4W, c1 = R-2G+B, c2 = R-B, c3 = R+2G+B-4W
RGBW = ColorSystem(
    name="rgbw",
    channel_names=("R", "G", "B", "W"),
    luminance_weights=[1, 2, 1, 4],
    chroma_basis=[[1, -2, 1, 0], [1, 0, -1, 0], [1, 2, 1, -4]],
    sensitivity_mix=np.vstack([np.eye(3), np.full((1, 3), 1.0 / 3.0)]),
)

# LMS family: l = 3L+4M+S, c1 = 6L-8M+2S, c2 = L-S.
# The cone-like responses are stand-in mixes of sensor RGB; see README.
LMS = ColorSystem(
    name="lms",
    channel_names=("L", "M", "S"),
    luminance_weights=[3, 4, 1],
    chroma_basis=[[6, -8, 2], [1, 0, -1]],
    sensitivity_mix=[
        [0.70, 0.65, 0.05],
        [0.15, 0.85, 0.10],
        [0.05, 0.15, 0.90],
    ],
)

COLOR_SYSTEMS = {cs.name: cs for cs in (RGB, RGBW, LMS)}
