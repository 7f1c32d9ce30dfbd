"""Forward model from linear scene to raw frames.

Optics is a sampled Airy PSF.  Exposure turns channel signals into electrons
with shot noise; binning stages in floating-diffusion mode add charge before
the single read, digital stages sum values that were each read (and each
picked up read noise) separately.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy import ndimage, special

from .cfa import CfaError, CfaSpec, FD, bin_samples, mosaic_apply, tile_after_binning
from .color import Domain, PlanarImage
from .imageio import read_image_codes, write_codes

AIRY_FIRST_ZERO = 3.8317059702075125  # first positive root of J1
POISSON_LIMIT = 1000.0
ROW_BLOCK = 64


@dataclass(frozen=True)
class OpticsConfig:
    airy_diameter: float = 2.0  # pixels, diameter of the first dark ring
    kernel_truncation: float = 3.0  # kernel radius in units of the first-zero radius
    supersample: int = 8  # sub-samples per pixel axis; 1 = point sampling at pixel centers

    def __post_init__(self):
        if not self.airy_diameter > 0:
            raise ValueError("airy_diameter must be positive")
        if not self.kernel_truncation > 0:
            raise ValueError("kernel_truncation must be positive")
        if self.supersample < 1:
            raise ValueError("supersample must be >= 1")


def airy_intensity(r, cfg: OpticsConfig = OpticsConfig()) -> np.ndarray:
    """Unnormalized Airy pattern (2 J1(z)/z)^2 with its first zero at airy_diameter/2."""
    z = AIRY_FIRST_ZERO * np.asarray(r, dtype=np.float64) / (cfg.airy_diameter / 2.0)
    out = np.ones_like(z)
    nz = z != 0
    out[nz] = (2.0 * special.j1(z[nz]) / z[nz]) ** 2
    return out


def airy_kernel(cfg: OpticsConfig = OpticsConfig()) -> np.ndarray:
    """Airy intensity averaged over each pixel's area, truncated and unit-sum.

    With a 2 px Airy diameter the first zero falls exactly on the neighboring
    pixel centers, so point sampling (``supersample=1``) degenerates to an
    almost-delta kernel; averaging over the pixel aperture models what the
    pixel actually integrates.
    """
    radius = cfg.kernel_truncation * cfg.airy_diameter / 2.0
    half = int(math.floor(radius + 1e-9))
    ss = cfg.supersample
    off = (np.arange(ss) + 0.5) / ss - 0.5 if ss > 1 else np.zeros(1)
    yy, xx = np.mgrid[-half : half + 1, -half : half + 1].astype(np.float64)
    sy = yy[:, :, None, None] + off[None, None, :, None]
    sx = xx[:, :, None, None] + off[None, None, None, :]
    r = np.hypot(sx, sy)
    k = np.where(r <= radius + 1e-9, airy_intensity(r, cfg), 0.0).mean(axis=(2, 3))
    return k / k.sum()


def convolve_psf(img: PlanarImage, kernel: np.ndarray) -> PlanarImage:
    """Per-channel 2D convolution with mirror (edge not repeated) boundaries."""
    kernel = np.asarray(kernel, dtype=np.float64)
    if kernel.shape[0] > img.height or kernel.shape[1] > img.width:
        raise ValueError(f"kernel {kernel.shape} larger than image {img.height}x{img.width}")
    s = img.samples.astype(np.float64)
    out = np.stack([ndimage.convolve(ch, kernel, mode="mirror") for ch in s])
    return img.with_samples(out)


@dataclass(frozen=True)
class SensorConfig:
    full_well: float = 6000.0  # electrons
    read_noise: float = 2.0  # electrons RMS per read
    conversion_gain: float = 6.5  # electrons per DN
    pedestal: float = 64.0  # DN
    bit_depth: int = 10
    exposure_scale: float = 600.0  # electrons per unit channel signal; a 9:1 FD sum still fits the ADC
    shot_noise: bool = True
    quantize: bool = True

    def __post_init__(self):
        for name in ("full_well", "conversion_gain", "exposure_scale"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.read_noise < 0 or self.pedestal < 0 or self.bit_depth < 1:
            raise ValueError("read_noise, pedestal and bit_depth must be non-negative")
        if self.quantize and self.pedestal + self.full_well / self.conversion_gain > self.max_code:
            raise ValueError("pedestal + full_well / conversion_gain exceeds the ADC range")

    @property
    def max_code(self) -> int:
        return (1 << self.bit_depth) - 1

    @classmethod
    def noiseless(cls) -> "SensorConfig":
        """Unit-gain, noise-free, unquantized readout (raw = binned scene signal)."""
        return cls(
            full_well=np.inf,
            read_noise=0.0,
            conversion_gain=1.0,
            pedestal=0.0,
            bit_depth=32,
            exposure_scale=1.0,
            shot_noise=False,
            quantize=False,
        )

    def to_json(self) -> dict:
        d = asdict(self)
        d["full_well"] = None if math.isinf(self.full_well) else self.full_well
        return d

    @classmethod
    def from_json(cls, d: dict) -> "SensorConfig":
        d = dict(d)
        if d.get("full_well") is None:
            d["full_well"] = np.inf
        return cls(**d)


@dataclass(frozen=True, eq=False)
class RawFrame:
    planes: tuple  # PlanarImage per output plane, values in DN
    cfa: CfaSpec
    rounds: int
    sensor: SensorConfig
    seed: int | None
    stats: dict = field(default_factory=dict)

    @property
    def tiles(self):
        return tile_after_binning(self.cfa, self.rounds)

    def electrons(self, plane: int = 0) -> np.ndarray:
        """Black-level corrected values converted back to electrons."""
        s = self.sensor
        return (self.planes[plane].samples[0].astype(np.float64) - s.pedestal) * s.conversion_gain

    def signal(self, plane: int = 0) -> np.ndarray:
        """Values in scene-signal units (electrons / exposure_scale)."""
        return self.electrons(plane) / self.sensor.exposure_scale

    def sidecar(self) -> dict:
        doc = self.cfa.to_json()
        doc.update(rounds=self.rounds, sensor=self.sensor.to_json(), seed=self.seed)
        return doc

    def save(self, prefix) -> list[Path]:
        """Write each plane as a 16-bit PGM plus one JSON sidecar."""
        prefix = Path(prefix)
        paths = []
        for i, p in enumerate(self.planes):
            codes = np.round(p.samples).astype(np.int64)
            if codes.min() < 0 or codes.max() > 65535:
                raise ValueError("raw values do not fit a 16-bit container")
            paths.append(write_codes(prefix.with_name(f"{prefix.name}_p{i}.pgm"), codes, 16))
        side = prefix.with_name(prefix.name + ".json")
        side.write_text(json.dumps(self.sidecar(), indent=1, sort_keys=True))
        return paths + [side]

    @classmethod
    def load(cls, prefix) -> "RawFrame":
        prefix = Path(prefix)
        doc = json.loads(prefix.with_name(prefix.name + ".json").read_text())
        spec = CfaSpec.from_json(doc)
        n = len(tile_after_binning(spec, doc["rounds"]))
        planes = tuple(
            PlanarImage(
                read_image_codes(prefix.with_name(f"{prefix.name}_p{i}.pgm"))[0].astype(float),
                Domain.LINEAR_SENSOR,
            )
            for i in range(n)
        )
        return cls(planes, spec, doc["rounds"], SensorConfig.from_json(doc["sensor"]), doc["seed"])


def _block_rng(seed: int, stream: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, stream, block])))


def _map_blocks(fn, n_rows: int, threads: int):
    blocks = range(-(-n_rows // ROW_BLOCK))
    if threads <= 1:
        return [fn(b) for b in blocks]
    with ThreadPoolExecutor(threads) as pool:
        return list(pool.map(fn, blocks))


def _default_threads() -> int:
    env = os.environ.get("CFALAB_THREADS")
    return max(1, int(env)) if env else 1


def _shot(mean_e: np.ndarray, seed: int, threads: int) -> np.ndarray:
    def block(b):
        sl = mean_e[b * ROW_BLOCK : (b + 1) * ROW_BLOCK]
        rng = _block_rng(seed, 0, b)
        small = sl < POISSON_LIMIT
        pois = rng.poisson(np.where(small, sl, 0.0)).astype(np.float64)
        gauss = np.maximum(np.round(rng.normal(sl, np.sqrt(sl))), 0.0)
        return np.where(small, pois, gauss)

    return np.vstack(_map_blocks(block, mean_e.shape[0], threads))


def _read(charge: np.ndarray, sensor: SensorConfig, seed: int, stream: int, threads: int):
    """One read event per value: add read noise, convert to DN (pedestal excluded)."""

    def block(b):
        sl = charge[b * ROW_BLOCK : (b + 1) * ROW_BLOCK]
        if sensor.read_noise > 0:
            sl = sl + _block_rng(seed, stream, b).normal(0.0, sensor.read_noise, sl.shape)
        dn = sl / sensor.conversion_gain
        if sensor.quantize:
            dn = np.clip(np.round(dn), -sensor.pedestal, sensor.max_code - sensor.pedestal)
        return dn

    return np.vstack(_map_blocks(block, charge.shape[0], threads))


def expose_and_read(
    scene: PlanarImage,
    spec: CfaSpec,
    rounds: int = 0,
    sensor: SensorConfig = SensorConfig(),
    seed: int | None = 0,
    threads: int | None = None,
) -> RawFrame:
    """Simulate exposure and readout of ``scene`` through ``spec`` binned ``rounds`` times.

    Output planes hold DN values (float32).  Identical arguments give
    bit-identical frames regardless of ``threads``.
    """
    if not 0 <= rounds <= spec.max_rounds:
        raise CfaError(f"{spec.name} supports 0..{spec.max_rounds} bin rounds, got {rounds}")
    if scene.channels != spec.color_system.n_channels:
        raise CfaError(f"scene has {scene.channels} channels, {spec.name} needs "
                       f"{spec.color_system.n_channels}")
    stochastic = sensor.shot_noise or sensor.read_noise > 0
    if stochastic and seed is None:
        raise ValueError("a seed is required when noise is enabled")
    threads = threads or _default_threads()
    seed = 0 if seed is None else int(seed)

    signal = mosaic_apply(scene, spec.tile).samples[0].astype(np.float64)
    mean_e = np.clip(signal * sensor.exposure_scale, 0.0, sensor.full_well)
    stats = {"saturated_pixels": int(np.count_nonzero(signal * sensor.exposure_scale >= sensor.full_well))}
    charge = _shot(mean_e, seed, threads) if sensor.shot_noise else mean_e

    stages = spec.bin_chain[:rounds]
    n_fd = 0
    while n_fd < len(stages) and stages[n_fd].mode is FD:
        n_fd += 1
    if any(s.mode is FD for s in stages[n_fd:]):
        raise CfaError("floating-diffusion binning cannot follow a digital stage")

    planes = [charge]
    for stage in stages[:n_fd]:
        cap = stage.fan_in * sensor.full_well
        planes = [np.minimum(p, cap) for p in bin_samples(planes[0], stage)]

    values = [_read(p, sensor, seed, 1 + i, threads) for i, p in enumerate(planes)]
    if sensor.quantize:
        lo, hi = -sensor.pedestal, sensor.max_code - sensor.pedestal
        stats["adc_clipped"] = int(sum(np.count_nonzero((v <= lo) | (v >= hi)) for v in values))
    for stage in stages[n_fd:]:
        if len(values) != 1:
            raise CfaError("cannot bin a multi-plane frame further")
        values = bin_samples(values[0], stage)

    out = tuple(PlanarImage(v + sensor.pedestal, Domain.LINEAR_SENSOR) for v in values)
    return RawFrame(out, spec, rounds, sensor, seed if stochastic else None, stats)
