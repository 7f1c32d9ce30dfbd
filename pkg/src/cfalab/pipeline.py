"""End-to-end simulation: scene -> optics -> sensor -> demosaic -> display.

For each (input, CFA, bin mode) case the linearized input is blurred by the
lens PSF; that blurred image is the quality reference.  It is taken to the
sensor color space by the inverse color-correction matrix, mixed into the
CFA's channel responses (white balanced so neutral stays neutral), mosaicked,
binned and read.  The raw frame is then demosaicked, cleaned up, mapped back
to display RGB and compared with the reference by PSNR.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .cfa import CATALOG, make_cfa, total_decimation, total_fan_in
from .charts import CHART_KINDS, generate_chart
from .color import (
    MOBILE_CCM,
    ColorMatrix,
    Domain,
    PlanarImage,
    apply_color_matrix,
    psnr,
    srgb_decode,
    srgb_encode,
)
from .demosaic import FilterBankConfig, demosaic
from .imageio import read_image, write_image
from .postprocess import PostprocessConfig, postprocess
from .sensor import OpticsConfig, RawFrame, SensorConfig, airy_kernel, convolve_psf, expose_and_read
from .snr import DISPLAY_NAMES

MODES = {"full": 0, "bin1": 1, "bin2": 2}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    cfas: tuple = ("quad_bayer",)
    inputs: tuple = ("czp",)  # chart kinds or image paths
    modes: tuple = ("full",)
    chart_size: int = 512
    noise: bool = False
    sensor: SensorConfig = SensorConfig()
    optics: OpticsConfig = OpticsConfig()
    filters: FilterBankConfig = FilterBankConfig()
    post: PostprocessConfig = PostprocessConfig()
    ccm: ColorMatrix = MOBILE_CCM
    out_dir: str | None = None
    seed: int | None = None
    threads: int | None = None
    write_images: bool = True

    def validate(self) -> "ExperimentConfig":
        unknown = [c for c in self.cfas if c not in CATALOG]
        if unknown:
            raise ConfigError(f"unknown CFA(s): {', '.join(unknown)}; catalog: {', '.join(CATALOG)}")
        bad = [m for m in self.modes if m not in MODES]
        if bad:
            raise ConfigError(f"unknown mode(s): {', '.join(bad)}; choose from {', '.join(MODES)}")
        for c in self.cfas:
            spec = make_cfa(c)
            for m in self.modes:
                if MODES[m] > spec.max_rounds:
                    raise ConfigError(f"{c} supports at most {spec.max_rounds} bin round(s); mode {m} invalid")
        for i in self.inputs:
            if i not in CHART_KINDS and not Path(i).exists():
                raise ConfigError(f"input {i!r} is neither a chart kind nor an existing file")
        if self.noise and self.seed is None:
            raise ConfigError("a seed is mandatory when noise is on")
        return self

    def to_json(self) -> dict:
        return {
            "cfas": list(self.cfas),
            "inputs": list(self.inputs),
            "modes": list(self.modes),
            "chart_size": self.chart_size,
            "noise": self.noise,
            "sensor": self.sensor.to_json() if self.noise else None,
            "optics": asdict(self.optics),
            "filters": asdict(self.filters),
            "post": asdict(self.post),
            "ccm": self.ccm.entries.tolist(),
            "seed": self.seed,
        }


def case_seed(master: int, case_id: str) -> int:
    """Per-case seed derived from the master seed, independent of scheduling."""
    h = hashlib.sha256(f"{master}:{case_id}".encode()).digest()
    return int.from_bytes(h[:8], "little") >> 1


def load_input(name: str, size: int = 512) -> PlanarImage:
    """Chart kind or image path, returned in the linear-scene domain."""
    img = generate_chart(name, size) if name in CHART_KINDS else read_image(name)
    if img.channels == 1:
        img = img.with_samples(np.repeat(img.samples, 3, axis=0))
    if img.channels != 3:
        raise ConfigError(f"{name}: expected an RGB or grayscale image")
    if img.domain is Domain.ENCODED_SRGB:
        return srgb_decode(img)
    return img


def box_downsample(a: np.ndarray, k: int) -> np.ndarray:
    if k == 1:
        return a
    c, h, w = a.shape
    return a[:, : h - h % k, : w - w % k].reshape(c, h // k, k, w // k, k).mean(axis=(2, 4))


def scene_to_channels(scene: PlanarImage, cs, ccm: ColorMatrix = MOBILE_CCM) -> tuple[PlanarImage, int]:
    """Linear scene RGB -> white-balanced CFA channel signals (clip count returned)."""
    cam = apply_color_matrix(scene, ccm, inverse=True).samples.astype(np.float64)
    n_neg = int(np.count_nonzero(cam < 0))
    cam = np.maximum(cam, 0.0)
    ch = np.tensordot(cs.sensitivity_mix, cam, axes=(1, 0)) * cs.white_balance_gains()[:, None, None]
    return PlanarImage(ch, Domain.LINEAR_SENSOR), n_neg


def channels_to_scene(img: PlanarImage, cs, ccm: ColorMatrix = MOBILE_CCM) -> PlanarImage:
    ch = img.samples.astype(np.float64) / cs.white_balance_gains()[:, None, None]
    cam = np.tensordot(np.linalg.pinv(cs.sensitivity_mix), ch, axes=(1, 0))
    return apply_color_matrix(PlanarImage(cam, Domain.LINEAR_SCENE), ccm)


def simulate_raw(scene: PlanarImage, cfa: str, rounds: int, cfg: ExperimentConfig, seed: int | None) -> tuple[RawFrame, dict]:
    spec = make_cfa(cfa)
    ch, n_neg = scene_to_channels(scene, spec.color_system, cfg.ccm)
    sensor = cfg.sensor if cfg.noise else SensorConfig.noiseless()
    frame = expose_and_read(ch, spec, rounds, sensor, seed if cfg.noise else None, threads=1)
    return frame, {"ccm_clipped": n_neg, **frame.stats}


def process_raw(frame: RawFrame, cfg: ExperimentConfig) -> PlanarImage:
    """Demosaic in per-pixel signal units, then post-process (linear-sensor channels)."""
    spec = frame.cfa
    out = demosaic(frame, cfg.filters)
    out = out.with_samples(out.samples / total_fan_in(spec, frame.rounds))
    binned_w = frame.rounds > 0 and "W" in spec.color_system.channel_names and len(frame.planes) == 2
    return postprocess(out, spec.color_system, cfg.post, binned_w=binned_w)


@dataclass
class CaseResult:
    input: str
    cfa: str
    mode: str
    psnr_db: float
    seed: int | None
    stats: dict = field(default_factory=dict)
    image: PlanarImage | None = None
    sensor_output: PlanarImage | None = None


def crop_to_tile(img: PlanarImage, spec) -> PlanarImage:
    """Crop bottom/right so whole tiles (and hence whole bin groups) fit."""
    py, px = spec.tile.period_y, spec.tile.period_x
    h, w = img.height - img.height % py, img.width - img.width % px
    if (h, w) == (img.height, img.width):
        return img
    return img.with_samples(img.samples[:, :h, :w])


def run_case(scene: PlanarImage, reference: PlanarImage, input_name: str, cfa: str, mode: str,
             cfg: ExperimentConfig, seed: int | None = None) -> CaseResult:
    spec = make_cfa(cfa)
    rounds = MODES[mode]
    scene, reference = crop_to_tile(scene, spec), crop_to_tile(reference, spec)
    out_size = min(scene.height, scene.width) // total_decimation(spec, rounds)
    if out_size <= 2 * cfg.filters.border:
        raise ConfigError(f"{input_name} / {cfa} / {mode}: {out_size} px output leaves nothing inside "
                          f"the {cfg.filters.border} px metric border; use a larger image")
    frame, stats = simulate_raw(scene, cfa, rounds, cfg, seed)
    sensor_out = process_raw(frame, cfg)
    rgb, n_clip = channels_to_scene(sensor_out, spec.color_system, cfg.ccm).clipped(0.0, 1.0)
    enc = srgb_encode(rgb)
    ref = reference.with_samples(box_downsample(reference.samples.astype(np.float64), total_decimation(spec, rounds)))
    ref_enc = srgb_encode(ref.clipped(0.0, 1.0)[0])
    stats["display_clipped"] = n_clip
    value = psnr(enc, ref_enc, border=cfg.filters.border)
    return CaseResult(input_name, cfa, mode, value, frame.seed, stats, enc, sensor_out)


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def _input_label(name: str) -> str:
    return name if name in CHART_KINDS else Path(name).stem


def psnr_table_csv(results: list[CaseResult], inputs, cfas, modes) -> str:
    """Rows per (CFA, mode), one PSNR column per input, like the published tables."""
    by = {(r.input, r.cfa, r.mode): r.psnr_db for r in results}
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["CFA", "Mode", *[_input_label(i) for i in inputs]])
    for c in cfas:
        for m in modes:
            w.writerow([DISPLAY_NAMES.get(c, c), m, *[_fmt(by[(i, c, m)]) for i in inputs]])
    return buf.getvalue()


def cases_csv(results: list[CaseResult]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["input", "cfa", "mode", "psnr_db", "seed", "saturated_pixels", "adc_clipped", "display_clipped"])
    for r in results:
        w.writerow([_input_label(r.input), r.cfa, r.mode, _fmt(r.psnr_db), "" if r.seed is None else r.seed,
                    r.stats.get("saturated_pixels", 0), r.stats.get("adc_clipped", 0), r.stats.get("display_clipped", 0)])
    return buf.getvalue()


def _threads(cfg: ExperimentConfig) -> int:
    if cfg.threads:
        return cfg.threads
    env = os.environ.get("CFALAB_THREADS")
    return max(1, int(env)) if env else 1


def run_experiment(cfg: ExperimentConfig) -> dict:
    """Run every case; write CSVs, images and a manifest when ``out_dir`` is set."""
    cfg.validate()
    scenes = {}
    for name in cfg.inputs:
        lin = load_input(name, cfg.chart_size)
        scenes[name] = (lin, convolve_psf(lin, airy_kernel(cfg.optics)))
    cases = [(i, c, m) for i in cfg.inputs for c in cfg.cfas for m in cfg.modes]

    def work(case):
        i, c, m = case
        seed = case_seed(cfg.seed, f"{i}/{c}/{m}") if cfg.noise else None
        blurred = scenes[i][1]
        return run_case(blurred, blurred, i, c, m, cfg, seed)

    n = min(_threads(cfg), len(cases))
    if n > 1:
        with ThreadPoolExecutor(n) as pool:
            results = list(pool.map(work, cases))
    else:
        results = [work(c) for c in cases]

    table = psnr_table_csv(results, cfg.inputs, cfg.cfas, cfg.modes)
    report = {"results": results, "table_csv": table, "cases_csv": cases_csv(results), "files": []}
    if cfg.out_dir:
        out = Path(cfg.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        files = []
        (out / "psnr_table.csv").write_text(table)
        (out / "cases.csv").write_text(report["cases_csv"])
        files += ["psnr_table.csv", "cases.csv"]
        if cfg.write_images:
            (out / "images").mkdir(exist_ok=True)
            for r in results:
                rel = f"images/{_input_label(r.input)}_{r.cfa}_{r.mode}.png"
                write_image(out / rel, r.image)
                files.append(rel)
        write_manifest(out, "pipeline", cfg.to_json(), files)
        report["files"] = files
    return report


def write_manifest(out: Path, command: str, config: dict, files: list[str]) -> Path:
    doc = {"command": command, "version": __version__, "config": config, "files": sorted(files)}
    path = Path(out) / "manifest.json"
    path.write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")
    return path
