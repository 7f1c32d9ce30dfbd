"""``cfalab`` command line: spectrum, pipeline, snr-table and chart subcommands.

Exit codes: 0 success, 2 validation failure (e.g. a table cell outside
tolerance), 1 operational error (bad arguments, missing files).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import replace
from pathlib import Path

from .cfa import CATALOG, CfaError, make_cfa
from .charts import CHART_KINDS, generate_chart
from .demosaic import FilterBankConfig
from .imageio import ImageIOError, write_image
from .pipeline import MODES, ConfigError, ExperimentConfig, run_experiment, write_manifest
from .postprocess import PostprocessConfig
from .sensor import SensorConfig
from .snr import DOUBLE_BINNABLE, SINGLE_BINNABLE, advantage_table, compare_with_published, table_csv, table_text
from .spectrum import analyze_tile, check_degeneracy, export_spectrum_csv

EXIT_OK, EXIT_ERROR, EXIT_VALIDATION = 0, 1, 2
TOGGLES = ("false_color", "denoise")


def _csv_list(s: str) -> list[str]:
    return [p.strip() for p in s.split(",") if p.strip()]


def parse_toggles(spec: str) -> dict[str, bool]:
    """Parse ``all``, ``none`` or ``name=on|off,...`` into post-processing switches."""
    spec = spec.strip().lower()
    if spec == "all":
        return dict.fromkeys(TOGGLES, True)
    if spec == "none":
        return dict.fromkeys(TOGGLES, False)
    out = dict.fromkeys(TOGGLES, True)
    for item in _csv_list(spec):
        name, _, value = item.partition("=")
        if name not in TOGGLES or value not in ("on", "off", ""):
            raise ConfigError(f"bad toggle {item!r}; use all, none or {'/'.join(TOGGLES)}=on|off")
        out[name] = value != "off"
    return out


def plot_rows(report, cfg: FilterBankConfig = FilterBankConfig()) -> str:
    """Carrier positions with the luminance / chrominance band radii for plotting."""
    names = report.tile.color_system.basis_names
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["wx", "wy", "kind", "direction", "magnitude", "radius"])
    for c in report.carriers:
        kind = "luminance" if c.is_dc else "chrominance"
        radius = cfg.lum_radius if c.is_dc else cfg.chroma_radius
        w.writerow([f"{c.freq[0]:.6g}", f"{c.freq[1]:.6g}", kind, names[c.dominant_direction()],
                    f"{c.magnitude:.6g}", f"{radius:.6g}"])
    return buf.getvalue()


def cmd_spectrum(args) -> int:
    try:
        spec = make_cfa(args.cfa)
    except CfaError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR
    report = analyze_tile(spec.tile)
    verdict = check_degeneracy(report)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    files = {
        f"{spec.name}_spectrum.csv": export_spectrum_csv(report),
        f"{spec.name}_degeneracy.json": json.dumps({"cfa": spec.name, **verdict.to_json()}, indent=1) + "\n",
        f"{spec.name}_plot.csv": plot_rows(report),
    }
    for name, text in files.items():
        (out / name).write_text(text)
    write_manifest(out, "spectrum", {"cfa": spec.name}, list(files))
    status = "PASS" if verdict.passed else f"FAIL ({', '.join(verdict.failed_directions)})"
    print(f"{spec.name}: {len(report.carriers)} carriers, degeneracy {status}")
    return EXIT_OK


def cmd_snr_table(args) -> int:
    entries = advantage_table()
    single = [e for e in entries if e.cfa in SINGLE_BINNABLE]
    double = [e for e in entries if e.cfa in DOUBLE_BINNABLE]
    checks = compare_with_published(entries)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    files = {
        "single_binnable.csv": table_csv(single),
        "double_binnable.csv": table_csv(double),
        "single_binnable.txt": table_text(single, "Single binnable CFAs"),
        "double_binnable.txt": table_text(double, "Double binnable CFAs"),
    }
    for name, text in files.items():
        (out / name).write_text(text)
    write_manifest(out, "snr-table", {}, list(files))
    sys.stdout.write(files["single_binnable.txt"] + "\n" + files["double_binnable.txt"])
    for c in checks:
        if c.annotated:
            print(f"note: {c.cfa} / {c.mode} / {c.field}: model {c.model:.6g}, published {c.published:.6g} ({c.note})")
    bad = [c for c in checks if not c.ok]
    for c in bad:
        print(f"tolerance breach: {c.cfa} / {c.mode} / {c.field}: model {c.model:.6g}, "
              f"published {c.published:.6g}", file=sys.stderr)
    return EXIT_VALIDATION if bad else EXIT_OK


def cmd_chart(args) -> int:
    img = generate_chart(args.kind, args.size, **({"seed": args.seed} if args.kind == "text_proxy" else {}))
    write_image(args.out, img, bits=args.bits)
    print(f"wrote {args.out}")
    return EXIT_OK


def cmd_pipeline(args) -> int:
    toggles = parse_toggles(args.toggles)
    post = replace(PostprocessConfig(), false_color=toggles["false_color"], denoise=toggles["denoise"])
    inputs = _csv_list(args.chart) + list(args.input or [])
    if not inputs:
        raise ConfigError("give at least one --chart or --input")
    cfg = ExperimentConfig(
        cfas=tuple(_csv_list(args.cfa)),
        inputs=tuple(inputs),
        modes=tuple(_csv_list(args.mode)),
        chart_size=args.size,
        noise=args.noise,
        sensor=SensorConfig(),
        post=post,
        out_dir=args.out,
        seed=args.seed,
        write_images=not args.no_images,
    )
    report = run_experiment(cfg)
    sys.stdout.write(report["table_csv"])
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cfalab", description="Binnable CFA analysis and simulation")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("spectrum", help="carrier spectrum and degeneracy verdict of a CFA")
    s.add_argument("--cfa", required=True, help=f"one of: {', '.join(CATALOG)}")
    s.add_argument("--out", default=".", help="output directory")
    s.set_defaults(func=cmd_spectrum)

    s = sub.add_parser("pipeline", help="simulate capture and demosaicking, report PSNR")
    s.add_argument("--cfa", required=True, help="comma-separated CFA names")
    s.add_argument("--mode", default="full", help=f"comma-separated bin modes from {', '.join(MODES)}")
    s.add_argument("--chart", default="", help=f"comma-separated chart kinds from {', '.join(CHART_KINDS)}")
    s.add_argument("--input", action="append", help="input image path (repeatable)")
    s.add_argument("--size", type=int, default=512, help="chart size in pixels")
    s.add_argument("--noise", action="store_true", help="enable shot and read noise")
    s.add_argument("--seed", type=int, default=None, help="master seed (required with --noise)")
    s.add_argument("--toggles", default="all", help="post-processing: all, none, or false_color=on|off,denoise=on|off")
    s.add_argument("--no-images", action="store_true", help="skip writing output images")
    s.add_argument("--out", required=True, help="output directory")
    s.set_defaults(func=cmd_pipeline)

    s = sub.add_parser("snr-table", help="emit and self-check the SNR / power / frame-rate tables")
    s.add_argument("--out", default=".", help="output directory")
    s.set_defaults(func=cmd_snr_table)

    s = sub.add_parser("chart", help="write a synthetic test chart")
    s.add_argument("--kind", required=True, choices=[k for k in CHART_KINDS])
    s.add_argument("--size", type=int, default=512)
    s.add_argument("--seed", type=int, default=0, help="seed for text_proxy")
    s.add_argument("--bits", type=int, choices=(8, 16), default=8)
    s.add_argument("--out", required=True, help="output image path (.png, .ppm)")
    s.set_defaults(func=cmd_chart)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_ERROR if e.code else EXIT_OK
    try:
        return args.func(args)
    except (ConfigError, CfaError, ImageIOError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
