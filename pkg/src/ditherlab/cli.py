"""Command-line front end: generate fixtures, process files, run sweeps.

Exit codes: 0 success, 2 argument errors (argparse), 3 config/parameter
validation, 4 file I/O problems, 5 pipeline errors (including shaping
divergence).
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from .metrics import load_external_scores, metric_row
from .quantizer import DitherSpec, QuantConfig, run_pipeline
from .shaping import ShapingConfig, load_contour, shape
from .signal_io import (
    ChordSpec,
    Signal,
    SignalError,
    ToneSpec,
    gen_chord,
    gen_sine,
    normalize_peak,
    note_to_freq,
    read_wav,
    write_wav,
)
from .sweep import CONDITIONS, SweepConfig, report_svg_charts, run_sweep, write_report

EXIT_VALIDATION = 3
EXIT_IO = 4
EXIT_PIPELINE = 5

CONFIG_VERSION = 1

CONFIG_KEYS = {
    "version",
    "input",
    "inputs",
    "preset",
    "output_dir",
    "no_normalize",
    "alpha_count",
    "conditions",
    "bits",
    "full_scale",
    "subtractive",
    "tradeoff_lambda",
    "seed",
    "selection_rule",
    "plateau_threshold",
    "fundamental_hz",
    "enable_shaping",
    "shaping",
    "svg",
}

SHAPING_KEYS = {"order", "iterations", "relax", "select", "redraw_dither", "contour"}


class ConfigError(ValueError):
    pass


def _resolve_freq(args) -> float:
    if args.note:
        return note_to_freq(args.note)
    if args.freq is not None:
        return args.freq
    raise SignalError("specify --note or --freq")


def cmd_generate(args) -> int:
    if args.kind == "sine":
        spec = ToneSpec(_resolve_freq(args), args.duration, args.db)
        signal = gen_sine(spec, args.rate)
    else:
        notes = [n.strip() for n in args.notes.split(",") if n.strip()]
        if not notes:
            raise SignalError("chord needs --notes")
        tones = tuple(ToneSpec(note_to_freq(n), args.duration) for n in notes)
        signal = gen_chord(ChordSpec(tones, args.db, args.duration), args.rate)
    write_wav(args.out, signal, args.bit_depth)
    print(f"wrote {args.out}: {len(signal)} samples @ {signal.sample_rate} Hz, "
          f"{args.bit_depth}-bit, peak {np.abs(signal.samples).max():.6f}")
    return 0


def _shaping_from_args(args) -> ShapingConfig | None:
    if not args.shaping:
        return None
    contour = None if args.shaping == "default" else load_contour(args.shaping)
    return ShapingConfig(
        contour=contour, order=args.order, iterations=args.iters, relax=args.relax
    )


def cmd_process(args) -> int:
    x = read_wav(args.input)
    if not args.no_normalize:
        x = normalize_peak(x)
    cfg = QuantConfig(bits=args.bits, full_scale=args.full_scale)
    spec = DitherSpec(kind=args.dither, alpha=args.alpha, seed=args.seed)
    shaping = _shaping_from_args(args)
    if shaping is not None:
        result, _ = shape(x, spec, cfg, shaping, args.subtractive)
    else:
        result = run_pipeline(x, spec, cfg, args.subtractive)
    row = metric_row(
        x,
        result,
        cfg.levels,
        args.alpha,
        contour=shaping.contour if shaping else None,
        fundamental_hz=args.fundamental,
    )
    err_inf = float(np.abs(result.output.samples - x.samples).max())
    stats = dict(row.as_dict(), max_abs_error=err_inf)
    print(" ".join(f"{k}={v:.17g}" for k, v in stats.items()))
    if args.out:
        write_wav(args.out, result.output, 16)
    return 0


def _load_config(path) -> dict:
    with open(path) as fh:
        raw = json.load(fh)
    unknown = set(raw) - CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if raw.get("version", CONFIG_VERSION) != CONFIG_VERSION:
        raise ConfigError(f"unsupported config version {raw.get('version')}")
    bad_shaping = set(raw.get("shaping", {})) - SHAPING_KEYS
    if bad_shaping:
        raise ConfigError(f"unknown shaping keys: {sorted(bad_shaping)}")
    bad_conditions = set(raw.get("conditions", [])) - set(CONDITIONS)
    if bad_conditions:
        raise ConfigError(f"unknown conditions: {sorted(bad_conditions)}")
    return raw


def _shaping_from_config(doc: dict) -> ShapingConfig:
    sh = dict(doc.get("shaping", {}))
    contour_ref = sh.pop("contour", "default")
    contour = None if contour_ref in (None, "default") else load_contour(contour_ref)
    return ShapingConfig(contour=contour, **sh)


def _sweep_config(doc: dict, fundamental: float | None = None) -> SweepConfig:
    return SweepConfig(
        alpha_count=doc.get("alpha_count", 1000),
        conditions=tuple(doc.get("conditions", list(CONDITIONS))),
        quant=QuantConfig(doc.get("bits", 3), doc.get("full_scale", 1.0)),
        shaping=_shaping_from_config(doc),
        subtractive=doc.get("subtractive", True),
        tradeoff_lambda=doc.get("tradeoff_lambda", 0.5),
        seed=doc.get("seed", 0),
        selection_rule=doc.get("selection_rule", "knee"),
        plateau_threshold=doc.get("plateau_threshold", 0.95),
        fundamental_hz=fundamental if fundamental is not None else doc.get("fundamental_hz"),
        enable_shaping=doc.get("enable_shaping", True),
    )


def _preset_jobs(doc: dict) -> list[tuple[str, Signal, float | None]]:
    """Expand a config into (label, signal, fundamental) sweep jobs."""
    preset = doc.get("preset")
    duration = 1.0
    if preset is None:
        inp = doc.get("input")
        if inp is None:
            raise ConfigError("config needs 'input' or 'preset'")
        if isinstance(inp, str):
            x = read_wav(inp)
            if not doc.get("no_normalize", False):
                x = normalize_peak(x)
            return [(Path(inp).stem, x, doc.get("fundamental_hz"))]
        if inp.get("kind") == "sine":
            freq = inp.get("freq") or note_to_freq(inp.get("note", "C4"))
            x = gen_sine(ToneSpec(freq, inp.get("duration", duration), inp.get("db", 0.0)))
            return [("sine", x, freq)]
        raise ConfigError(f"unsupported input spec: {inp}")
    if preset == "loudness":
        # -25..0 dB in 5 dB steps; loudness fixtures stay unnormalized.
        c4 = note_to_freq("C4")
        return [
            (f"loudness_{db:+d}dB", gen_sine(ToneSpec(c4, duration, db)), c4)
            for db in range(-25, 1, 5)
        ]
    if preset == "pitch":
        # C4..C5 by half steps: 13 runs at -10 dB.
        jobs = []
        base = note_to_freq("C4")
        for semis in range(13):
            freq = base * 2.0 ** (semis / 12.0)
            jobs.append((f"pitch_{semis:02d}", gen_sine(ToneSpec(freq, duration, -10.0)), freq))
        return jobs
    if preset == "chord":
        tones = tuple(ToneSpec(note_to_freq(n), duration) for n in ("C4", "E4", "G4", "C5"))
        x = gen_chord(ChordSpec(tones, -10.0, duration))
        return [("chord_cmaj", x, None)]
    if preset == "rhythm":
        inputs = doc.get("inputs") or []
        if not inputs:
            raise ConfigError("rhythm preset needs 'inputs': a list of wav paths")
        jobs = []
        for path in inputs:
            x = read_wav(path)
            if not doc.get("no_normalize", False):
                x = normalize_peak(x)
            jobs.append((f"rhythm_{Path(path).stem}", x, None))
        return jobs
    raise ConfigError(f"unknown preset {preset!r}")


def cmd_sweep(args) -> int:
    doc = _load_config(args.config)
    outdir = Path(doc.get("output_dir", "."))
    outdir.mkdir(parents=True, exist_ok=True)
    jobs = _preset_jobs(doc)
    for label, signal, fundamental in jobs:
        cfg = _sweep_config(doc, fundamental)
        report = run_sweep(signal, cfg)
        csv_path = outdir / f"{label}.csv"
        write_report(report, csv_path, outdir / f"{label}.provenance.json")
        if doc.get("svg", False):
            for key, svg in report_svg_charts(report).items():
                (outdir / f"{label}.{key}.svg").write_text(svg)
        print(f"{label}: {len(report.rows)} rows -> {csv_path}")
        for opt in report.optimal:
            print(
                f"  {opt.condition}: alpha*={opt.alpha:.6g} "
                f"pwsnr={opt.score_at_optimum:.4g} dB "
                f"improvement={opt.improvement_over_npdf:+.4g} dB"
            )
    return 0


def cmd_report(args) -> int:
    scores = load_external_scores(args.scores)
    metric_names = sorted({name for (_, _, name) in scores})
    with open(args.sweep_csv, newline="") as fh:
        reader = csv.DictReader(fh)
        rows = list(reader)
        columns = list(reader.fieldnames or [])
    for name in metric_names:
        columns.append(f"ext_{name}")
    with open(args.out, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns)
        writer.writeheader()
        for rec in rows:
            for name in metric_names:
                key = (args.file_id, float(rec["alpha"]), name)
                if key in scores:
                    rec[f"ext_{name}"] = format(scores[key], ".12g")
            writer.writerow(rec)
    print(f"wrote {args.out} with external columns {metric_names}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ditherlab",
        description="Entropy-controlled dithered quantization for audio.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="write a sine or chord fixture WAV")
    gen.add_argument("kind", choices=["sine", "chord"])
    gen.add_argument("out")
    gen.add_argument("--note", help="note name, e.g. C4 (A4=440, equal temperament)")
    gen.add_argument("--freq", type=float, help="frequency in Hz (alternative to --note)")
    gen.add_argument("--notes", default="C4,E4,G4,C5", help="chord notes, comma separated")
    gen.add_argument("--db", type=float, default=0.0, help="peak level, dBFS (<= 0)")
    gen.add_argument("--duration", type=float, default=1.0)
    gen.add_argument("--rate", type=int, default=44100)
    gen.add_argument("--bit-depth", type=int, default=16, choices=[8, 16])
    gen.set_defaults(func=cmd_generate)

    proc = sub.add_parser("process", help="run one dither-quantizer pass on a WAV")
    proc.add_argument("input")
    proc.add_argument("--out", help="write processed audio here (16-bit WAV)")
    proc.add_argument("--dither", default="tpdf", choices=["npdf", "rpdf", "tpdf", "tpdf_iid", "mtpdf"])
    proc.add_argument("--alpha", type=float, default=1.0)
    proc.add_argument("--bits", type=int, default=3)
    proc.add_argument("--full-scale", type=float, default=1.0)
    proc.add_argument("--seed", type=int, default=0)
    proc.add_argument("--subtractive", action="store_true")
    proc.add_argument("--no-normalize", action="store_true",
                      help="skip peak normalization (loudness-test inputs)")
    proc.add_argument("--shaping", help="'default' or a contour table path; omit to disable")
    proc.add_argument("--iters", type=int, default=100)
    proc.add_argument("--order", type=int, default=512)
    proc.add_argument("--relax", type=float, default=0.2)
    proc.add_argument("--fundamental", type=float, help="fundamental Hz for spur metric")
    proc.set_defaults(func=cmd_process)

    swp = sub.add_parser("sweep", help="run an alpha sweep from a JSON config")
    swp.add_argument("config")
    swp.set_defaults(func=cmd_sweep)

    rep = sub.add_parser("report", help="join external scores into a sweep CSV")
    rep.add_argument("--sweep-csv", required=True)
    rep.add_argument("--scores", required=True, help="CSV: file_id,alpha,metric_name,score")
    rep.add_argument("--file-id", required=True)
    rep.add_argument("--out", required=True)
    rep.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, SignalError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except RuntimeError as exc:  # ShapingDivergence, SweepError
        print(f"pipeline error: {exc}", file=sys.stderr)
        return EXIT_PIPELINE


if __name__ == "__main__":
    sys.exit(main())
