#!/usr/bin/env python3
"""
Sweeping the dither amplitude and picking an operating point
============================================================

Runs a small alpha grid over all six conditions, writes the frozen CSV plus
SVG charts next to this script, and prints the selected optimal alpha per
condition under both selection rules.

    python demos/demo_alpha_sweep.py
"""

from pathlib import Path

from ditherlab import (
    QuantConfig,
    ShapingConfig,
    SweepConfig,
    ToneSpec,
    gen_sine,
    note_to_freq,
    report_csv,
    report_svg_charts,
    run_sweep,
    select_alpha,
)

f0 = note_to_freq("C4")
x = gen_sine(ToneSpec(f0, 0.5, 0.0), 44100)

cfg = SweepConfig(
    alpha_count=21,                      # keep the demo quick; 1000 for real runs
    quant=QuantConfig(bits=3, full_scale=1.0),
    shaping=ShapingConfig(order=128, iterations=10),
    subtractive=False,
    seed=0,
    fundamental_hz=f0,
)

report = run_sweep(x, cfg, progress=lambda d, t: print(f"\r{d}/{t} rows", end=""))
print()

outdir = Path(__file__).parent
(outdir / "sweep_demo.csv").write_text(report_csv(report))
for key, svg in report_svg_charts(report).items():
    (outdir / f"sweep_demo_{key}.svg").write_text(svg)
print(f"wrote sweep_demo.csv and charts to {outdir}\n")

print(f"{'condition':>15} {'knee':>6} {'argmax-J':>9}")
for cond in cfg.conditions:
    rows = report.rows_for(cond)
    knee = select_alpha(rows, "knee", plateau_threshold=0.95)
    amax = select_alpha(rows, "argmax-J", lam=0.5, bits=cfg.quant.bits)
    print(f"{cond:>15} {knee:>6.2f} {amax:>9.2f}")

print("\nprovenance:", {k: report.provenance[k]
                        for k in ("rows", "complete", "contour_sha256_16")})
