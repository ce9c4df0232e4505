"""Alpha-grid evaluation, trade-off scalarization, and optimal-alpha selection.

A sweep evaluates every (condition, alpha) cell on a uniform inclusive
[0, 1] grid, producing one MetricRow per cell. The perceptual/compressibility
trade-off is scalarized as J = (1 - lambda) * P_norm + lambda * C_norm with
P_norm the min-max normalized PWSNR over the sweep and C_norm = 1 - H/b.
The dither-amplitude alpha and the trade-off weight are deliberately separate
parameters (alpha vs lambda).

Rows are independent jobs executed on a process pool; report assembly is an
ordered reduction, so scheduling cannot change output bytes.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import FIRST_COMPLETED, ProcessPoolExecutor, wait
from dataclasses import dataclass, field

import numpy as np

from .metrics import MetricRow, metric_row
from .quantizer import DitherSpec, QuantConfig, run_pipeline, substream
from .shaping import ShapingConfig, ShapingDivergence, shape
from .signal_io import Signal

__all__ = [
    "CONDITIONS",
    "SweepConfig",
    "SweepReport",
    "OptimalAlpha",
    "SweepError",
    "alpha_grid",
    "run_sweep",
    "objective",
    "select_alpha",
    "report_csv",
    "report_svg_charts",
]

# Condition name -> (dither kind, shaped?)
CONDITIONS = {
    "npdf": ("npdf", False),
    "rpdf": ("rpdf", False),
    "tpdf": ("tpdf", False),
    "tpdf+shaping": ("tpdf", True),
    "mtpdf": ("mtpdf", False),
    "mtpdf+shaping": ("mtpdf", True),
}

WORKERS_ENV = "DITHERLAB_WORKERS"

CSV_COLUMNS = (
    "condition",
    "alpha",
    "entropy_bits",
    "cond_entropy_bits",
    "mse",
    "coded_bits_per_symbol",
    "pwsnr_db",
    "spur_db",
)


class SweepError(RuntimeError):
    """A row failed; carries the offending (condition, alpha)."""

    def __init__(self, condition, alpha, cause):
        super().__init__(f"sweep row ({condition}, alpha={alpha}) failed: {cause}")
        self.condition = condition
        self.alpha = alpha


@dataclass(frozen=True)
class SweepConfig:
    alpha_count: int = 1000
    conditions: tuple[str, ...] = tuple(CONDITIONS)
    quant: QuantConfig = field(default_factory=QuantConfig)
    shaping: ShapingConfig = field(default_factory=ShapingConfig)
    subtractive: bool = True
    tradeoff_lambda: float = 0.5
    seed: int = 0
    plateau_threshold: float = 0.95
    selection_rule: str = "knee"
    fundamental_hz: float | None = None
    enable_shaping: bool = True

    def __post_init__(self):
        if self.alpha_count < 2:
            raise ValueError("alpha_count must be >= 2 (grid must contain 0 and 1)")
        for cond in self.conditions:
            if cond not in CONDITIONS:
                raise ValueError(f"unknown condition {cond!r}")
        if not 0.0 <= self.tradeoff_lambda <= 1.0:
            raise ValueError("tradeoff_lambda must be in [0, 1]")
        if self.selection_rule not in ("knee", "argmax-J"):
            raise ValueError("selection_rule must be 'knee' or 'argmax-J'")


@dataclass(frozen=True)
class OptimalAlpha:
    condition: str
    alpha: float
    selection_rule: str
    score_at_optimum: float
    improvement_over_npdf: float


@dataclass(frozen=True)
class SweepReport:
    rows: tuple[tuple[str, MetricRow], ...]
    optimal: tuple[OptimalAlpha, ...]
    provenance: dict

    def rows_for(self, condition: str) -> list[MetricRow]:
        return [row for cond, row in self.rows if cond == condition]


def alpha_grid(count: int) -> np.ndarray:
    """Uniform inclusive grid on [0, 1]; endpoints always present."""
    return np.linspace(0.0, 1.0, count)


def _row_seed(seed: int, cond_index: int, alpha_index: int) -> int:
    return int(
        np.random.SeedSequence((int(seed) & (2**64 - 1), cond_index, alpha_index))
        .generate_state(1, np.uint64)[0]
    )


def evaluate_cell(x: Signal, cfg: SweepConfig, condition: str, alpha_index: int) -> MetricRow:
    """Evaluate one (condition, alpha) cell to a full MetricRow."""
    kind, shaped = CONDITIONS[condition]
    alphas = alpha_grid(cfg.alpha_count)
    alpha = float(alphas[alpha_index])
    cond_index = list(CONDITIONS).index(condition)
    spec = DitherSpec(kind=kind, alpha=alpha, seed=_row_seed(cfg.seed, cond_index, alpha_index))
    try:
        if shaped and cfg.enable_shaping:
            result, _ = shape(x, spec, cfg.quant, cfg.shaping, cfg.subtractive)
        else:
            result = run_pipeline(x, spec, cfg.quant, cfg.subtractive)
    except (ShapingDivergence, ValueError) as exc:
        raise SweepError(condition, alpha, exc) from exc
    return metric_row(
        x,
        result,
        cfg.quant.levels,
        alpha,
        contour=cfg.shaping.contour,
        fundamental_hz=cfg.fundamental_hz,
    )


# Worker-process state: the signal and config are shipped once per worker.
_WORKER: dict = {}


def _init_worker(samples, sample_rate, cfg):
    _WORKER["x"] = Signal(samples, sample_rate)
    _WORKER["cfg"] = cfg


def _run_cells(cells):
    x, cfg = _WORKER["x"], _WORKER["cfg"]
    return [(c, a, evaluate_cell(x, cfg, c, a)) for c, a in cells]


def worker_count() -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def run_sweep(
    x: Signal,
    cfg: SweepConfig,
    progress=None,
    cancelled=None,
    parallel: bool = True,
) -> SweepReport:
    """Run the full sweep; deterministic for a fixed (config, seed).

    ``progress(done, total)`` is called as rows complete; ``cancelled()`` is
    polled between batches and, when true, the report is assembled from the
    rows finished so far.
    """
    if len(x) == 0:
        raise ValueError("signal is empty")
    alphas = alpha_grid(cfg.alpha_count)
    cells = [(c, ai) for c in cfg.conditions for ai in range(len(alphas))]
    total = len(cells)
    results: dict[tuple[str, int], MetricRow] = {}

    nworkers = worker_count() if parallel else 1
    if nworkers > 1 and total > 8:
        chunk = max(1, min(64, total // (nworkers * 4)))
        batches = [cells[i : i + chunk] for i in range(0, total, chunk)]
        with ProcessPoolExecutor(
            max_workers=nworkers,
            initializer=_init_worker,
            initargs=(x.samples, x.sample_rate, cfg),
        ) as pool:
            pending = {pool.submit(_run_cells, b) for b in batches}
            while pending:
                done, pending = wait(pending, return_when=FIRST_COMPLETED)
                for fut in done:
                    for cond, ai, row in fut.result():
                        results[(cond, ai)] = row
                    if progress:
                        progress(len(results), total)
                if cancelled and cancelled():
                    for fut in pending:
                        fut.cancel()
                    break
    else:
        for cond, ai in cells:
            results[(cond, ai)] = evaluate_cell(x, cfg, cond, ai)
            if progress:
                progress(len(results), total)
            if cancelled and cancelled():
                break

    rows = tuple(
        (cond, results[(cond, ai)])
        for cond in cfg.conditions
        for ai in range(len(alphas))
        if (cond, ai) in results
    )
    optimal = _select_all(rows, cfg)
    provenance = {
        "config": _config_echo(cfg),
        "contour_sha256_16": cfg.shaping.contour.digest(),
        "signal_length": len(x),
        "sample_rate": x.sample_rate,
        "rows": len(rows),
        "complete": len(rows) == total,
        "version": _package_version(),
    }
    return SweepReport(rows=rows, optimal=optimal, provenance=provenance)


def _package_version() -> str:
    from importlib.metadata import PackageNotFoundError, version

    try:
        return version("ditherlab")
    except PackageNotFoundError:  # pragma: no cover
        return "unknown"


def _config_echo(cfg: SweepConfig) -> dict:
    return {
        "alpha_count": cfg.alpha_count,
        "conditions": list(cfg.conditions),
        "bits": cfg.quant.bits,
        "full_scale": cfg.quant.full_scale,
        "subtractive": cfg.subtractive,
        "tradeoff_lambda": cfg.tradeoff_lambda,
        "seed": cfg.seed,
        "plateau_threshold": cfg.plateau_threshold,
        "selection_rule": cfg.selection_rule,
        "fundamental_hz": cfg.fundamental_hz,
        "enable_shaping": cfg.enable_shaping,
        "shaping": {
            "order": cfg.shaping.order,
            "iterations": cfg.shaping.iterations,
            "relax": cfg.shaping.relax,
            "select": cfg.shaping.select,
            "redraw_dither": cfg.shaping.redraw_dither,
            "contour_points": list(cfg.shaping.contour.points),
        },
    }


def _normalize_p(rows: list[MetricRow]) -> np.ndarray:
    p = np.array([r.pwsnr_db for r in rows])
    span = p.max() - p.min()
    if span == 0:
        return np.ones_like(p)
    return (p - p.min()) / span


def objective(row: MetricRow, lam: float, p_range: tuple[float, float], bits: int) -> float:
    """Scalarized trade-off J = (1 - lam) * P_norm + lam * C_norm (higher wins).

    P_norm normalizes pwsnr over the sweep's observed range; with a
    degenerate range the objective falls back to C_norm alone.
    """
    lo, hi = p_range
    c_norm = 1.0 - row.entropy_bits / bits
    if hi == lo:
        return c_norm
    p_norm = (row.pwsnr_db - lo) / (hi - lo)
    return (1.0 - lam) * p_norm + lam * c_norm


def select_alpha(
    rows: list[MetricRow],
    rule: str = "knee",
    plateau_threshold: float = 0.95,
    lam: float = 0.5,
    bits: int = 3,
) -> float:
    """Pick the optimal alpha for one condition's rows.

    "knee" (default): smallest alpha whose normalized perceptual score
    reaches plateau_threshold of the maximum -- a deterministic stand-in for
    reading spikes/plateaus off the trade-off curve. "argmax-J": maximize the
    scalarized objective. Ties break toward the smallest alpha.
    """
    if len(rows) < 3:
        raise ValueError("need at least 3 rows to select an alpha")
    order = np.argsort([r.alpha for r in rows], kind="stable")
    rows = [rows[i] for i in order]
    if rule == "knee":
        p_norm = _normalize_p(rows)
        for row, p in zip(rows, p_norm):
            if p >= plateau_threshold:
                return row.alpha
        return rows[-1].alpha
    if rule == "argmax-J":
        p = [r.pwsnr_db for r in rows]
        p_range = (min(p), max(p))
        scores = [objective(r, lam, p_range, bits) for r in rows]
        best = int(np.argmax(scores))  # argmax takes the first (smallest alpha) tie
        return rows[best].alpha
    raise ValueError(f"unknown selection rule {rule!r}")


def _select_all(rows, cfg: SweepConfig) -> tuple[OptimalAlpha, ...]:
    by_cond: dict[str, list[MetricRow]] = {}
    for cond, row in rows:
        by_cond.setdefault(cond, []).append(row)
    npdf_rows = by_cond.get("npdf")
    npdf_pwsnr = npdf_rows[0].pwsnr_db if npdf_rows else float("nan")
    out = []
    for cond, crows in by_cond.items():
        if len(crows) < 3:
            continue
        alpha = select_alpha(
            crows,
            rule=cfg.selection_rule,
            plateau_threshold=cfg.plateau_threshold,
            lam=cfg.tradeoff_lambda,
            bits=cfg.quant.bits,
        )
        at = next(r for r in crows if r.alpha == alpha)
        out.append(
            OptimalAlpha(
                condition=cond,
                alpha=alpha,
                selection_rule=cfg.selection_rule,
                score_at_optimum=at.pwsnr_db,
                improvement_over_npdf=at.pwsnr_db - npdf_pwsnr,
            )
        )
    return tuple(out)


def _fmt(value: float) -> str:
    if isinstance(value, float) and np.isnan(value):
        return "nan"
    return format(value, ".12g")


def report_csv(report: SweepReport) -> str:
    """Frozen CSV rendering: fixed column order, %.12g formatting."""
    lines = [",".join(CSV_COLUMNS)]
    for cond, row in report.rows:
        rec = row.as_dict()
        lines.append(",".join([cond] + [_fmt(rec[c]) for c in CSV_COLUMNS[1:]]))
    return "\n".join(lines) + "\n"


def write_report(report: SweepReport, csv_path, provenance_path=None):
    with open(csv_path, "w", newline="") as fh:
        fh.write(report_csv(report))
    if provenance_path:
        doc = {
            "provenance": report.provenance,
            "optimal": [vars(o) for o in report.optimal],
        }
        with open(provenance_path, "w") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")


def _svg_polyline(xs, ys, width, height, pad=40):
    xs, ys = np.asarray(xs, float), np.asarray(ys, float)
    ok = np.isfinite(ys)
    xs, ys = xs[ok], ys[ok]
    if len(xs) == 0:
        return ""
    x0, x1 = xs.min(), xs.max()
    y0, y1 = ys.min(), ys.max()
    if x1 == x0:
        x1 = x0 + 1
    if y1 == y0:
        y1 = y0 + 1
    px = pad + (xs - x0) / (x1 - x0) * (width - 2 * pad)
    py = height - pad - (ys - y0) / (y1 - y0) * (height - 2 * pad)
    return " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(px, py))


_SVG_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def report_svg_charts(report: SweepReport) -> dict[str, str]:
    """Deterministic hand-rolled SVG line charts: entropy and pwsnr vs alpha."""
    charts = {}
    conds = list(dict.fromkeys(c for c, _ in report.rows))
    for key, field_name in [("entropy", "entropy_bits"), ("pwsnr", "pwsnr_db")]:
        w, h = 640, 400
        parts = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}">',
            f'<rect width="{w}" height="{h}" fill="white"/>',
            f'<text x="{w//2}" y="20" text-anchor="middle" font-size="14">'
            f"{field_name} vs alpha</text>",
        ]
        for i, cond in enumerate(conds):
            rows = report.rows_for(cond)
            pts = _svg_polyline(
                [r.alpha for r in rows], [getattr(r, field_name) for r in rows], w, h
            )
            color = _SVG_COLORS[i % len(_SVG_COLORS)]
            if pts:
                parts.append(
                    f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>'
                )
            parts.append(
                f'<text x="{w-150}" y="{40+14*i}" font-size="12" fill="{color}">{cond}</text>'
            )
        parts.append("</svg>")
        charts[key] = "\n".join(parts) + "\n"
    return charts
