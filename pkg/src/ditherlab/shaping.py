"""Inverse equal-loudness FIR design and the iterative noise-shaping loop.

The FIR designer is a frequency-sampling method (fir2-style): dB gains are
interpolated onto a uniform 1024-point grid over [0, Nyquist], converted to
linear magnitude, combined with linear phase for a group delay of order/2,
inverse-transformed, and Hamming-windowed to order+1 taps.

The shaping loop runs full dither-quantizer passes, filters the output error
with the zero-phase (delay-compensated) FIR, and pre-corrects the quantizer
input. Corrections are damped (``relax``) and the dither draw is frozen
across iterations: both are required for the loop to actually lower the
contour-weighted error power instead of random-walking it upward. The
contour-weighted error of every pass is logged and by default the best pass
is returned; ``select="last"`` returns the final pass instead.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from importlib import resources

import numpy as np
from scipy.signal import fftconvolve

from .quantizer import DitherSpec, QuantConfig, QuantResult, draw_dither, quantize, substream
from .signal_io import Signal

__all__ = [
    "ContourTable",
    "FirFilter",
    "ShapingConfig",
    "ShapingDivergence",
    "default_contour",
    "load_contour",
    "design_fir",
    "zero_phase_apply",
    "shape",
]

DESIGN_GRID_POINTS = 1024


class ShapingDivergence(RuntimeError):
    """Raised when a shaping iterate exceeds the 4A amplitude guard."""

    def __init__(self, iteration: int, peak: float):
        super().__init__(
            f"noise-shaping iterate {iteration} diverged (peak {peak:.3g} > 4A guard)"
        )
        self.iteration = iteration
        self.peak = peak


@dataclass(frozen=True)
class ContourTable:
    """Ordered (frequency Hz, gain dB) points; endpoints extended to 0/Nyquist."""

    points: tuple[tuple[float, float], ...]

    def __post_init__(self):
        pts = tuple((float(f), float(g)) for f, g in self.points)
        object.__setattr__(self, "points", pts)
        freqs = [f for f, _ in pts]
        if len(pts) < 2:
            raise ValueError("contour needs at least two points")
        if any(f2 <= f1 for f1, f2 in zip(freqs, freqs[1:])):
            raise ValueError("contour frequencies must be strictly increasing")
        if freqs[0] < 0:
            raise ValueError("contour frequencies must be nonnegative")

    def extended(self, nyquist: float) -> "ContourTable":
        """Clamp to [0, nyquist] and pin the endpoint gains there."""
        pts = [(f, g) for f, g in self.points if 0.0 <= f <= nyquist]
        if not pts:
            raise ValueError("contour has no points below Nyquist")
        if pts[0][0] > 0.0:
            pts.insert(0, (0.0, pts[0][1]))
        if pts[-1][0] < nyquist:
            pts.append((nyquist, pts[-1][1]))
        return ContourTable(tuple(pts))

    def gain_db(self, freqs_hz: np.ndarray) -> np.ndarray:
        """Linear-in-Hz interpolation of the dB gains."""
        f = np.array([p[0] for p in self.points])
        g = np.array([p[1] for p in self.points])
        return np.interp(freqs_hz, f, g)

    def digest(self) -> str:
        """Stable hash of the table, echoed into reports for provenance."""
        payload = ";".join(f"{f:.6f},{g:.6f}" for f, g in self.points)
        return hashlib.sha256(payload.encode()).hexdigest()[:16]


@dataclass(frozen=True)
class FirFilter:
    taps: np.ndarray
    order: int

    def __post_init__(self):
        taps = np.asarray(self.taps, dtype=np.float64)
        taps.setflags(write=False)
        object.__setattr__(self, "taps", taps)
        if len(taps) != self.order + 1:
            raise ValueError("tap count must equal order + 1")
        if not np.all(np.isfinite(taps)):
            raise ValueError("taps must be finite")


@dataclass(frozen=True)
class ShapingConfig:
    """Contour, FIR order (default 512), and iteration count (default 100)."""

    contour: ContourTable = None
    order: int = 512
    iterations: int = 100
    relax: float = 0.2
    select: str = "best"
    redraw_dither: bool = False

    def __post_init__(self):
        if self.contour is None:
            object.__setattr__(self, "contour", default_contour())
        if self.order < 2 or self.order % 2 != 0:
            raise ValueError("order must be even and >= 2")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if not 0.0 < self.relax <= 1.0:
            raise ValueError("relax must be in (0, 1]")
        if self.select not in ("best", "last"):
            raise ValueError("select must be 'best' or 'last'")


def load_contour(path) -> ContourTable:
    """Load a two-column (Hz, dB) plain-text table; '#' starts a comment."""
    points = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            body = line.split("#", 1)[0].strip()
            if not body:
                continue
            parts = body.split()
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected two columns")
            points.append((float(parts[0]), float(parts[1])))
    return ContourTable(tuple(points))


def default_contour() -> ContourTable:
    """The inverse 60-phon weighting table shipped with the package."""
    ref = resources.files("ditherlab.data") / "inverse_loudness_60phon.txt"
    points = []
    for line in ref.read_text().splitlines():
        body = line.split("#", 1)[0].strip()
        if body:
            f, g = body.split()
            points.append((float(f), float(g)))
    return ContourTable(tuple(points))


def design_fir(contour: ContourTable, order: int = 512, sample_rate: int = 44100) -> FirFilter:
    """Frequency-sampling linear-phase FIR matching the contour magnitude."""
    if order < 2 or order % 2 != 0:
        raise ValueError("order must be even and >= 2")
    nyq = sample_rate / 2.0
    table = contour.extended(nyq)
    grid = np.linspace(0.0, nyq, DESIGN_GRID_POINTS)
    mag = 10.0 ** (table.gain_db(grid) / 20.0)
    nfft = 2 * (DESIGN_GRID_POINTS - 1)
    delay = order // 2
    desired = mag * np.exp(-2j * np.pi * np.arange(DESIGN_GRID_POINTS) * delay / nfft)
    impulse = np.fft.irfft(desired, nfft)
    taps = impulse[: order + 1] * np.hamming(order + 1)
    return FirFilter(taps=taps, order=order)


def zero_phase_apply(x: np.ndarray, fir: FirFilter) -> np.ndarray:
    """Filter with group-delay compensation: symmetric taps give zero phase."""
    delay = fir.order // 2
    y = fftconvolve(np.asarray(x, dtype=np.float64), fir.taps)
    return y[delay : delay + len(x)]


def contour_weighted_power(error: np.ndarray, contour: ContourTable, sample_rate: int) -> float:
    """Hann-windowed power spectrum of the error, weighted by the contour.

    The weight is the squared linear contour gain, matching the PWSNR
    weighting in the metrics module.
    """
    e = np.asarray(error, dtype=np.float64)
    win = np.hanning(len(e))
    spec = np.abs(np.fft.rfft(e * win)) ** 2
    freqs = np.fft.rfftfreq(len(e), 1.0 / sample_rate)
    w = 10.0 ** (contour.extended(sample_rate / 2).gain_db(freqs) / 10.0)
    return float(np.sum(w * spec))


def shape(
    x: Signal,
    dither: DitherSpec,
    cfg: QuantConfig,
    shaping: ShapingConfig = None,
    subtractive: bool = False,
) -> tuple[QuantResult, list[float]]:
    """Iterative noise-shaped dither quantization (error-feedback refinement).

    Runs ``iterations`` correction steps (iterations+1 quantizer passes):
    each pass quantizes the current pre-corrected input, the output error
    against the original signal is zero-phase filtered through the contour
    FIR, and the next input is x - relax * filtered(error). Returns the
    selected pass (best weighted error, or last) plus the per-pass
    contour-weighted error log.
    """
    if shaping is None:
        shaping = ShapingConfig()
    fir = design_fir(shaping.contour, shaping.order, x.sample_rate)
    guard = 4.0 * cfg.full_scale

    rng = substream(dither.seed)
    v0 = draw_dither(dither, cfg.step, len(x), rng=rng)

    def one_pass(xi: np.ndarray, it: int) -> QuantResult:
        if shaping.redraw_dither and it > 0:
            v = draw_dither(dither, cfg.step, len(x), rng=substream(dither.seed, it))
        else:
            v = v0
        pre = xi + v
        symbols, recon = quantize(pre, cfg)
        out = recon - v if subtractive else recon
        return QuantResult(x.with_samples(out), v, pre, symbols)

    xi = x.samples.copy()
    best: QuantResult = None
    best_wp = np.inf
    log: list[float] = []
    result = None
    for it in range(shaping.iterations + 1):
        peak = np.abs(xi).max()
        if peak > guard:
            raise ShapingDivergence(it, peak)
        result = one_pass(xi, it)
        err = result.output.samples - x.samples
        wp = contour_weighted_power(err, shaping.contour, x.sample_rate)
        log.append(wp)
        if wp < best_wp:
            best_wp = wp
            best = result
        if it < shaping.iterations:
            xi = x.samples - shaping.relax * zero_phase_apply(err, fir)
    return (best if shaping.select == "best" else result), log
