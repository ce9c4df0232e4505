"""Quality and compressibility metrics for quantized audio.

Covers symbol entropy (order-0 and order-1 conditional), mean squared error,
real compressed size via the range coder, a perceptually weighted SNR proxy
(PWSNR, explicitly a stand-in for external VISQOL/STOI scores), and an
SFDR-style harmonic spur measurement for tonal fixtures.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, fields

import numpy as np

from .rangecoder import coded_bits_per_symbol
from .shaping import ContourTable, default_contour
from .signal_io import Signal

__all__ = [
    "MetricRow",
    "PWSNR_CAP_DB",
    "entropy",
    "conditional_entropy",
    "mse",
    "pwsnr",
    "spectrum_spurs",
    "metric_row",
    "load_external_scores",
]

PWSNR_CAP_DB = 200.0


@dataclass(frozen=True)
class MetricRow:
    """All per-run metrics for one (condition, alpha) evaluation."""

    alpha: float
    entropy_bits: float
    cond_entropy_bits: float
    mse: float
    coded_bits_per_symbol: float
    pwsnr_db: float
    spur_db: float = float("nan")

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def entropy(symbols, alphabet_size: int) -> float:
    """Shannon entropy in bits of the empirical symbol distribution."""
    syms = np.asarray(symbols, dtype=np.int64)
    if syms.size == 0:
        raise ValueError("symbols must be non-empty")
    if syms.min() < 0 or syms.max() >= alphabet_size:
        raise ValueError("symbols out of range for alphabet_size")
    p = np.bincount(syms, minlength=alphabet_size) / syms.size
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum())


def conditional_entropy(symbols, alphabet_size: int) -> float:
    """Order-1 conditional entropy H(X_t | X_{t-1}) in bits.

    Included because the difference-based TPDF construction correlates
    consecutive samples, which order-0 entropy cannot see.
    """
    syms = np.asarray(symbols, dtype=np.int64)
    if syms.size == 0:
        raise ValueError("symbols must be non-empty")
    if syms.size == 1:
        return 0.0
    m = alphabet_size
    joint = np.bincount(syms[:-1] * m + syms[1:], minlength=m * m).reshape(m, m)
    n = joint.sum()
    h = 0.0
    for row in joint:
        tot = row.sum()
        if tot == 0:
            continue
        p = row[row > 0] / tot
        h += (tot / n) * float(-(p * np.log2(p)).sum())
    return h


def mse(x: Signal, x_hat: Signal) -> float:
    """Mean squared error between two equal-length signals."""
    if len(x) != len(x_hat):
        raise ValueError("signals must have equal length")
    d = x.samples - x_hat.samples
    return float(np.mean(d * d))


def _contour_weights(freqs: np.ndarray, contour: ContourTable, nyquist: float) -> np.ndarray:
    # Squared linear gain: weighting applied to power spectra.
    return 10.0 ** (contour.extended(nyquist).gain_db(freqs) / 10.0)


def pwsnr(x: Signal, x_hat: Signal, contour: ContourTable = None) -> float:
    """Perceptually weighted SNR proxy in dB.

    10*log10 of contour-weighted signal power over contour-weighted error
    power, both from Hann-windowed spectra. A zero-error input returns the
    +200 dB cap. This is a proxy metric, not VISQOL or STOI.
    """
    if len(x) != len(x_hat):
        raise ValueError("signals must have equal length")
    if len(x) < 1024:
        raise ValueError("pwsnr needs at least 1024 samples")
    if contour is None:
        contour = default_contour()
    win = np.hanning(len(x))
    freqs = np.fft.rfftfreq(len(x), 1.0 / x.sample_rate)
    w = _contour_weights(freqs, contour, x.sample_rate / 2)
    sig_p = float(np.sum(w * np.abs(np.fft.rfft(x.samples * win)) ** 2))
    err = x_hat.samples - x.samples
    err_p = float(np.sum(w * np.abs(np.fft.rfft(err * win)) ** 2))
    if err_p <= 0.0 or sig_p / err_p > 10.0 ** (PWSNR_CAP_DB / 10.0):
        return PWSNR_CAP_DB
    return float(10.0 * np.log10(sig_p / err_p))


def spectrum_spurs(x_hat: Signal, fundamental_hz: float, max_harmonic: int = 10) -> float:
    """Max harmonic spur height above the local noise floor, in dB.

    Hann-windowed power-of-two FFT; each harmonic 2..max_harmonic is measured
    as its +-3 bin peak against the median power of the surrounding
    non-harmonic bins. The local (not global) floor keeps the fundamental's
    leakage skirt from masquerading as headroom.
    """
    n = len(x_hat)
    nfft = 1 << int(np.floor(np.log2(n)))
    if nfft < 256:
        raise ValueError("signal too short for spur analysis")
    bin_width = x_hat.sample_rate / nfft
    if fundamental_hz < 2 * bin_width:
        raise ValueError("fundamental below spectral resolution")
    seg = x_hat.samples[:nfft] * np.hanning(nfft)
    power = np.abs(np.fft.rfft(seg)) ** 2
    nbins = len(power)

    def harmonic_bin(h: int) -> int:
        return int(round(h * fundamental_hz / bin_width))

    exclude = np.zeros(nbins, dtype=bool)
    for h in range(1, max_harmonic + 1):
        k = harmonic_bin(h)
        if k < nbins:
            exclude[max(k - 5, 0) : min(k + 6, nbins)] = True
    exclude[:3] = True

    half_window = max(int(round(200.0 / bin_width)), 30)
    spur = -np.inf
    for h in range(2, max_harmonic + 1):
        k = harmonic_bin(h)
        if k + 3 >= nbins:
            break
        peak = power[max(k - 3, 0) : k + 4].max()
        lo, hi = max(k - half_window, 0), min(k + half_window, nbins)
        local = power[lo:hi][~exclude[lo:hi]]
        floor = np.median(local) if local.size else np.median(power[~exclude])
        if floor <= 0:
            floor = np.finfo(float).tiny
        spur = max(spur, 10.0 * np.log10(peak / floor))
    if not np.isfinite(spur):
        raise ValueError("no harmonics below Nyquist to measure")
    return float(spur)


def metric_row(
    x: Signal,
    result,
    alphabet_size: int,
    alpha: float,
    contour: ContourTable = None,
    fundamental_hz: float = None,
) -> MetricRow:
    """Assemble the full MetricRow for one pipeline result."""
    syms = result.symbols
    row = MetricRow(
        alpha=alpha,
        entropy_bits=entropy(syms, alphabet_size),
        cond_entropy_bits=conditional_entropy(syms, alphabet_size),
        mse=mse(x, result.output),
        coded_bits_per_symbol=coded_bits_per_symbol(syms, alphabet_size),
        pwsnr_db=pwsnr(x, result.output, contour),
        spur_db=(
            spectrum_spurs(result.output, fundamental_hz)
            if fundamental_hz
            else float("nan")
        ),
    )
    return row


def load_external_scores(path) -> dict:
    """Load an external-scores CSV: columns (file_id, alpha, metric_name, score).

    Returns {(file_id, alpha, metric_name): score} keyed for exact joins.
    """
    scores = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        required = {"file_id", "alpha", "metric_name", "score"}
        if reader.fieldnames is None or not required.issubset(reader.fieldnames):
            raise ValueError(f"external scores CSV must have columns {sorted(required)}")
        for rec in reader:
            key = (rec["file_id"], float(rec["alpha"]), rec["metric_name"])
            scores[key] = float(rec["score"])
    return scores
