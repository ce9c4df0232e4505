"""Dither generation and uniform mid-rise quantization.

Four dither distributions are supported:

* ``npdf``  -- no dither (all zeros; alpha is ignored).
* ``rpdf``  -- i.i.d. uniform on [-step/2, +step/2], a fixed baseline whose
  support does not scale with alpha.
* ``tpdf``  -- discrete differences of a uniform stream on
  [-alpha*step/2, +alpha*step/2]; the marginal is triangular on
  +-alpha*step, but consecutive samples are anticorrelated (high-passed).
  An i.i.d. two-uniform variant is available via ``tpdf_iid``.
* ``mtpdf`` -- per-sample Bernoulli(alpha) mixture: with probability alpha a
  fresh triangular draw on +-alpha*step, otherwise exactly 0.0 so the point
  mass at zero is machine-representable.

The quantizer is mid-rise with 2^b symmetric levels; out-of-range inputs
saturate at the end levels.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .signal_io import Signal

__all__ = [
    "DITHER_KINDS",
    "QuantConfig",
    "DitherSpec",
    "QuantResult",
    "substream",
    "draw_dither",
    "quantize",
    "run_pipeline",
]

DITHER_KINDS = ("npdf", "rpdf", "tpdf", "tpdf_iid", "mtpdf")


@dataclass(frozen=True)
class QuantConfig:
    """Uniform b-bit quantizer over [-A, A]; step = 2A / 2^b."""

    bits: int = 3
    full_scale: float = 1.0

    def __post_init__(self):
        if self.bits < 1:
            raise ValueError("bits must be >= 1")
        if self.full_scale <= 0:
            raise ValueError("full_scale must be positive")

    @property
    def levels(self) -> int:
        return 2**self.bits

    @property
    def step(self) -> float:
        return 2.0 * self.full_scale / self.levels


@dataclass(frozen=True)
class DitherSpec:
    """Dither distribution choice plus amplitude parameter and RNG seed."""

    kind: str = "tpdf"
    alpha: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in DITHER_KINDS:
            raise ValueError(f"kind must be one of {DITHER_KINDS}, got {self.kind!r}")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must be in [0, 1]")


@dataclass(frozen=True)
class QuantResult:
    """One pipeline pass: output signal, dither, pre-quantizer sum, symbols."""

    output: Signal
    dither: np.ndarray
    pre_quant: np.ndarray
    symbols: np.ndarray


def substream(seed: int, *keys: int) -> np.random.Generator:
    """Independent, reproducible RNG substream derived from (seed, keys).

    numpy's SeedSequence hashes the whole entropy tuple, so substreams for
    distinct keys (alpha index, iteration, ...) are decorrelated while each
    remains exactly reproducible.
    """
    return np.random.default_rng(np.random.SeedSequence((int(seed) & (2**64 - 1), *keys)))


def draw_dither(spec: DitherSpec, step: float, n: int, rng=None) -> np.ndarray:
    """Draw n dither samples for the given distribution and quantizer step."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if step <= 0:
        raise ValueError("step must be positive")
    if rng is None:
        rng = substream(spec.seed)
    a = spec.alpha
    if spec.kind == "npdf" or (a == 0.0 and spec.kind != "rpdf"):
        return np.zeros(n)
    if spec.kind == "rpdf":
        return rng.uniform(-step / 2, step / 2, n)
    if spec.kind == "tpdf":
        r = rng.uniform(-a * step / 2, a * step / 2, n)
        out = np.empty(n)
        out[0] = r[0]
        out[1:] = r[1:] - r[:-1]
        return out
    if spec.kind == "tpdf_iid":
        u = rng.uniform(-a * step / 2, a * step / 2, (2, n))
        return u[0] - u[1]
    # mtpdf: Bernoulli(alpha) gate over fresh triangular draws; the zero
    # branch emits exact 0.0 so the delta mass survives float rounding.
    gate = rng.random(n) < a
    u = rng.uniform(-a * step / 2, a * step / 2, (2, n))
    tri = u[0] - u[1]
    return np.where(gate, tri, 0.0)


def quantize(x_plus_v: np.ndarray, cfg: QuantConfig) -> tuple[np.ndarray, np.ndarray]:
    """Mid-rise quantization: symbol indices and reconstruction levels.

    k = clamp(floor((s + A)/step), 0, 2^b - 1); level = -A + (k + 0.5)*step.
    """
    s = np.asarray(x_plus_v, dtype=np.float64)
    if not np.all(np.isfinite(s)):
        raise ValueError("quantizer input contains non-finite samples")
    A = cfg.full_scale
    k = np.clip(np.floor((s + A) / cfg.step), 0, cfg.levels - 1).astype(np.int64)
    recon = -A + (k + 0.5) * cfg.step
    return k, recon


def run_pipeline(
    x: Signal,
    dither: DitherSpec,
    cfg: QuantConfig,
    subtractive: bool = False,
    rng=None,
) -> QuantResult:
    """One dither-quantizer pass (optionally subtractive).

    Non-subtractive: out = Q(x + v). Subtractive: out = Q(x + v) - v.
    Symbols are always the quantizer indices of x + v.
    """
    v = draw_dither(dither, cfg.step, len(x), rng=rng)
    pre = x.samples + v
    symbols, recon = quantize(pre, cfg)
    out = recon - v if subtractive else recon
    return QuantResult(
        output=x.with_samples(out), dither=v, pre_quant=pre, symbols=symbols
    )
