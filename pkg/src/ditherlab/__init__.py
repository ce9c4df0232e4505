"""Entropy-controlled dithered quantization for audio."""

from .metrics import (
    MetricRow,
    conditional_entropy,
    entropy,
    metric_row,
    mse,
    pwsnr,
    spectrum_spurs,
)
from .quantizer import (
    DITHER_KINDS,
    DitherSpec,
    QuantConfig,
    QuantResult,
    draw_dither,
    quantize,
    run_pipeline,
)
from .rangecoder import coded_bits_per_symbol, range_decode, range_encode
from .shaping import (
    ContourTable,
    FirFilter,
    ShapingConfig,
    ShapingDivergence,
    contour_weighted_power,
    default_contour,
    design_fir,
    load_contour,
    shape,
    zero_phase_apply,
)
from .signal_io import (
    ChordSpec,
    Signal,
    SignalError,
    ToneSpec,
    WavFormatError,
    gen_chord,
    gen_sine,
    normalize_peak,
    note_to_freq,
    read_wav,
    write_wav,
)
from .sweep import (
    CONDITIONS,
    OptimalAlpha,
    SweepConfig,
    SweepReport,
    alpha_grid,
    objective,
    report_csv,
    report_svg_charts,
    run_sweep,
    select_alpha,
    write_report,
)

__version__ = "0.1.0"
