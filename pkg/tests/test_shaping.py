import numpy as np
import pytest

from ditherlab.quantizer import DitherSpec, QuantConfig, quantize
from ditherlab.shaping import (
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
from ditherlab.signal_io import Signal, ToneSpec, gen_sine

FS = 44100
CFG3 = QuantConfig(3, 1.0)
FLAT0 = ContourTable(((0.0, 0.0), (FS / 2, 0.0)))


def freq_response(fir, nfft=8192):
    w = np.fft.rfftfreq(nfft, 1 / FS)
    return w, np.abs(np.fft.rfft(fir.taps, nfft))


class TestContourTable:
    def test_rejects_decreasing(self):
        with pytest.raises(ValueError):
            ContourTable(((100.0, 0.0), (100.0, -3.0)))

    def test_endpoint_extension(self):
        t = ContourTable(((20.0, -40.0), (16000.0, -24.0))).extended(FS / 2)
        assert t.points[0] == (0.0, -40.0)
        assert t.points[-1] == (FS / 2, -24.0)

    def test_default_contour_loads(self):
        c = default_contour()
        assert len(c.points) >= 10
        assert len(c.digest()) == 16

    def test_load_contour_file(self, tmp_path):
        p = tmp_path / "c.txt"
        p.write_text("# comment\n100 -10\n1000 0  # inline\n\n")
        c = load_contour(p)
        assert c.points == ((100.0, -10.0), (1000.0, 0.0))


class TestDesignFir:
    def test_flat_0db_is_allpass(self):
        fir = design_fir(FLAT0, 512, FS)
        _, mag = freq_response(fir)
        assert np.abs(mag - 1.0).max() < 0.01

    def test_flat_minus20db(self):
        table = ContourTable(((0.0, -20.0), (FS / 2, -20.0)))
        fir = design_fir(table, 512, FS)
        _, mag = freq_response(fir)
        assert np.abs(mag - 0.1).max() < 0.001

    def test_default_contour_tracks_interpolant(self):
        contour = default_contour()
        fir = design_fir(contour, 512, FS)
        w, mag = freq_response(fir)
        band = (w >= 100) & (w <= 16000)
        target_db = contour.extended(FS / 2).gain_db(w[band])
        err = 20 * np.log10(np.maximum(mag[band], 1e-12)) - target_db
        assert np.abs(err).max() <= 1.0

    def test_tap_count_and_symmetry(self):
        fir = design_fir(default_contour(), 512, FS)
        assert len(fir.taps) == 513
        np.testing.assert_allclose(fir.taps, fir.taps[::-1], atol=1e-15)

    def test_odd_order_rejected(self):
        with pytest.raises(ValueError):
            design_fir(FLAT0, 511, FS)


class TestZeroPhase:
    def test_impulse_centered_symmetric(self):
        fir = design_fir(default_contour(), 512, FS)
        imp = np.zeros(2048)
        imp[1000] = 1.0
        out = zero_phase_apply(imp, fir)
        left = out[1000 - 256 : 1000]
        right = out[1001 : 1001 + 256]
        assert np.abs(left - right[::-1]).max() < 1e-9
        assert np.argmax(np.abs(out)) == 1000

    def test_flat_filter_near_identity(self):
        fir = design_fir(FLAT0, 512, FS)
        rng = np.random.default_rng(0)
        x = rng.normal(size=4096)
        out = zero_phase_apply(x, fir)
        # edges see the truncated kernel; interior must match
        assert np.abs(out[300:-300] - x[300:-300]).max() < 1e-6


class TestShape:
    def setup_method(self):
        self.x = gen_sine(ToneSpec(261.63, 0.5, 0.0), FS)

    def test_n1_flat_npdf_is_precompensated_quantization(self):
        # literal loop semantics: relax=1, take the last pass
        cfg = ShapingConfig(contour=FLAT0, order=512, iterations=1, relax=1.0, select="last")
        result, log = shape(self.x, DitherSpec("npdf"), CFG3, cfg, False)
        _, q0 = quantize(self.x.samples, CFG3)
        e0 = q0 - self.x.samples
        fir = design_fir(FLAT0, 512, FS)
        corrected = self.x.samples - zero_phase_apply(e0, fir)
        _, expect = quantize(corrected, CFG3)
        np.testing.assert_array_equal(result.output.samples, expect)
        assert len(log) == 2

    def test_dc_midpoint_fixed_point(self):
        dc = Signal(np.full(4096, 0.125), FS)  # a reconstruction level
        cfg = ShapingConfig(contour=FLAT0, iterations=100, relax=1.0, select="last")
        result, log = shape(dc, DitherSpec("npdf"), CFG3, cfg, False)
        np.testing.assert_array_equal(result.output.samples, dc.samples)
        assert all(l == 0.0 for l in log)

    def test_weighted_error_not_worse_than_unshaped(self):
        from ditherlab.quantizer import run_pipeline

        contour = default_contour()
        spec = DitherSpec("tpdf", 0.5, 7)
        unshaped = run_pipeline(self.x, spec, CFG3, False)
        wp_un = contour_weighted_power(
            unshaped.output.samples - self.x.samples, contour, FS
        )
        shaped, log = shape(self.x, spec, CFG3, ShapingConfig(), False)
        wp_sh = contour_weighted_power(
            shaped.output.samples - self.x.samples, contour, FS
        )
        assert wp_sh <= wp_un * 1.01
        assert min(log) == wp_sh

    def test_divergence_guard(self):
        # a contour with huge positive gain forces the guard to trip
        hot = ContourTable(((0.0, 40.0), (FS / 2, 40.0)))
        cfg = ShapingConfig(contour=hot, iterations=50, relax=1.0, select="last")
        with pytest.raises(ShapingDivergence) as exc:
            shape(self.x, DitherSpec("tpdf", 1.0, 1), CFG3, cfg, False)
        assert exc.value.iteration >= 1

    def test_deterministic(self):
        cfg = ShapingConfig(iterations=5)
        a, _ = shape(self.x, DitherSpec("tpdf", 0.5, 3), CFG3, cfg, True)
        b, _ = shape(self.x, DitherSpec("tpdf", 0.5, 3), CFG3, cfg, True)
        np.testing.assert_array_equal(a.output.samples, b.output.samples)

    def test_config_validation(self):
        with pytest.raises(ValueError):
            ShapingConfig(order=3)
        with pytest.raises(ValueError):
            ShapingConfig(iterations=0)
        with pytest.raises(ValueError):
            ShapingConfig(relax=0.0)
        with pytest.raises(ValueError):
            ShapingConfig(select="median")


class TestFirFilter:
    def test_tap_count_enforced(self):
        with pytest.raises(ValueError):
            FirFilter(np.zeros(10), order=512)
