import math

import numpy as np
import pytest

from pseudohopf import sweepfit
from pseudohopf.asymptotics import AsymptoticLaw
from pseudohopf.errors import DivergentSamples, FitError
from pseudohopf.fields import GALLERY
from pseudohopf.flow import IntegrationLimits
from pseudohopf.sweepfit import (
    SweepGrid,
    asymptotic_half,
    classify_law,
    compare,
    fit_constant,
    fit_log,
    fit_power,
    sweep,
)

BS = 1e-2 * 0.5 ** np.arange(14)


class TestFitPower:
    @pytest.mark.parametrize("lam", [0.25, 0.5, 0.8, 1.0, 2.0])
    @pytest.mark.parametrize("c", [0.5, 1.0, math.sqrt(2.0)])
    def test_exact_recovery(self, lam, c):
        samples = [(b, c * b ** lam) for b in BS]
        fr = fit_power(samples)
        assert fr.law.exponent == pytest.approx(lam, rel=1e-6, abs=1e-9)
        assert fr.law.coefficient == pytest.approx(c, rel=1e-6)
        assert fr.max_rel_residual < 1e-9

    def test_negative_exponent_family(self):
        samples = [(b, 2.0 * b ** -0.5) for b in BS]
        fr = fit_power(samples)
        assert fr.law.family == "neg_power"
        assert fr.law.exponent == pytest.approx(-0.5, abs=1e-9)

    def test_rejects_nonpositive(self):
        with pytest.raises(FitError):
            fit_power([(b, -1.0) for b in BS])


def test_fit_log_exact():
    samples = [(b, -0.8 * math.log(b) + 0.3) for b in BS]
    fr = fit_log(samples)
    assert fr.law.T0 == pytest.approx(0.8, abs=1e-12)
    assert fr.law.offset == pytest.approx(0.3, abs=1e-12)
    assert fr.max_rel_residual < 1e-12


class TestFitConstant:
    def test_exact_constant(self):
        fr = fit_constant([(b, 2.0 * math.pi) for b in BS])
        assert fr.law.T0 == pytest.approx(2.0 * math.pi, abs=1e-12)
        assert fr.max_rel_residual < 1e-12

    def test_constant_with_power_correction(self):
        fr = fit_constant([(b, 2.0 * math.pi + 0.5 * b ** 0.5) for b in BS])
        assert fr.law.T0 == pytest.approx(2.0 * math.pi, rel=1e-6)

    def test_divergent_rejected(self):
        with pytest.raises(DivergentSamples):
            fit_constant([(b, b ** -0.5) for b in BS])


class TestClassify:
    def test_four_families(self):
        power = [(b, math.sqrt(2 * b)) for b in BS]
        assert classify_law(power).law.family == "power"
        neg = [(b, 3.0 * b ** -0.5) for b in BS]
        assert classify_law(neg).law.family == "neg_power"
        log = [(b, -1.7 * math.log(b) + 0.2) for b in BS]
        assert classify_law(log).law.family == "log"
        const = [(b, 2 * math.pi + 0.5 * b ** 0.5) for b in BS]
        assert classify_law(const).law.family == "constant"

    def test_noisy_selection_rate(self):
        rng = np.random.default_rng(20260810)
        makers = {
            "power": lambda b: math.sqrt(2.0) * b ** 0.5,
            "neg_power": lambda b: 3.0 * b ** -0.5,
            "log": lambda b: -1.7 * math.log(b) + 0.2,
            "constant": lambda b: 2.0 * math.pi + 0.5 * b ** 0.5,
        }
        for family, f in makers.items():
            hits = 0
            for _ in range(100):
                noise = 1.0 + 1e-3 * rng.standard_normal(len(BS))
                samples = [(b, f(b) * nz) for b, nz in zip(BS, noise)]
                try:
                    if classify_law(samples).law.family == family:
                        hits += 1
                except FitError:
                    pass
            assert hits >= 95, (family, hits)

    def test_needs_two_decades(self):
        with pytest.raises(FitError):
            classify_law([(b, b) for b in np.linspace(0.5e-2, 1e-2, 12)])


class TestCompare:
    def test_pass_example(self):
        pred = AsymptoticLaw("power", "position", "predicted",
                             coefficient=math.sqrt(2.0), exponent=0.5)
        fitted = fit_power([(b, 1.42 * b ** 0.501) for b in BS])
        v = compare(pred, fitted, 0.02, 0.02)
        assert v.passed

    def test_family_mismatch(self):
        pred = AsymptoticLaw("power", "period", "predicted", coefficient=1.0, exponent=0.5)
        fitted = fit_log([(b, -math.log(b)) for b in BS])
        v = compare(pred, fitted)
        assert not v.passed and not v.family_match

    def test_near_match(self):
        pred = AsymptoticLaw("power", "position", "predicted", coefficient=1.0, exponent=0.8)
        fitted = fit_power([(b, 1.01 * b ** 0.79) for b in BS])
        assert compare(pred, fitted, 0.02, 0.02).passed

    def test_symbolic_prediction_checks_family_only(self):
        pred = AsymptoticLaw("power", "position", "predicted", exponent=None)
        fitted = fit_power([(b, b ** 0.33) for b in BS])
        v = compare(pred, fitted)
        assert v.passed and v.exponent_error is None


class TestSweep:
    def test_fold_defaults(self, sweeps):
        res = sweeps("fold_fold_broken")
        assert len(res.samples) == 20
        assert not res.failures
        xs = [s.x_star for s in res.samples]
        assert all(a > b for a, b in zip(xs, xs[1:]))  # decreasing with |b|
        bs = [abs(s.b) for s in res.samples]
        assert all(a > b for a, b in zip(bs, bs[1:]))

    def test_flipped_sign_yields_no_cycles(self, gallery):
        system = gallery("fold_fold_broken")
        grid = SweepGrid(b_max=1e-2, ratio=0.5, count=10, sign=+1)  # mu is -1
        with pytest.raises(FitError) as err:
            sweep(system, grid)
        assert "NoSignChange" in str(err.value)

    def test_time_cap_failures_recorded(self):
        import pseudohopf as ph
        from pseudohopf.fields import PiecewiseSystem

        base = ph.make_builtin("nfocus_fold", validate=False)
        system = PiecewiseSystem(base.upper, base.lower, x_window=base.x_window,
                                 limits=IntegrationLimits(t_max=1e3),
                                 name="nfocus_tmax")
        res = sweep(system, SweepGrid(b_max=1e-2, ratio=0.5, count=20))
        assert any("TimeCapExceeded" in msg for _, msg in res.failures)
        assert len(res.samples) >= 8

    def test_window_shrink_consistency(self, sweeps):
        res = sweeps("fold_fold_broken")
        samples = [(s.b, s.x_star) for s in res.samples]
        full = fit_power(samples)
        half = fit_power(asymptotic_half(samples))
        assert abs(half.law.exponent - 0.5) <= abs(full.law.exponent - 0.5) + 1e-4

    def test_threads_env(self, gallery, monkeypatch):
        monkeypatch.setenv("PSEUDOHOPF_THREADS", "2")
        system = gallery("model_polycycle_polycycle")
        g = GALLERY["model_polycycle_polycycle"].grid
        res = sweep(system, SweepGrid(b_max=g[0], ratio=g[1], count=g[2]))
        assert len(res.samples) == 20
