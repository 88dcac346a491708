import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pseudohopf import asymptotics as asym
from pseudohopf.asymptotics import (
    AsymptoticLaw,
    dulac_invert_leading,
    efocus_alpha1,
    gasull_coeffs,
    nfocus_alpha1,
    polar_components,
    predict_period_law,
    predict_position_dulac,
    predict_position_smooth,
    reflected_position_coefficient,
    table_law,
)
from pseudohopf.errors import ConfigError
from pseudohopf.fields import ComponentClass, ModelFlight, PlanarField

T_STAR = 3.7081493546026567


class TestTableLaw:
    def test_fold_fold(self):
        per, pos = table_law(ComponentClass.fold(2), ComponentClass.fold(2))
        assert (per.family, per.exponent) == ("power", 0.5)
        assert (pos.family, pos.exponent) == ("power", 0.5)

    def test_nfocus_fold(self):
        per, pos = table_law(ComponentClass.nfocus(2), ComponentClass.fold(2))
        assert (per.family, per.exponent) == ("neg_power", -0.5)
        assert (pos.family, pos.exponent) == ("power", 0.5)

    def test_polycycle_fold(self):
        per, pos = table_law(ComponentClass.polycycle(0.7), ComponentClass.fold(2))
        assert per.family == "log"
        assert pos.family == "power" and pos.exponent is None

    def test_porbit_efocus(self):
        per, pos = table_law(ComponentClass.periodic_orbit(2), ComponentClass.efocus())
        assert per.family == "constant"
        assert pos.exponent is None

    def test_order_swap(self):
        a = table_law(ComponentClass.fold(2), ComponentClass.cusp(1))
        b = table_law(ComponentClass.cusp(1), ComponentClass.fold(2))
        assert a[0].exponent == b[0].exponent == pytest.approx(-1.0 / 3.0)


class TestPredictPositionSmooth:
    def test_fold_fold_case(self):
        law = predict_position_smooth(-1.0, -1.0, 2)
        assert law.coefficient == pytest.approx(math.sqrt(2.0))
        assert law.exponent == 0.5

    def test_unit_inputs(self):
        law = predict_position_smooth(0.0, -1.0, 1)
        assert (law.coefficient, law.exponent) == (1.0, 1.0)

    def test_efocus_case(self):
        a1 = -math.exp(0.1 * math.pi)
        v1 = -(a1 - (-1.0))  # delta=-1
        law = predict_position_smooth(a1, v1, 1)
        assert law.coefficient == pytest.approx((1.0 - a1) / abs(v1))

    def test_rejects_zero_vn(self):
        with pytest.raises(ValueError):
            predict_position_smooth(-1.0, 0.0, 2)


class TestPredictPositionDulac:
    def test_polycycle_pair(self):
        law = predict_position_dulac((-1.0, -1.0), (1.4, 1.25), delta=1)
        assert law.exponent == pytest.approx(0.8)
        assert law.coefficient == pytest.approx(1.0)
        assert law.case_tag == "rm_ge_1__r_up_gt_1"

    def test_r_up_one(self):
        law = predict_position_dulac((-1.0, -1.0), (1.0, 2.0), delta=1)
        assert law.exponent == pytest.approx(1.0)
        assert law.coefficient == pytest.approx(2.0)  # (1 - a1)/|V1|, V1 = delta*a1

    def test_mixed_mu_plus(self):
        law = predict_position_dulac((-1.0, -1.0), (0.8, 1.25), delta=1)
        assert law.case_tag == "mixed_mu_plus"
        assert (law.coefficient, law.exponent) == (1.0, 1.0)

    def test_mixed_mu_minus(self):
        law = predict_position_dulac((-1.0, -1.0), (1.25, 0.8), delta=1)
        assert law.case_tag == "mixed_mu_minus"
        assert law.coefficient is None

    def test_v1_zero_refused(self):
        with pytest.raises(ValueError):
            predict_position_dulac((-1.0, -1.0), (1.0, 1.0), delta=1)

    def test_reflected_consistency(self):
        worst = 0.0
        count = 0
        for a_up, a_dn, r_up, r_dn in itertools.product(
                (-0.5, -1.0, -2.5), (-0.7, -1.0, -1.8), (0.4, 0.7, 1.0), (0.4, 0.9, 1.0)):
            if (r_up - 1.0) * (r_dn - 1.0) < 0 or min(r_up, r_dn) > 1.0:
                continue
            try:
                law = predict_position_dulac((a_up, a_dn), (r_up, r_dn), 1)
                refl = reflected_position_coefficient((a_up, a_dn), (r_up, r_dn))
            except ValueError:
                continue
            count += 1
            worst = max(worst, abs(law.coefficient - refl))
        assert count > 30
        assert worst <= 1e-10


class TestDulacInvert:
    @pytest.mark.parametrize("alpha,r,expected", [
        (4.0, 2.0, (0.5, 0.5)),
        (-1.0, 0.7, (1.0, 10.0 / 7.0)),
        (-2.0, 1.0, (0.5, 1.0)),
    ])
    def test_examples(self, alpha, r, expected):
        kappa, rho = dulac_invert_leading(alpha, r)
        assert kappa == pytest.approx(expected[0])
        assert rho == pytest.approx(expected[1])

    def test_reflected_sign(self):
        kappa, _ = dulac_invert_leading(-2.0, 1.0, reflected=True)
        assert kappa == pytest.approx(-0.5)

    @given(st.floats(0.1, 8.0), st.floats(0.25, 4.0), st.floats(0.01, 2.0))
    @settings(max_examples=100, deadline=None)
    def test_round_trip(self, mag, r, ymag):
        alpha = -mag
        kappa, rho = dulac_invert_leading(alpha, r)
        y = -ymag
        x = kappa * abs(y) ** rho
        assert alpha * x ** r == pytest.approx(y, rel=1e-12, abs=1e-300)


class TestEfocusAlpha1:
    def test_linear_center(self):
        assert efocus_alpha1(0.0, -1.0, 1.0, 0.0) == pytest.approx(1.0)

    def test_trace_examples(self):
        assert efocus_alpha1(0.1, -1.0, 1.0, 0.1) == pytest.approx(math.exp(0.1 * math.pi))
        assert efocus_alpha1(-0.1, -1.0, 1.0, -0.1) == pytest.approx(math.exp(-0.1 * math.pi))

    @given(st.floats(-0.8, 0.8), st.floats(0.2, 2.0))
    @settings(max_examples=60, deadline=None)
    def test_zero_trace_gives_one(self, a10, b10):
        assert efocus_alpha1(a10, -1.0, b10, -a10) == pytest.approx(1.0)

    def test_nonmonodromic_rejected(self):
        with pytest.raises(ValueError):
            efocus_alpha1(0.0, 1.0, 1.0, 0.0)


class TestNfocusAlpha1:
    def test_case_i_unity(self):
        assert nfocus_alpha1(1.0, 0.0, 2, None) == pytest.approx(1.0)

    def test_even_n_case_ii_unity(self):
        assert nfocus_alpha1(1.0, 1.0, 2, 1) == pytest.approx(1.0, abs=1e-12)

    def test_against_second_quadrature(self):
        val = nfocus_alpha1(1.0, 1.0, 3, 2)
        nodes, weights = np.polynomial.legendre.leggauss(400)
        theta = 0.5 * math.pi * (nodes + 1.0)
        w = 0.5 * math.pi * weights
        n, a, nu = 3, 1.0, 1.0
        s, c = np.sin(theta), np.cos(theta)
        integrand = nu * s * s * c ** (n - 1) / ((a * c ** (2 * n) + n * s * s) + nu * c ** n * s)
        second = math.exp(float(np.sum(w * integrand)))
        assert val == pytest.approx(second, abs=1e-8)

    def test_monodromy_violations(self):
        with pytest.raises(ValueError):
            nfocus_alpha1(1.0, 5.0, 2, 1)  # b^2 - 4an >= 0
        with pytest.raises(ValueError):
            nfocus_alpha1(1.0, 1.0, 3, 0)  # beta < n-1


class TestGasull:
    def test_harmonic_oscillator(self):
        field = PlanarField(((0.0, -1.0),), ((0.0,), (1.0,)))
        A, B = polar_components(field, 1, 1, 0)
        g = gasull_coeffs(A, B, 0)
        assert g.r1_pi == pytest.approx(1.0, abs=1e-12)
        assert g.T_hat_0 == pytest.approx(math.pi, abs=1e-10)

    def test_efocus_contraction(self):
        eps = 0.1
        field = PlanarField(((0.0, -1.0), (eps, 0.0)), ((0.0, eps), (1.0, 0.0)))
        A, B = polar_components(field, 1, 1, 0)
        g = gasull_coeffs(A, B, 0)
        assert g.r1_pi == pytest.approx(efocus_alpha1(eps, -1.0, 1.0, eps), abs=1e-6)
        assert g.T_hat_0 == pytest.approx(math.pi, abs=1e-10)

    def test_cusp_antisymmetry(self):
        field = PlanarField(((0.0, 0.0, -1.0),), ((0.0,), (1.0,)))
        A, B = polar_components(field, 3, 2, 1)
        g = gasull_coeffs(A, B, 1)
        assert g.r1_pi == pytest.approx(1.0, abs=1e-8)
        assert g.r2_pi == pytest.approx(0.0, abs=1e-10)

    def test_broken_cusp_residue_sign(self):
        field = PlanarField(((0.0, 0.0, -1.0), (0.0, 0.3, 0.0)), ((0.0,), (1.0,)))
        A, B = polar_components(field, 3, 2, 1)
        g = gasull_coeffs(A, B, 1)
        assert g.r1_pi == pytest.approx(1.0, abs=1e-8)
        assert g.r2_pi > 0.01  # the x^(4/3) series residue is switched on

    def test_nfocus_flight_constant_matches_quadrature(self):
        field = PlanarField(((0.0, -1.0),), ((0.0,), (0.0,), (0.0,), (1.0,)))
        A, B = polar_components(field, 1, 2, 1)
        g = gasull_coeffs(A, B, 1)
        assert g.T_hat_0 == pytest.approx(T_STAR, abs=1e-10)

    def test_hypothesis_checks(self):
        with pytest.raises(ConfigError):
            gasull_coeffs(lambda r, t: r, lambda r, t: -1.0, 0)  # B0 < 0
        with pytest.raises(ConfigError):
            gasull_coeffs(lambda r, t: 1.0 + 0.0 * r, lambda r, t: 1.0, 0)  # A(0,.) != 0


class TestPredictPeriodLaw:
    POS_HALF = AsymptoticLaw("power", "position", "predicted",
                             coefficient=math.sqrt(2.0), exponent=0.5)

    def test_nfocus_fold(self):
        law = predict_period_law(
            ComponentClass.nfocus(2), ComponentClass.fold(2), self.POS_HALF,
            {"upper": ModelFlight("power", T0=T_STAR, sign=1, exponent=-1.0),
             "lower": ModelFlight("power", T0=2.0, sign=-1, exponent=1.0)})
        assert law.family == "neg_power"
        assert law.coefficient == pytest.approx(T_STAR / math.sqrt(2.0))
        assert law.exponent == pytest.approx(-0.5)

    def test_polycycle_fold_slope(self):
        pos = AsymptoticLaw("power", "position", "predicted", coefficient=1.0, exponent=1.0)
        law = predict_period_law(
            ComponentClass.polycycle(0.7), ComponentClass.fold(2), pos,
            {"upper": ModelFlight("log", T0=1.0, sign=1),
             "lower": ModelFlight("power", T0=2.0, sign=-1, exponent=1.0)},
            maps={"upper": (-1.0, 0.7), "lower": (-1.0, 1.0)})
        assert law.family == "log"
        assert law.T0 == pytest.approx(1.0 / 0.7)

    def test_polycycle_pair_slope(self):
        pos = AsymptoticLaw("power", "position", "predicted", coefficient=1.0, exponent=0.8)
        law = predict_period_law(
            ComponentClass.polycycle(1.4), ComponentClass.polycycle(1.25), pos,
            {"upper": ModelFlight("log", T0=1.0, sign=-1),
             "lower": ModelFlight("log", T0=1.0, sign=1)})
        assert law.T0 == pytest.approx(1.6)

    def test_fold_fold_vanishing(self):
        law = predict_period_law(
            ComponentClass.fold(2), ComponentClass.fold(2), self.POS_HALF,
            {"upper": ModelFlight("power", T0=2.0, sign=1, exponent=1.0),
             "lower": ModelFlight("power", T0=2.0, sign=-1, exponent=1.0)})
        assert law.family == "power"
        assert law.coefficient == pytest.approx(4.0 * math.sqrt(2.0))
        assert law.exponent == pytest.approx(0.5)

    def test_constants_add(self):
        pos = AsymptoticLaw("power", "position", "predicted", coefficient=1.0, exponent=1.0)
        law = predict_period_law(
            ComponentClass.efocus(), ComponentClass.efocus(), pos,
            {"upper": ModelFlight("constant", T0=math.pi, sign=1),
             "lower": ModelFlight("constant", T0=math.pi, sign=-1)})
        assert law.family == "constant"
        assert law.T0 == pytest.approx(2.0 * math.pi)


def test_measure_displacement_leading():
    xs = np.geomspace(3e-4, 3e-3, 12)
    vals = -xs ** 2 - xs ** 3
    lead = asym.measure_displacement_leading(xs, vals)
    assert lead.exponent == 2.0
    assert lead.V == pytest.approx(-1.0, abs=1e-3)
