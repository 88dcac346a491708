import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import pseudohopf as ph
from pseudohopf import returns
from pseudohopf.errors import ClassificationError, ConfigError
from pseudohopf.fields import (
    ComponentClass,
    PlanarField,
    classify_component,
    eval_field,
    make_builtin,
    poly_eval,
    system_from_json,
    system_to_json,
    validate_h1,
)
from pseudohopf.flow import invariant_drift, flow_to_section, DEFAULT_LIMITS


def test_eval_field_examples():
    f = PlanarField(((-1.0,),), ((0.0,), (2.0,)))
    assert eval_field(f, (0.5, 0.0)) == (-1.0, 1.0)
    f = PlanarField(((0.0, -1.0),), ((0.0,), (0.0,), (0.0,), (1.0,)))
    assert eval_field(f, (1.0, 0.0)) == (0.0, 1.0)
    f = PlanarField(((1.0, -1.0),), ((0.0,), (1.0,)))
    assert eval_field(f, (0.0, 0.0)) == (1.0, 0.0)


def test_table_validation():
    with pytest.raises(ConfigError):
        PlanarField(((1.0,), (2.0, 3.0)), ((0.0,),))  # ragged
    with pytest.raises(ConfigError):
        PlanarField(((float("nan"),),), ((0.0,),))
    f = PlanarField(((0.0, -1.0),), ((0.0,), (0.0,), (0.0,), (1.0,)))
    assert f.max_degree == 3
    assert hash(f) == hash(PlanarField(((0.0, -1.0),), ((0.0,), (0.0,), (0.0,), (1.0,))))


@given(
    st.lists(st.lists(st.floats(-3, 3), min_size=1, max_size=3), min_size=1, max_size=4),
    st.floats(-2, 2),
    st.floats(-2, 2),
)
@settings(max_examples=200, deadline=None)
def test_poly_eval_matches_naive(rows, x, y):
    width = max(len(r) for r in rows)
    table = tuple(tuple(r[j] if j < len(r) else 0.0 for j in range(width)) for r in rows)
    naive = sum(c * x ** i * y ** j for i, row in enumerate(table) for j, c in enumerate(row))
    assert poly_eval(table, x, y) == pytest.approx(naive, rel=1e-12, abs=1e-12)


class TestClassification:
    def test_fold_valid(self):
        f = PlanarField(((-1.0,),), ((0.0,), (2.0,)))
        out = classify_component(f, ComponentClass.fold(2))
        assert out.validated == "checked"

    def test_fold_lower_side(self):
        f = PlanarField(((1.0,),), ((0.0,), (2.0,)))
        assert classify_component(f, ComponentClass.fold(2), side="lower").validated == "checked"
        with pytest.raises(ClassificationError):
            classify_component(f, ComponentClass.fold(2), side="upper")

    def test_efocus_valid(self):
        f = PlanarField(((0.0, -1.0), (0.1, 0.0)), ((0.0, 0.1), (1.0, 0.0)))
        assert classify_component(f, ComponentClass.efocus()).validated == "checked"

    def test_fold_declared_efocus_fails(self):
        f = PlanarField(((-1.0,),), ((0.0,), (2.0,)))
        with pytest.raises(ClassificationError):
            classify_component(f, ComponentClass.efocus())

    def test_nfocus_and_cusp(self):
        nf = PlanarField(((0.0, -1.0),), ((0.0,), (0.0,), (0.0,), (1.0,)))
        assert classify_component(nf, ComponentClass.nfocus(2)).validated == "checked"
        cusp = PlanarField(((0.0, 0.0, -1.0),), ((0.0,), (1.0,)))
        assert classify_component(cusp, ComponentClass.cusp(1)).validated == "checked"
        bad = PlanarField(((0.0, 0.0, 1.0),), ((0.0,), (1.0,)))  # wrong orientation
        with pytest.raises(ClassificationError):
            classify_component(bad, ComponentClass.cusp(1))

    def test_global_kinds_unchecked(self):
        f = PlanarField(((1.0, -1.0),), ((0.0,), (1.0,)))
        out = classify_component(f, ComponentClass.periodic_orbit(2))
        assert out.validated == "unchecked"


class TestComponentClassInvariants:
    def test_fold_multiplicity(self):
        with pytest.raises(ConfigError):
            ComponentClass.fold(3)
        with pytest.raises(ConfigError):
            ComponentClass.fold(0)

    def test_nfocus_case_ii(self):
        ComponentClass.nfocus(2, case="ii", a=1.0, b=0.5, beta=1)
        with pytest.raises(ConfigError):
            ComponentClass.nfocus(2, case="ii", a=1.0, b=4.0, beta=1)  # b^2-4an >= 0
        with pytest.raises(ConfigError):
            ComponentClass.nfocus(1)

    def test_polycycle_r(self):
        with pytest.raises(ConfigError):
            ComponentClass.polycycle(-0.5)


def test_make_builtin_errors():
    with pytest.raises(ConfigError):
        make_builtin("nope")
    with pytest.raises(ConfigError):
        make_builtin("fold_fold_sym", eps=0.1)


def test_gallery_h1_validation(gallery):
    for name in ph.gallery_names():
        validate_h1(gallery(name))


def test_gallery_first_integral_drift(gallery):
    # nfocus upper conserves y^2/2 + x^4/4; cusp conserves x^2/2 + y^3/3;
    # the broken fold lower conserves y - x^2 - x^3
    for name in ("nfocus_fold", "cusp_fold", "fold_fold_broken", "circle_orbit_fold"):
        system = gallery(name)
        for side in ("upper", "lower"):
            comp = system.component(side)
            if getattr(comp, "first_integral", None) is None:
                continue
            for x in (1e-3, 1e-2, 1e-1):
                floor, top = system.x_window
                if not floor < x < top:
                    continue
                data = returns.half_return(system, side, x)
                start = (x, 0.0)
                hit_pt = (data.phi, 0.0)
                h0 = poly_eval(comp.first_integral, *start)
                h1 = poly_eval(comp.first_integral, *hit_pt)
                assert abs(h1 - h0) <= 1e-8 * max(1.0, abs(h0))


def test_efocus_trace_by_construction(gallery):
    system = gallery("efocus_fold")
    f = system.upper.field
    assert f.jet("p", 1, 0) + f.jet("q", 0, 1) == pytest.approx(0.2)


def test_fold_fold_sym_is_center(gallery):
    system = gallery("fold_fold_sym")
    for x in (1e-3, 1e-2, 1e-1):
        up = returns.half_return(system, "upper", x)
        dn = returns.half_return(system, "lower", x)
        assert abs(up.phi - dn.phi) <= 1e-9


def test_nfocus_reversible_orbit(gallery):
    system = gallery("nfocus_fold")
    hit = flow_to_section(system.upper.field, (0.1, 0.0), "upper", "forward", DEFAULT_LIMITS)
    assert hit.point[0] == pytest.approx(-0.1, abs=1e-8)


class TestJson:
    def test_flow_system_round_trip(self, gallery):
        system = gallery("fold_fold_broken")
        data = system_to_json(system)
        back = system_from_json(data)
        assert back.upper.field == system.upper.field
        assert back.lower.field == system.lower.field
        assert back.x_window == system.x_window

    def test_model_system_round_trip(self, gallery):
        system = gallery("model_polycycle_polycycle")
        back = system_from_json(system_to_json(system))
        assert back.upper.phi == system.upper.phi
        assert back.lower.tau == system.lower.tau

    def test_bad_descriptors(self):
        with pytest.raises(ConfigError):
            system_from_json({"upper": {"backend": "nope"}, "lower": {}})
        with pytest.raises(ConfigError):
            system_from_json({"lower": {}})
