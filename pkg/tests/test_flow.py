import math

import pytest
from scipy.integrate import quad

from pseudohopf.errors import (
    HalfPlaneViolation,
    StepCapExceeded,
    TimeCapExceeded,
    WrongLaunchDirection,
)
from pseudohopf.fields import PlanarField
from pseudohopf.flow import DEFAULT_LIMITS, IntegrationLimits, flow_to_section, invariant_drift

FOLD_UP = PlanarField(((-1.0,),), ((0.0,), (2.0,)))
CIRCLE = PlanarField(((1.0, -1.0),), ((0.0,), (1.0,)))
NFOCUS = PlanarField(((0.0, -1.0),), ((0.0,), (0.0,), (0.0,), (1.0,)))
CUSP = PlanarField(((0.0, 0.0, -1.0),), ((0.0,), (1.0,)))

T_STAR = math.sqrt(2.0) * 2.0 * quad(lambda u: 1.0 / math.sqrt(1.0 - u ** 4), 0.0, 1.0,
                                     epsabs=1e-14, epsrel=1e-13)[0]
CIRCLE_LIMITS = IntegrationLimits(rel_tol=1e-12, abs_tol=1e-13, event_tol=1e-13)


def test_fold_parabola_exact():
    hit = flow_to_section(FOLD_UP, (0.1, 0.0), "upper", "forward", DEFAULT_LIMITS)
    assert hit.point[0] == pytest.approx(-0.1, abs=1e-10)
    assert hit.time == pytest.approx(0.2, abs=1e-10)
    assert hit.y_residual <= DEFAULT_LIMITS.event_tol


def test_circle_rotation_time():
    hit = flow_to_section(CIRCLE, (0.2, 0.0), "upper", "forward", CIRCLE_LIMITS)
    assert hit.time == pytest.approx(2.0 * math.pi - 2.0 * math.atan(0.2), abs=1e-8)
    assert hit.point[0] == pytest.approx(-0.2, abs=1e-8)


def test_nfocus_scaling_time():
    hit = flow_to_section(NFOCUS, (0.1, 0.0), "upper", "forward", DEFAULT_LIMITS)
    assert hit.time == pytest.approx(T_STAR / 0.1, rel=1e-8)
    assert hit.point[0] == pytest.approx(-0.1, abs=1e-9)


@pytest.mark.parametrize(
    "field,H",
    [
        (NFOCUS, ((0.0, 0.0, 0.5), (0.0,) * 3, (0.0,) * 3, (0.0,) * 3, (0.25, 0.0, 0.0))),
        (CUSP, ((0.0, 0.0, 0.0, 1.0 / 3.0), (0.0,) * 4, (0.5, 0.0, 0.0, 0.0))),
        (FOLD_UP, ((0.0, 1.0), (0.0, 0.0), (1.0, 0.0))),
    ],
)
def test_invariant_drift(field, H):
    hit = flow_to_section(field, (0.1, 0.0), "upper", "forward", DEFAULT_LIMITS)
    assert invariant_drift(field, H, hit, (0.1, 0.0)) <= 1e-8


def test_convergence_under_tolerance_halving():
    for field, half in ((FOLD_UP, "upper"), (NFOCUS, "upper"), (CUSP, "upper")):
        coarse = IntegrationLimits(rel_tol=2e-10, abs_tol=2e-12, event_tol=1e-12)
        fine = IntegrationLimits(rel_tol=1e-10, abs_tol=1e-12, event_tol=1e-12)
        a = flow_to_section(field, (0.1, 0.0), half, "forward", coarse)
        b = flow_to_section(field, (0.1, 0.0), half, "forward", fine)
        assert abs(a.point[0] - b.point[0]) < 10.0 * coarse.rel_tol


def test_time_direction_antisymmetry():
    for field in (FOLD_UP, NFOCUS, CUSP):
        fwd = flow_to_section(field, (0.1, 0.0), "upper", "forward", DEFAULT_LIMITS)
        back = flow_to_section(field, (fwd.point[0], 0.0), "upper", "backward", DEFAULT_LIMITS)
        assert back.point[0] == pytest.approx(0.1, abs=1e-8)
        assert back.time == pytest.approx(-fwd.time, abs=1e-8)


@pytest.mark.parametrize("x", [1e-3, 1e-2, 1e-1])
def test_reversible_fields_return_mirrored(x):
    for field, limits in ((FOLD_UP, DEFAULT_LIMITS), (NFOCUS, DEFAULT_LIMITS),
                          (CUSP, DEFAULT_LIMITS), (CIRCLE, CIRCLE_LIMITS)):
        hit = flow_to_section(field, (x, 0.0), "upper", "forward", limits)
        assert abs(hit.point[0] + x) <= 1e-7


def test_wrong_launch_direction():
    with pytest.raises(WrongLaunchDirection):
        flow_to_section(FOLD_UP, (0.1, 0.0), "lower", "forward", DEFAULT_LIMITS)
    with pytest.raises(WrongLaunchDirection):
        flow_to_section(FOLD_UP, (0.1, 0.0), "upper", "backward", DEFAULT_LIMITS)


def test_launch_collar_rejects_tangency_zone():
    # a fold orbit from x only reaches |y| = x^2; below the collar it cannot arm
    with pytest.raises(HalfPlaneViolation):
        flow_to_section(FOLD_UP, (1e-7, 0.0), "upper", "forward", DEFAULT_LIMITS)


def test_time_cap():
    limits = IntegrationLimits(t_max=1.0)
    with pytest.raises(TimeCapExceeded):
        flow_to_section(NFOCUS, (0.05, 0.0), "upper", "forward", limits)  # needs ~74


def test_step_cap():
    limits = IntegrationLimits(rel_tol=1e-12, abs_tol=1e-13, event_tol=1e-13, max_steps=10)
    with pytest.raises(StepCapExceeded):
        flow_to_section(CIRCLE, (0.2, 0.0), "upper", "forward", limits)


def test_limit_validation():
    with pytest.raises(Exception):
        IntegrationLimits(rel_tol=-1.0)
    with pytest.raises(Exception):
        IntegrationLimits(event_tol=1e-10, abs_tol=1e-12)  # event above abs


def test_start_off_section_rejected():
    with pytest.raises(ValueError):
        flow_to_section(FOLD_UP, (0.1, 0.5), "upper", "forward", DEFAULT_LIMITS)
