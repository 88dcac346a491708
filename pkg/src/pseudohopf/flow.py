"""Event-detected integration from the switching line back to itself.

The integrator is a fixed choice: the Dormand-Prince embedded 5(4) pair
with its free quartic interpolant. The section event (y = 0) is localized
by a bracketed root-finder (bisection refined by inverse quadratic
interpolation) on the dense output of the step that crosses, terminating
when |y| <= event_tol.

A launch collar resolves the start-on-section degeneracy: event detection
arms only after |y| first exceeds 2*event_tol. Orbits whose |y| never
clears the collar (starts too close to a tangency for the configured
event_tol) raise HalfPlaneViolation; callers that scan grids treat such
points as unavailable rather than fatal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from .errors import (
    ConfigError,
    FlowError,
    HalfPlaneViolation,
    StepCapExceeded,
    TimeCapExceeded,
    WrongLaunchDirection,
)
from .fields import Coeffs, PlanarField, poly_eval

__all__ = [
    "IntegrationLimits",
    "SectionHit",
    "DEFAULT_LIMITS",
    "flow_to_section",
    "invariant_drift",
]


@dataclass(frozen=True)
class IntegrationLimits:
    """Accuracy and budget knobs for one half-return integration."""

    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    t_max: float = 1e6
    max_steps: int = 200_000
    event_tol: float = 1e-12

    def __post_init__(self):
        if min(self.rel_tol, self.abs_tol, self.t_max, self.event_tol) <= 0.0 or self.max_steps <= 0:
            raise ConfigError("integration limits must all be positive")
        if self.event_tol > self.abs_tol:
            raise ConfigError("event_tol must not exceed abs_tol")


DEFAULT_LIMITS = IntegrationLimits()


@dataclass(frozen=True)
class SectionHit:
    """First return to y=0: landing point, signed flight time, and diagnostics."""

    point: tuple[float, float]
    time: float
    steps: int
    y_residual: float
    y_min: float = 0.0
    y_max: float = 0.0


# Dormand-Prince 5(4) tableau
_C2, _C3, _C4, _C5 = 0.2, 0.3, 0.8, 8.0 / 9.0
_A21 = 0.2
_A31, _A32 = 3.0 / 40.0, 9.0 / 40.0
_A41, _A42, _A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
_A51, _A52, _A53, _A54 = 19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0
_A61, _A62, _A63, _A64, _A65 = (9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0,
                                49.0 / 176.0, -5103.0 / 18656.0)
_B1, _B3, _B4, _B5, _B6 = 35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0
_E1, _E3, _E4, _E5, _E6, _E7 = (71.0 / 57600.0, -71.0 / 16695.0, 71.0 / 1920.0,
                                -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0)

# quartic interpolant columns: theta-polynomial coefficients per stage
_P1 = (1.0, -8048581381.0 / 2820520608.0, 8663915743.0 / 2820520608.0,
       -12715105075.0 / 11282082432.0)
_P3 = (0.0, 131558114200.0 / 32700410799.0, -68118460800.0 / 10900136933.0,
       87487479700.0 / 32700410799.0)
_P4 = (0.0, -1754552775.0 / 470086768.0, 14199869525.0 / 1410260304.0,
       -10690763975.0 / 1880347072.0)
_P5 = (0.0, 127303824393.0 / 49829197408.0, -318862633887.0 / 49829197408.0,
       701980252875.0 / 199316789632.0)
_P6 = (0.0, -282668133.0 / 205662961.0, 2019193451.0 / 616988883.0,
       -1453857185.0 / 822651844.0)
_P7 = (0.0, 40617522.0 / 29380423.0, -110615467.0 / 29380423.0, 69997945.0 / 29380423.0)


# dense-output subsamples per accepted step; crossings closer together than
# |h|/_N_SUBSAMPLES (a near-tangency of the orbit with the section) are the
# documented blind spot of the detector
_N_SUBSAMPLES = 16


@lru_cache(maxsize=512)
def _compiled_rhs(field: PlanarField):
    return field.rhs()


def _initial_step(f, x0, y0, fx0, fy0, h_sign, rel_tol, abs_tol):
    """Cheap two-sample step-size guess in the spirit of Hairer/Wanner."""
    sx = abs_tol + rel_tol * abs(x0)
    sy = abs_tol + rel_tol * abs(y0)
    d0 = math.hypot(x0 / sx, y0 / sy)
    d1 = math.hypot(fx0 / sx, fy0 / sy)
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    x1 = x0 + h_sign * h0 * fx0
    y1 = y0 + h_sign * h0 * fy0
    fx1, fy1 = f(x1, y1)
    d2 = math.hypot((fx1 - fx0) / sx, (fy1 - fy0) / sy) / h0
    dm = max(d1, d2)
    h1 = max(1e-6, h0 * 1e-3) if dm <= 1e-15 else (0.01 / dm) ** 0.2
    return min(100.0 * h0, h1)


def _dense_y(theta, y0, h, k1y, k3y, k4y, k5y, k6y, k7y):
    """Quartic interpolant for the y component at fraction theta of the step."""
    q1 = theta * (_P1[0] + theta * (_P1[1] + theta * (_P1[2] + theta * _P1[3])))
    q3 = theta * theta * (_P3[1] + theta * (_P3[2] + theta * _P3[3]))
    q4 = theta * theta * (_P4[1] + theta * (_P4[2] + theta * _P4[3]))
    q5 = theta * theta * (_P5[1] + theta * (_P5[2] + theta * _P5[3]))
    q6 = theta * theta * (_P6[1] + theta * (_P6[2] + theta * _P6[3]))
    q7 = theta * theta * (_P7[1] + theta * (_P7[2] + theta * _P7[3]))
    return y0 + h * (k1y * q1 + k3y * q3 + k4y * q4 + k5y * q5 + k6y * q6 + k7y * q7)


def _dense_x(theta, x0, h, k1x, k3x, k4x, k5x, k6x, k7x):
    q1 = theta * (_P1[0] + theta * (_P1[1] + theta * (_P1[2] + theta * _P1[3])))
    q3 = theta * theta * (_P3[1] + theta * (_P3[2] + theta * _P3[3]))
    q4 = theta * theta * (_P4[1] + theta * (_P4[2] + theta * _P4[3]))
    q5 = theta * theta * (_P5[1] + theta * (_P5[2] + theta * _P5[3]))
    q6 = theta * theta * (_P6[1] + theta * (_P6[2] + theta * _P6[3]))
    q7 = theta * theta * (_P7[1] + theta * (_P7[2] + theta * _P7[3]))
    return x0 + h * (k1x * q1 + k3x * q3 + k4x * q4 + k5x * q5 + k6x * q6 + k7x * q7)


def _bracket_root(g, lo, hi, glo, ghi, tol):
    """Bisection refined by inverse quadratic interpolation on a sign change.

    Terminates once |g| <= tol AND the bracket is tight in the argument:
    on shallow (grazing) crossings, |g| <= tol alone would leave the
    crossing time uncertain by tol/|g'|, which downstream displacement
    scans would see as noise.
    """
    a, b, fa, fb = lo, hi, glo, ghi
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    c, fc = a, fa
    best_t, best_g = (a, abs(fa)) if abs(fa) < abs(fb) else (b, abs(fb))
    for _ in range(160):
        if abs(b - a) <= 1e-14 and best_g <= tol:
            break
        mid = 0.5 * (a + b)
        cand = None
        if fa != fb and fb != fc and fa != fc:
            cand = (a * fb * fc / ((fa - fb) * (fa - fc))
                    + b * fa * fc / ((fb - fa) * (fb - fc))
                    + c * fa * fb / ((fc - fa) * (fc - fb)))
        t = cand if cand is not None and min(a, b) < cand < max(a, b) else mid
        ft = g(t)
        if abs(ft) < best_g:
            best_t, best_g = t, abs(ft)
        if ft == 0.0:
            return t
        c, fc = b, fb
        if (fa > 0.0) != (ft > 0.0):
            b, fb = t, ft
        else:
            a, fa = t, ft
    return best_t


def flow_to_section(field: PlanarField, start: tuple[float, float], half: str,
                    direction: str, limits: IntegrationLimits = DEFAULT_LIMITS) -> SectionHit:
    """Carry (x, 0) through one half-plane back to y=0 in the given time direction.

    Parameters
    ----------
    field : PlanarField
        The component vector field, in its own frame.
    start : (x, 0)
        Launch point on the switching line.
    half : 'upper' or 'lower'
        Closed half-plane the orbit must stay in.
    direction : 'forward' or 'backward'
        Time direction; the returned time is signed accordingly.
    limits : IntegrationLimits

    Raises
    ------
    WrongLaunchDirection
        Q(start) pushes the orbit out of the requested half-plane for this
        time direction (the caller should try the other direction).
    HalfPlaneViolation, TimeCapExceeded, StepCapExceeded
    """
    if half not in ("upper", "lower"):
        raise ValueError(f"half must be 'upper' or 'lower', got {half!r}")
    if direction not in ("forward", "backward"):
        raise ValueError(f"direction must be 'forward' or 'backward', got {direction!r}")
    x0, ystart = float(start[0]), float(start[1])
    if abs(ystart) > limits.event_tol:
        raise ValueError("start point must lie on the switching line y=0")

    f = _compiled_rhs(field)
    half_sign = 1.0 if half == "upper" else -1.0
    dir_sign = 1.0 if direction == "forward" else -1.0

    fx0, fy0 = f(x0, 0.0)
    if fy0 * dir_sign * half_sign <= 0.0:
        raise WrongLaunchDirection(
            f"Q({x0:g}, 0) = {fy0:g} does not enter the {half} half-plane going {direction}")

    rel, atol, event_tol = limits.rel_tol, limits.abs_tol, limits.event_tol
    collar = 2.0 * event_tol

    h = dir_sign * _initial_step(f, x0, 0.0, fx0, fy0, dir_sign, rel, atol)
    t = 0.0
    x, y = x0, 0.0
    k1x, k1y = fx0, fy0
    armed = False
    y_min = y_max = 0.0
    steps = 0

    while True:
        if steps >= limits.max_steps:
            raise StepCapExceeded(f"no section return within {limits.max_steps} accepted steps")
        # stage evaluations
        k2x, k2y = f(x + h * _A21 * k1x, y + h * _A21 * k1y)
        k3x, k3y = f(x + h * (_A31 * k1x + _A32 * k2x), y + h * (_A31 * k1y + _A32 * k2y))
        k4x, k4y = f(x + h * (_A41 * k1x + _A42 * k2x + _A43 * k3x),
                     y + h * (_A41 * k1y + _A42 * k2y + _A43 * k3y))
        k5x, k5y = f(x + h * (_A51 * k1x + _A52 * k2x + _A53 * k3x + _A54 * k4x),
                     y + h * (_A51 * k1y + _A52 * k2y + _A53 * k3y + _A54 * k4y))
        k6x, k6y = f(x + h * (_A61 * k1x + _A62 * k2x + _A63 * k3x + _A64 * k4x + _A65 * k5x),
                     y + h * (_A61 * k1y + _A62 * k2y + _A63 * k3y + _A64 * k4y + _A65 * k5y))
        xn = x + h * (_B1 * k1x + _B3 * k3x + _B4 * k4x + _B5 * k5x + _B6 * k6x)
        yn = y + h * (_B1 * k1y + _B3 * k3y + _B4 * k4y + _B5 * k5y + _B6 * k6y)
        k7x, k7y = f(xn, yn)

        ex = h * (_E1 * k1x + _E3 * k3x + _E4 * k4x + _E5 * k5x + _E6 * k6x + _E7 * k7x)
        ey = h * (_E1 * k1y + _E3 * k3y + _E4 * k4y + _E5 * k5y + _E6 * k6y + _E7 * k7y)
        sx = atol + rel * max(abs(x), abs(xn))
        sy = atol + rel * max(abs(y), abs(yn))
        err = math.sqrt(0.5 * ((ex / sx) ** 2 + (ey / sy) ** 2))

        if err > 1.0:
            h *= max(0.2, 0.9 * err ** -0.2)
            if t + h == t:
                raise StepCapExceeded("step size underflow during error control")
            continue

        steps += 1
        tn = t + h
        y_min = min(y_min, yn)
        y_max = max(y_max, yn)

        # Walk the dense output through the step: error control lets steps
        # grow huge on (near-)polynomial solutions, so a single step can
        # contain the excursion and the return; endpoint signs alone are
        # not a reliable crossing detector.
        def g(theta):
            return half_sign * _dense_y(theta, y, h, k1y, k3y, k4y, k5y, k6y, k7y)

        prev_theta, prev_sy = 0.0, half_sign * y
        event_theta = None
        for j in range(1, _N_SUBSAMPLES + 1):
            theta = j / _N_SUBSAMPLES
            sy = half_sign * yn if j == _N_SUBSAMPLES else g(theta)
            if not armed:
                if sy >= collar:
                    armed = True
                elif sy <= -collar:
                    raise HalfPlaneViolation(
                        f"orbit left the {half} half-plane before clearing the launch collar "
                        f"(start x={x0:g}); start too close to a tangency for "
                        f"event_tol={event_tol:g}")
            elif sy <= 0.0:
                event_theta = _bracket_root(g, prev_theta, theta, prev_sy, sy, event_tol)
                break
            prev_theta, prev_sy = theta, sy

        if event_theta is not None:
            y_e = _dense_y(event_theta, y, h, k1y, k3y, k4y, k5y, k6y, k7y)
            x_e = _dense_x(event_theta, x, h, k1x, k3x, k4x, k5x, k6x, k7x)
            t_e = t + event_theta * h
            if t_e == 0.0:
                raise HalfPlaneViolation("event localized at zero flight time")
            return SectionHit(point=(x_e, 0.0), time=t_e, steps=steps,
                              y_residual=abs(y_e), y_min=y_min, y_max=y_max)

        if abs(tn) > limits.t_max:
            raise TimeCapExceeded(
                f"|t| exceeded t_max={limits.t_max:g} before returning to the section")

        t, x, y = tn, xn, yn
        k1x, k1y = k7x, k7y  # FSAL
        h *= min(10.0, max(0.2, 0.9 * err ** -0.2 if err > 0.0 else 10.0))

        # Grazing guard: returns tangent to the section (periodic-orbit
        # components) dip below y=0 by O(x^2) over a time window O(x) that
        # neither error control nor the interpolant resolves. When the
        # orbit heads toward the section, cap the step at ~the linear
        # time-to-section so the crossing lands inside a resolvable step.
        if armed:
            approach = -half_sign * k1y * dir_sign
            if approach > 0.0:
                t_hit = half_sign * y / (approach)
                if 1.25 * t_hit < abs(h):
                    h = dir_sign * max(1.25 * t_hit, 1e-3 * abs(h))


def invariant_drift(field: PlanarField, H: Coeffs, hit: SectionHit,
                    start: tuple[float, float]) -> float:
    """|H(hit.point) - H(start)| for a declared first integral H (test instrumentation)."""
    del field  # the drift is a property of the computed endpoints alone
    return abs(poly_eval(H, hit.point[0], hit.point[1]) - poly_eval(H, start[0], start[1]))
