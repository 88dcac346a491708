"""Sign data, displacement function, and crossing-cycle location for the family.

The displacement of the translated family is

    Delta(x, b) = delta * (phi_up(x - b) + b - phi_down(x)),

whose zeros with x > max(0, b) are crossing periodic orbits. The sign
triple (delta, sigma, mu = -sigma*delta) decides which sign of b produces
the cycle; the finder scans a geometric abscissa grid for the first sign
change of Delta and refines it with a bracketed derivative-free root
finder (Delta is only continuous at Dulac exponents).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq

from .errors import (
    DegenerateCenter,
    FlowError,
    ModelBackendUnavailable,
    NoSignChange,
    NotSliding,
    SignInstability,
)
from .fields import FlowComponent, PiecewiseSystem
from .returns import half_return, noise_floor

__all__ = [
    "SignTriple",
    "orientation",
    "CycleRecord",
    "SlidingSegment",
    "sign_data",
    "displacement",
    "find_crossing_cycle",
    "cycle_period",
    "sliding_segment",
]

_ROOT_RTOL = 4.0 * np.finfo(float).eps


@dataclass(frozen=True)
class SignTriple:
    """Orientation delta, fixed-point stability sigma, and mu = -sigma*delta."""

    delta: int
    sigma: int
    mu: int

    def __post_init__(self):
        if self.delta not in (-1, 1) or self.sigma not in (-1, 1):
            raise ValueError("delta and sigma must be +-1")
        if self.mu != -self.sigma * self.delta:
            raise ValueError("mu must equal -sigma*delta")


@dataclass(frozen=True)
class CycleRecord:
    """A located crossing cycle of the family at one parameter value."""

    b: float
    x_star: float
    period: float
    stability: str                      # 'stable' | 'unstable'
    delta_residual: float
    bracket: tuple[float, float]
    extra_roots: tuple[float, ...] = ()  # further sign changes seen on the grid

    def __post_init__(self):
        if not self.x_star > max(0.0, self.b):
            raise ValueError("cycle must satisfy x_star > max(0, b)")
        if not self.period > 0.0:
            raise ValueError("period must be positive")

    def csv_row(self) -> str:
        cells = (self.b, self.x_star, self.period)
        nums = ",".join(format(v, ".17g") for v in cells)
        return f"{nums},{self.stability},{format(self.delta_residual, '.17g')}"


@dataclass(frozen=True)
class SlidingSegment:
    interval: tuple[float, float]
    attractivity: str  # 'attracting' | 'repelling'


def _delta_sign(system: PiecewiseSystem, x: float) -> int:
    up = half_return(system, "upper", x)
    dn = half_return(system, "lower", x)
    if up.tau < 0.0 < dn.tau:
        return 1
    if dn.tau < 0.0 < up.tau:
        return -1
    raise SignInstability(f"flight times do not oppose at x={x:g}")


@lru_cache(maxsize=4096)
def orientation(system: PiecewiseSystem) -> int:
    """delta alone: +1 for clockwise rotation of the section orbits, -1 otherwise.

    Well defined even for centers, unlike the full sign triple.
    """
    floor, top = system.x_window
    return _delta_sign(system, math.sqrt(floor * top))


@lru_cache(maxsize=4096)
def sign_data(system: PiecewiseSystem) -> SignTriple:
    """Evaluate (delta, sigma, mu) with a three-probe sign-stability check.

    Probes sit at the geometric mean of the window endpoints and a factor
    of 8 to each side. A displacement smaller than provider noise at every
    probe raises DegenerateCenter (the unperturbed pairing is a center);
    disagreeing signs raise SignInstability.
    """
    floor, top = system.x_window
    mid = math.sqrt(floor * top)
    probes = [p for p in (mid / 8.0, mid, mid * 8.0) if floor < p < top]

    delta = orientation(system)
    sigmas = []
    for x in probes:
        if _delta_sign(system, x) != delta:
            raise SignInstability("orientation flips across probes; window too large")
        up = half_return(system, "upper", x)
        dn = half_return(system, "lower", x)
        d0 = delta * (up.phi - dn.phi)
        noise = 10.0 * (noise_floor(system, "upper", x, up.phi)
                        + noise_floor(system, "lower", x, dn.phi))
        if abs(d0) <= noise:
            sigmas.append(0)
        else:
            sigmas.append(1 if d0 > 0.0 else -1)
    if all(s == 0 for s in sigmas):
        raise DegenerateCenter("displacement vanishes within noise at all probes (center)")
    nonzero = [s for s in sigmas if s != 0]
    if any(s != nonzero[0] for s in nonzero):
        raise SignInstability(f"displacement sign varies across probes: {sigmas}")
    sigma = nonzero[0]
    return SignTriple(delta=delta, sigma=sigma, mu=-sigma * delta)


def displacement(system: PiecewiseSystem, x: float, b: float) -> float:
    """delta * (phi_up(x - b) + b - phi_down(x)); domain x in (max(0,b), x0+min(0,b))."""
    return _displacement_known_delta(system, x, b, orientation(system))


def _displacement_known_delta(system, x, b, delta):
    up = half_return(system, "upper", x - b)
    dn = half_return(system, "lower", x)
    return delta * (up.phi + b - dn.phi)


def _scan_grid(system: PiecewiseSystem, b: float, ratio: float, min_points: int):
    """Geometric offsets u above max(0, b), covering the displacement domain."""
    floor, top = system.x_window
    left = max(0.0, b)
    span = min(top, top + b) - left
    if span <= floor:
        return left, []
    count = max(min_points, int(math.ceil(math.log(span / floor) / math.log(ratio))) + 1)
    return left, [floor * ratio ** k for k in range(count) if floor * ratio ** k < span]


def find_crossing_cycle(system: PiecewiseSystem, b: float, *,
                        grid_ratio: float = 1.05, min_points: int = 200) -> CycleRecord:
    """Locate the crossing cycle of the family at parameter b.

    Scans Delta(., b) left to right on a geometric grid starting at
    max(0, b) + x_floor; the first sign change is refined to a root.
    Grid points whose half-returns fail (flight-time blow-up, launch
    collar) are skipped and do not abort the scan. Additional sign
    changes further right are reported on the record, not raised:
    uniqueness is an asymptotic statement, the tool surfaces what it sees.

    Raises NoSignChange when Delta keeps one sign over all evaluable
    points; for mu*b < 0 that is the expected, theorem-conformant outcome.
    """
    delta = orientation(system)
    left, offsets = _scan_grid(system, b, grid_ratio, min_points)

    prev_x = prev_val = None
    bracket = None
    extra = []
    n_eval = n_fail = 0
    last_err: Exception | None = None
    for u in offsets:
        x = left + u
        if x - b <= 0.0 or x <= 0.0:
            continue  # offset absorbed by floating point next to max(0, b)
        try:
            val = _displacement_known_delta(system, x, b, delta)
        except FlowError as exc:
            n_fail += 1
            last_err = exc
            continue
        n_eval += 1
        if prev_val is not None and (val == 0.0 or (val > 0.0) != (prev_val > 0.0)):
            if bracket is None:
                bracket = (prev_x, x, prev_val, val)
            else:
                extra.append(x)
        prev_x, prev_val = x, val

    if bracket is None:
        if n_eval == 0 and last_err is not None:
            raise last_err
        raise NoSignChange(
            f"displacement keeps one sign over {n_eval} grid points at b={b:g}",
            b=b, n_evaluated=n_eval, n_failed=n_fail)

    lo, hi, f_lo, f_hi = bracket
    x_star = float(brentq(lambda xx: _displacement_known_delta(system, float(xx), b, delta),
                          lo, hi, xtol=1e-300, rtol=_ROOT_RTOL, maxiter=200))
    resid = abs(_displacement_known_delta(system, x_star, b, delta))
    stability = "stable" if f_lo > 0.0 > f_hi else "unstable"
    period = cycle_period(system, b, x_star)

    refined_extra = []
    for x_hint in extra:
        refined_extra.append(x_hint)
    return CycleRecord(b=b, x_star=x_star, period=period, stability=stability,
                       delta_residual=resid, bracket=(lo, hi),
                       extra_roots=tuple(refined_extra))


def cycle_period(system: PiecewiseSystem, b: float, x_star: float) -> float:
    """|tau_up(x_star - b)| + |tau_down(x_star)|.

    The upper flight is evaluated at the entry abscissa in the upper
    field's own frame, x_star - b, so the value is exact for the perturbed
    cycle rather than a leading-order expression.
    """
    up = half_return(system, "upper", x_star - b)
    dn = half_return(system, "lower", x_star)
    return abs(up.tau) + abs(dn.tau)


def sliding_segment(system: PiecewiseSystem, b: float) -> SlidingSegment:
    """Classify the segment between (0,0) and (b,0) by the midpoint normal velocities.

    Requires flow-backed sides (model maps carry no vector field off the
    section). Attracting means both fields point toward the segment.
    """
    if b == 0.0:
        raise ValueError("sliding segment requires b != 0")
    upper, lower = system.upper, system.lower
    if not isinstance(upper, FlowComponent) or not isinstance(lower, FlowComponent):
        raise ModelBackendUnavailable("sliding classification needs polynomial fields on both sides")
    mid = 0.5 * b
    q_up = upper.field.q_on_axis(mid - b)   # translated upper frame
    q_dn = lower.field.q_on_axis(mid)
    interval = (min(0.0, b), max(0.0, b))
    if q_up < 0.0 < q_dn:
        return SlidingSegment(interval, "attracting")
    if q_dn < 0.0 < q_up:
        return SlidingSegment(interval, "repelling")
    raise NotSliding(
        f"normal velocities Q_up={q_up:g}, Q_down={q_dn:g} at the midpoint do not both face the segment")
