"""Uniform access to half-return maps phi(x) and flight times tau(x).

Both backends sit behind one call, `half_return(system, side, x)`:

* flow: integrate the side's polynomial field to its first section return,
  trying forward time first and falling back to backward time, so the
  reported flight time is signed by the direction actually flown;
* model: evaluate the side's analytic map/flight forms.

Results are memoized process-wide; systems and their components are frozen
value objects, so the cache key is the arguments themselves. Repeated
sweeps over the same system reuse every integration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import flow as _flow
from .errors import FitError, WrongLaunchDirection
from .fields import (  # re-exported model types live with the system descriptors
    FlowComponent,
    ModelComponent,
    ModelFlight,
    ModelMap,
    PiecewiseSystem,
)

__all__ = [
    "ModelMap",
    "ModelFlight",
    "ReturnData",
    "half_return",
    "phi",
    "tau",
    "noise_floor",
    "inverse_half_return",
    "LocalCoeffEstimate",
    "estimate_local_coeffs",
    "fit_smooth_series",
    "fit_dulac_leading",
]


@dataclass(frozen=True)
class ReturnData:
    """One half-return sample: landing abscissa and signed flight time."""

    phi: float
    tau: float
    x: float
    side: str
    backend: str

    def __post_init__(self):
        if not self.phi < 0.0:
            raise ValueError(f"half-return map must be negative, got phi={self.phi!r}")
        if self.tau == 0.0:
            raise ValueError("flight time must be nonzero")


def _limits(system: PiecewiseSystem) -> _flow.IntegrationLimits:
    return system.limits if system.limits is not None else _flow.DEFAULT_LIMITS


@lru_cache(maxsize=1 << 20)
def half_return(system: PiecewiseSystem, side: str, x: float) -> ReturnData:
    """Half-return map and flight time of one side at abscissa x > 0.

    Flow-backed sides integrate in whichever time direction enters their
    half-plane (forward attempted first); model-backed sides evaluate their
    analytic forms. Integration errors propagate to the caller.
    """
    comp = system.component(side)
    if isinstance(comp, ModelComponent):
        return ReturnData(phi=comp.phi(x), tau=comp.tau(x), x=x, side=side, backend="model")
    assert isinstance(comp, FlowComponent)
    try:
        hit = _flow.flow_to_section(comp.field, (x, 0.0), side, "forward", _limits(system))
    except WrongLaunchDirection:
        hit = _flow.flow_to_section(comp.field, (x, 0.0), side, "backward", _limits(system))
    return ReturnData(phi=hit.point[0], tau=hit.time, x=x, side=side, backend="flow")


def phi(system: PiecewiseSystem, side: str, x: float) -> float:
    return half_return(system, side, x).phi


def tau(system: PiecewiseSystem, side: str, x: float) -> float:
    return half_return(system, side, x).tau


def noise_floor(system: PiecewiseSystem, side: str, x: float, phi_value: float) -> float:
    """Absolute uncertainty scale of a phi sample (used by degeneracy checks)."""
    comp = system.component(side)
    if isinstance(comp, ModelComponent):
        return 8.0 * np.finfo(float).eps * max(abs(phi_value), x)
    lim = _limits(system)
    return lim.event_tol + lim.rel_tol * max(abs(phi_value), x) + lim.abs_tol


def inverse_half_return(system: PiecewiseSystem, side: str, y: float,
                        n_probe: int = 24) -> float:
    """Numerically invert phi on the window: find x with phi(x) = y < 0.

    The map is sampled on a log grid to locate a bracket and checked for
    monotonicity; the bracket is then refined by Brent's method down to
    event-level tolerance in x.
    """
    if y >= 0.0:
        raise ValueError("half-return values are negative; y must be < 0")
    floor, top = system.x_window
    xs = np.geomspace(floor, top, n_probe)
    vals = []
    for xk in xs:
        vals.append(half_return(system, side, float(xk)).phi)
    vals = np.asarray(vals)
    if not np.all(np.diff(vals) < 0.0):
        raise FitError("phi is not strictly decreasing on the sampled window")
    if not (vals[-1] <= y <= vals[0]):
        raise ValueError(f"y={y:g} outside the sampled range [{vals[-1]:g}, {vals[0]:g}]")
    idx = int(np.searchsorted(-vals, -y))
    lo = float(xs[max(idx - 1, 0)])
    hi = float(xs[min(idx, n_probe - 1)])
    if lo == hi:
        return lo
    from scipy.optimize import brentq

    return float(brentq(lambda xx: half_return(system, side, float(xx)).phi - y,
                        lo, hi, xtol=1e-300, rtol=4.0 * np.finfo(float).eps, maxiter=200))


# --------------------------------------------------------------------------
# local coefficient estimation
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class LocalCoeffEstimate:
    """Fitted local model of a half-return map near 0."""

    family: str                     # 'smooth' | 'dulac'
    alpha: tuple[float, ...]        # smooth: (a1, a2, a3); dulac: (alpha_hat,)
    r: float                        # dulac exponent (1.0 for smooth fits)
    residual: float                 # max abs residual in fit coordinates
    residual_ok: bool
    window: tuple[float, float]


def fit_smooth_series(xs, values, n_terms: int = 3):
    """Least-squares c1..cn with values ~ c1*x + ... + cn*x^n; returns (coeffs, resid).

    The fit runs on values/x against a polynomial in x, which keeps the
    design matrix well conditioned on log-spaced grids near 0.
    """
    xs = np.asarray(xs, dtype=float)
    values = np.asarray(values, dtype=float)
    cols = [xs ** k for k in range(n_terms)]
    design = np.vstack(cols).T
    target = values / xs
    coef, *_ = np.linalg.lstsq(design, target, rcond=None)
    resid = np.max(np.abs(design @ coef - target))
    return tuple(float(c) for c in coef), float(resid)


def fit_dulac_leading(xs, values):
    """Log-log regression of |values| ~ |alpha| * x^r; returns (r, alpha<0, resid)."""
    xs = np.asarray(xs, dtype=float)
    values = np.asarray(values, dtype=float)
    if np.any(values == 0.0):
        raise FitError("dulac fit requires nonzero samples")
    if not (np.all(values < 0.0) or np.all(values > 0.0)):
        raise FitError("dulac fit requires single-signed samples")
    slope, intercept = np.polyfit(np.log(xs), np.log(np.abs(values)), 1)
    fitted = intercept + slope * np.log(xs)
    resid = np.max(np.abs(fitted - np.log(np.abs(values))))
    return float(slope), -float(np.exp(intercept)), float(resid)


def estimate_local_coeffs(system: PiecewiseSystem, side: str, grid,
                          model_family: str = "smooth",
                          remove_linear: float | None = None,
                          residual_threshold: float = 1e-3) -> LocalCoeffEstimate:
    """Estimate local coefficients of phi on the given x grid.

    smooth: fit phi(x)/x against a polynomial, returning alpha_1..alpha_3
    in the series convention phi(x) = sum(alpha_i x^i) (alpha_1 <= 0).
    dulac: log-log regression of |phi| (or of the residue phi - remove_linear*x
    when ``remove_linear`` is given) against x, returning (r_hat, alpha_hat).

    A residual above ``residual_threshold`` is reported via ``residual_ok``,
    not raised: slowly converging maps legitimately fit loosely on wide
    windows.
    """
    xs = [float(x) for x in grid]
    if len(xs) < 6:
        raise FitError("need at least 6 samples")
    span = max(xs) / min(xs)
    if span < 10.0:
        raise FitError("samples must span at least one decade")
    vals = np.array([half_return(system, side, x).phi for x in xs])
    window = (min(xs), max(xs))
    if model_family == "smooth":
        coeffs, resid = fit_smooth_series(xs, vals, n_terms=3)
        return LocalCoeffEstimate("smooth", coeffs, 1.0, resid,
                                  resid <= residual_threshold, window)
    if model_family == "dulac":
        target = vals if remove_linear is None else vals - remove_linear * np.asarray(xs)
        r_hat, alpha_hat, resid = fit_dulac_leading(xs, target)
        return LocalCoeffEstimate("dulac", (alpha_hat,), r_hat, resid,
                                  resid <= residual_threshold, window)
    raise ValueError(f"model_family must be 'smooth' or 'dulac', got {model_family!r}")
