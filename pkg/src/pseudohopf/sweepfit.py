"""Parameter sweeps over b and empirical law extraction from the samples.

Sweeps run the cycle finder on a geometric b grid (sign chosen by the
system's sign data) and tolerate per-point failures. Law fits mirror the
limit families: power (free exponent, either sign), log against -ln|b|,
and constant with an extrapolated limit. Because every law here is an
asymptotic statement, the reported law of a sweep is fitted on the
smallest-|b| half of the successful samples; full-window fits only enter
the window-shrink diagnostic.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .asymptotics import CONSTANT, LOG, NEG_POWER, POWER, AsymptoticLaw
from .bifurcation import CycleRecord, find_crossing_cycle, sign_data
from .errors import DivergentSamples, FitError, NoSignChange, PseudoHopfError
from .fields import PiecewiseSystem

__all__ = [
    "SweepGrid",
    "SweepResult",
    "FitResult",
    "Verdict",
    "sweep",
    "asymptotic_half",
    "fit_power",
    "fit_log",
    "fit_constant",
    "classify_law",
    "compare",
]


@dataclass(frozen=True)
class SweepGrid:
    """Geometric grid b_k = sign * b_max * ratio^k, k = 0..count-1."""

    b_max: float = 1e-2
    ratio: float = 0.5
    count: int = 20
    sign: Optional[int] = None  # None: take the cycle-producing sign from sign_data

    def __post_init__(self):
        if not (0.0 < self.ratio < 1.0) or self.b_max <= 0.0 or self.count < 1:
            raise ValueError("grid requires b_max > 0, 0 < ratio < 1, count >= 1")

    def points(self, sign: int) -> tuple[float, ...]:
        return tuple(sign * self.b_max * self.ratio ** k for k in range(self.count))


@dataclass(frozen=True)
class SweepResult:
    """Cycle records sorted by |b| descending, plus per-point failures."""

    samples: tuple[CycleRecord, ...]
    grid: SweepGrid
    failures: tuple[tuple[float, str], ...]

    def positions(self):
        return (np.array([abs(s.b) for s in self.samples]),
                np.array([s.x_star for s in self.samples]))

    def periods(self):
        return (np.array([abs(s.b) for s in self.samples]),
                np.array([s.period for s in self.samples]))


def _worker_count() -> int:
    raw = os.environ.get("PSEUDOHOPF_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def sweep(system: PiecewiseSystem, grid: Optional[SweepGrid] = None,
          min_successes: int = 8) -> SweepResult:
    """Run the cycle finder over a geometric b grid.

    Per-point failures (no sign change, integration blow-ups) are recorded,
    not fatal; fewer than ``min_successes`` successes raises FitError since
    no law can be extracted downstream.
    """
    grid = grid or SweepGrid()
    sign = grid.sign if grid.sign is not None else sign_data(system).mu
    points = grid.points(sign)

    def solve(b: float):
        try:
            return find_crossing_cycle(system, b)
        except PseudoHopfError as exc:
            return (b, f"{type(exc).__name__}: {exc}")

    workers = _worker_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(solve, points))
    else:
        outcomes = [solve(b) for b in points]

    samples = tuple(o for o in outcomes if isinstance(o, CycleRecord))
    failures = tuple(o for o in outcomes if not isinstance(o, CycleRecord))
    if len(samples) < min_successes:
        raise FitError(
            f"only {len(samples)} of {len(points)} sweep points produced a cycle "
            f"(need {min_successes}); failures: {[f[1] for f in failures[:3]]}...")
    return SweepResult(samples=samples, grid=grid, failures=failures)


def asymptotic_half(samples: Sequence[tuple[float, float]], minimum: int = 8):
    """Smallest-|b| half of the samples (at least ``minimum`` points)."""
    ordered = sorted(samples, key=lambda s: -abs(s[0]))
    keep = max(minimum, len(ordered) // 2)
    return ordered[-keep:] if len(ordered) > keep else ordered


@dataclass(frozen=True)
class FitResult:
    """A fitted law plus goodness-of-fit in its linearizing coordinates."""

    law: AsymptoticLaw
    r_squared: float
    max_rel_residual: float
    window: tuple[float, float]


def _split(samples):
    pts = [(float(b), float(v)) for b, v in samples]
    if len(pts) < 8:
        raise FitError(f"need at least 8 samples, got {len(pts)}")
    bs = np.array([abs(p[0]) for p in pts])
    vs = np.array([p[1] for p in pts])
    order = np.argsort(bs)
    return bs[order], vs[order]


def _r_squared(target, fitted):
    ss_res = float(np.sum((target - fitted) ** 2))
    ss_tot = float(np.sum((target - np.mean(target)) ** 2))
    if ss_tot == 0.0:
        return 1.0 if ss_res == 0.0 else 0.0
    return max(0.0, 1.0 - ss_res / ss_tot)


def fit_power(samples) -> FitResult:
    """Least-squares line in (ln|b|, ln value): exponent = slope, c = exp(intercept).

    A negative fitted exponent classifies as the diverging family.
    """
    bs, vs = _split(samples)
    if np.any(vs <= 0.0):
        raise FitError("power fit requires positive values")
    lb, lv = np.log(bs), np.log(vs)
    slope, intercept = np.polyfit(lb, lv, 1)
    fitted = intercept + slope * lb
    family = POWER if slope >= 0.0 else NEG_POWER
    law = AsymptoticLaw(family, "position", "fitted",
                        coefficient=float(np.exp(intercept)), exponent=float(slope))
    rel = float(np.max(np.abs(np.expm1(fitted - lv))))
    return FitResult(law, _r_squared(lv, fitted), rel, (float(bs[0]), float(bs[-1])))


def fit_log(samples) -> FitResult:
    """Least-squares line in (-ln|b|, value): slope = effective T0, intercept = offset."""
    bs, vs = _split(samples)
    s = -np.log(bs)
    slope, intercept = np.polyfit(s, vs, 1)
    fitted = intercept + slope * s
    law = AsymptoticLaw(LOG, "period", "fitted",
                        T0=float(slope) if slope > 0.0 else None,
                        offset=float(intercept),
                        note="" if slope > 0.0 else f"nonpositive fitted slope {slope:g}")
    scale = np.maximum(np.abs(vs), 1e-300)
    rel = float(np.max(np.abs(fitted - vs) / scale))
    return FitResult(law, _r_squared(vs, fitted), rel, (float(bs[0]), float(bs[-1])))


def fit_constant(samples) -> FitResult:
    """Extrapolate the b -> 0 limit of value = T0 + c|b|^lam.

    The correction exponent comes from a power fit of the successive
    differences on the geometric grid; the limit then comes from linear
    least squares against |b|^lam. Growing differences toward small |b|
    raise DivergentSamples. When the differences carry no decaying power
    (log-like data), the Aitken fallback on the last three samples is
    used and the residual reflects the poor fit.
    """
    bs, vs = _split(samples)
    diffs = vs[:-1] - vs[1:]          # value(b_k+1) - value(b_k) on ascending |b|
    mags = np.abs(diffs)
    nz = mags > 0.0
    small = mags[: max(2, len(mags) // 3)]
    large = mags[-max(2, len(mags) // 3):]
    if np.mean(small) > 4.0 * np.mean(large) and np.mean(small) > 1e-12:
        raise DivergentSamples("sample spread grows toward small |b|")

    lam = None
    if np.count_nonzero(nz) >= 4:
        slope, _ = np.polyfit(np.log(bs[:-1][nz]), np.log(mags[nz]), 1)
        if slope > 0.05:
            lam = float(slope)
    if lam is None:
        # log-like or flat differences: Aitken delta-squared on the small end
        v0, v1, v2 = vs[2], vs[1], vs[0]
        denom = (v0 - v1) - (v1 - v2)
        t0 = v2 if denom == 0.0 else v2 - (v1 - v2) ** 2 / denom
        law = AsymptoticLaw(CONSTANT, "period", "fitted", T0=float(t0),
                            note="aitken fallback: no decaying power correction found")
        scale = np.maximum(np.abs(vs), 1e-300)
        rel = float(np.max(np.abs(vs - t0) / scale))
        return FitResult(law, 0.0, rel, (float(bs[0]), float(bs[-1])))

    design = np.vstack([np.ones_like(bs), bs ** lam]).T
    coef, *_ = np.linalg.lstsq(design, vs, rcond=None)
    t0, c = float(coef[0]), float(coef[1])
    fitted = design @ coef
    law = AsymptoticLaw(CONSTANT, "period", "fitted", T0=t0, coefficient=None,
                        exponent=lam, note=f"correction {c:+g}*|b|^{lam:g}")
    scale = np.maximum(np.abs(vs), 1e-300)
    rel = float(np.max(np.abs(fitted - vs) / scale))
    return FitResult(law, _r_squared(vs, fitted), rel, (float(bs[0]), float(bs[-1])))


def classify_law(samples, margin_warn: float = 0.10) -> FitResult:
    """Fit all families and return the one with the smallest max relative residual.

    Requires at least 10 samples spanning two decades. A winning margin
    under ``margin_warn`` is flagged in the law's note, not raised.
    """
    bs, _ = _split(samples)
    if len(bs) < 10:
        raise FitError("classification needs at least 10 samples")
    if bs[-1] / bs[0] < 100.0:
        raise FitError("classification needs samples spanning at least two decades")
    candidates: list[FitResult] = []
    for fitter in (fit_power, fit_log, fit_constant):
        try:
            candidates.append(fitter(samples))
        except (FitError, DivergentSamples):
            continue
    if not candidates:
        raise FitError("no law family fits the samples")
    candidates.sort(key=lambda fr: fr.max_rel_residual)
    best = candidates[0]
    if len(candidates) > 1:
        second = candidates[1]
        base = max(best.max_rel_residual, 1e-300)
        margin = (second.max_rel_residual - best.max_rel_residual) / base
        if margin < margin_warn:
            law = best.law
            note = (law.note + "; " if law.note else "") + \
                f"ambiguous: margin {margin:.2%} under {second.law.family}"
            best = FitResult(
                AsymptoticLaw(law.family, law.of, law.provenance, coefficient=law.coefficient,
                              exponent=law.exponent, T0=law.T0, offset=law.offset,
                              case_tag=law.case_tag, note=note),
                best.r_squared, best.max_rel_residual, best.window)
    return best


@dataclass(frozen=True)
class Verdict:
    passed: bool
    family_match: bool
    exponent_error: Optional[float]
    coefficient_error: Optional[float]
    details: str


def _law_exponent(law: AsymptoticLaw) -> Optional[float]:
    if law.family in (POWER, NEG_POWER):
        return law.exponent
    return None


def _law_coefficient(law: AsymptoticLaw) -> Optional[float]:
    if law.family in (POWER, NEG_POWER):
        return law.coefficient
    if law.family == LOG:
        return law.T0
    return law.T0


def compare(predicted: AsymptoticLaw, fitted: FitResult,
            tol_exponent: float = 0.02, tol_coefficient: float = 0.02) -> Verdict:
    """Pass iff families match, exponents within tol, coefficients within relative tol.

    Symbolic predicted entries (None) skip their check: the table's
    undetermined exponents and coefficients cannot fail a measurement.
    """
    flaw = fitted.law
    family_match = predicted.family == flaw.family
    if not family_match:
        return Verdict(False, False, None, None,
                       f"family mismatch: predicted {predicted.family}, fitted {flaw.family}")

    exp_err = None
    pe, fe = _law_exponent(predicted), _law_exponent(flaw)
    if predicted.family == LOG:
        pe, fe = predicted.T0, flaw.T0
    if pe is not None and fe is not None:
        exp_err = abs(fe - pe) if predicted.family != LOG else abs(fe / pe - 1.0)

    coef_err = None
    pc, fc = _law_coefficient(predicted), _law_coefficient(flaw)
    if predicted.family != LOG and pc is not None and fc is not None:
        coef_err = abs(fc / pc - 1.0)

    ok = True
    details = []
    if exp_err is not None:
        lim = tol_coefficient if predicted.family == LOG else tol_exponent
        ok &= exp_err <= lim
        details.append(f"exponent err {exp_err:.3g} (tol {lim:g})")
    if coef_err is not None:
        ok &= coef_err <= tol_coefficient
        details.append(f"coefficient err {coef_err:.3g} (tol {tol_coefficient:g})")
    if not details:
        details.append("family match only (symbolic prediction)")
    return Verdict(bool(ok), True, exp_err, coef_err, "; ".join(details))
