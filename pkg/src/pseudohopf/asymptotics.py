"""Analytic predictions for cycle position and period as b -> 0.

Position predictors come in two flavors: the smooth-series formula
c = ((1 - a1_up)/|V_N|)^(1/N) with exponent 1/N, and the Dulac dispatch
keyed on the sides' leading exponents (r_up, r_down), including the
reflected-coordinates coefficient ledger for leading exponents at or
below one and the degenerate mixed case.

Period predictions compose each side's flight-time form with the law of
its own entry abscissa. The entry abscissas differ: the lower orbit
enters at x(b) while the upper one enters at x(b) - b, and when the
position is x(b) = b + o(b) the upper argument lives on a faster scale
|b|^(1/r_up). Composing both sides at x(b) would get log-flight slopes
wrong, so the upper argument law is derived explicitly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from numpy.polynomial.chebyshev import Chebyshev
from scipy.integrate import quad

from .errors import ConfigError, FitError
from .fields import (
    CUSP,
    EFOCUS,
    FOLD,
    KIND_PRECEDENCE,
    NFOCUS,
    PERIODIC_ORBIT,
    POLYCYCLE_SINGULAR,
    POLYCYCLE_TANGENTIAL,
    ComponentClass,
    ModelFlight,
    PlanarField,
)

__all__ = [
    "AsymptoticLaw",
    "DisplacementLeading",
    "table_law",
    "predict_position_smooth",
    "predict_position_dulac",
    "reflected_position_coefficient",
    "dulac_invert_leading",
    "efocus_alpha1",
    "nfocus_alpha1",
    "polar_components",
    "GasullCoefficients",
    "gasull_coeffs",
    "predict_period_law",
]

POWER = "power"
NEG_POWER = "neg_power"
LOG = "log"
CONSTANT = "constant"


@dataclass(frozen=True)
class AsymptoticLaw:
    """One-parameter law family for position or period as b -> 0.

    power/neg_power: value = coefficient * |b|**exponent
    log:             value = T0 * (-ln|b|) + offset
    constant:        value = T0 (+ coefficient * |b|**exponent correction)
    Symbolic entries (undetermined by component data alone) carry None.
    """

    family: str
    of: str                      # 'position' | 'period'
    provenance: str              # 'predicted' | 'fitted'
    coefficient: Optional[float] = None
    exponent: Optional[float] = None
    T0: Optional[float] = None
    offset: Optional[float] = None
    case_tag: str = ""
    note: str = ""

    def __post_init__(self):
        if self.family not in (POWER, NEG_POWER, LOG, CONSTANT):
            raise ValueError(f"unknown law family {self.family!r}")
        if self.family in (POWER, NEG_POWER) and self.coefficient is not None:
            if not self.coefficient > 0.0:
                raise ValueError("power-law coefficient must be positive")
        if self.family == LOG and self.T0 is not None and not self.T0 > 0.0:
            raise ValueError("log law requires T0 > 0")

    def __call__(self, b: float) -> float:
        ab = abs(b)
        if self.family in (POWER, NEG_POWER):
            return self.coefficient * ab ** self.exponent
        if self.family == LOG:
            return self.T0 * (-math.log(ab)) + (self.offset or 0.0)
        value = self.T0
        if self.coefficient is not None and self.exponent is not None:
            value += self.coefficient * ab ** self.exponent
        return value


@dataclass(frozen=True)
class DisplacementLeading:
    """Leading term V * x^exponent of the unperturbed displacement."""

    V: float
    exponent: float
    case_tag: str  # 'smooth_N' | 'dulac'

    def __post_init__(self):
        if self.V == 0.0:
            raise ValueError("leading displacement coefficient must be nonzero")
        if not self.exponent > 0.0:
            raise ValueError("leading displacement exponent must be positive")


# --------------------------------------------------------------------------
# Table of leading behaviors by component pair
# --------------------------------------------------------------------------

def _canonical_kind(kind: str) -> str:
    if kind in (POLYCYCLE_TANGENTIAL, POLYCYCLE_SINGULAR):
        return "polycycle"
    return kind


def table_law(up: ComponentClass, down: ComponentClass) -> tuple[AsymptoticLaw, AsymptoticLaw]:
    """Symbolic (period, position) law families for a component pairing.

    Exponents are filled from component data where the table determines
    them (cusp ladder, nilpotent n, fold pairs); polycycle positions and
    generic 1/n entries stay symbolic (None) and must come from the
    explicit predictors or from fits. The tabulated rows are the generic
    ones: pairings whose leading displacement coefficient degenerates
    (e.g. two exact folds, or a cusp over a fold where both maps start
    with -x) realize other exponents, which the predictors and sweeps
    surface.
    """
    pair = sorted((up, down), key=lambda k: KIND_PRECEDENCE[k.kind])
    lead, other = pair[0], pair[1]
    kind = _canonical_kind(lead.kind)
    other_kind = _canonical_kind(other.kind)

    if kind == CUSP:
        n = lead.n
        expo = (2 * n - 1) / (2 * n + 1)
        period = AsymptoticLaw(NEG_POWER, "period", "predicted", exponent=-expo,
                               case_tag="cusp_row")
        position = AsymptoticLaw(POWER, "position", "predicted", exponent=1.0,
                                 case_tag="cusp_row")
        return period, position
    if kind == NFOCUS:
        n = lead.n
        period = AsymptoticLaw(NEG_POWER, "period", "predicted", exponent=-1.0 / n,
                               case_tag="nfocus_row")
        pos_exp = None if other_kind == "polycycle" else 1.0 / n
        position = AsymptoticLaw(POWER, "position", "predicted", exponent=pos_exp,
                                 case_tag="nfocus_row",
                                 note="" if pos_exp is not None else "position |b|^r from the Dulac predictor")
        return period, position
    if kind == "polycycle":
        period = AsymptoticLaw(LOG, "period", "predicted", T0=None, case_tag="polycycle_row",
                               note="slope from the composed period predictor")
        position = AsymptoticLaw(POWER, "position", "predicted", exponent=None,
                                 case_tag="polycycle_row",
                                 note="exponent R from the Dulac predictor, not the symbolic r")
        return period, position
    if kind in (PERIODIC_ORBIT, EFOCUS):
        t0 = lead.T0
        period = AsymptoticLaw(CONSTANT, "period", "predicted", T0=t0,
                               case_tag=f"{kind}_row")
        position = AsymptoticLaw(POWER, "position", "predicted", exponent=None,
                                 case_tag=f"{kind}_row", note="|b|^(1/n), n from the smooth predictor")
        return period, position
    # fold over fold: generic first even displacement index N = 2
    period = AsymptoticLaw(POWER, "period", "predicted", exponent=0.5, case_tag="fold_fold_row")
    position = AsymptoticLaw(POWER, "position", "predicted", exponent=0.5, case_tag="fold_fold_row")
    return period, position


# --------------------------------------------------------------------------
# position predictors
# --------------------------------------------------------------------------

def predict_position_smooth(alpha1_plus: float, V_N: float, N: int) -> AsymptoticLaw:
    """Position law c*|b|^(1/N), c = ((1 - alpha1_plus)/|V_N|)^(1/N).

    alpha1_plus is the upper map's linear series coefficient (<= 0); V_N is
    the first nonvanishing displacement coefficient at order N.
    """
    if V_N == 0.0:
        raise ValueError("V_N must be nonzero")
    if alpha1_plus > 0.0:
        raise ValueError("alpha1_plus must be <= 0")
    if N < 1:
        raise ValueError("N must be a positive integer")
    c = ((1.0 - alpha1_plus) / abs(V_N)) ** (1.0 / N)
    note = f"remainder O(|b|^{2.0 / N:g}) when N < k"
    return AsymptoticLaw(POWER, "position", "predicted", coefficient=c,
                         exponent=1.0 / N, case_tag=f"smooth_N{N}", note=note)


def _dulac_v1(alpha1: tuple[float, float], r: tuple[float, float], delta: int) -> float:
    a_up, a_dn = alpha1
    r_up, r_dn = r
    if r_up < r_dn:
        return delta * a_up
    if r_up > r_dn:
        return -delta * a_dn
    return delta * (a_up - a_dn)


def predict_position_dulac(alpha1: tuple[float, float], r: tuple[float, float],
                           delta: int) -> AsymptoticLaw:
    """Position law for Dulac-type maps phi_side = alpha1_side * x^r_side + higher.

    For (r_up - 1)(r_down - 1) >= 0 the exponent is R = 1/r_m for r_m >= 1
    and 1 otherwise, with the coefficient from the five-entry ledger (the
    leading-exponents-below-one entries follow the reflected-coordinates
    derivation; the equal-exponent ratio formula applies exactly when
    r_up = r_down < 1, where the printed strict-inequality label would
    overlap the distinct-exponent entry). For (r_up - 1)(r_down - 1) < 0
    the law degenerates to x(b) = b + o(b) when mu = +1 (coefficient
    exact) and x(b) = o(b) when mu = -1 (coefficient undetermined).

    Raises ValueError when the dispatched V1 vanishes (leading
    cancellation): the prediction hypothesis fails and only measurement
    can produce the law.
    """
    a_up, a_dn = alpha1
    r_up, r_dn = r
    if a_up >= 0.0 or a_dn >= 0.0:
        raise ValueError("alpha1 coefficients of half-return maps must be negative")
    if r_up <= 0.0 or r_dn <= 0.0:
        raise ValueError("Dulac exponents must be positive")
    v1 = _dulac_v1(alpha1, r, delta)
    if v1 == 0.0:
        raise ValueError(
            "V1 = 0 under the Dulac dispatch (leading cancellation); "
            "no coefficient prediction exists, fall back to fitted laws")
    r_m = min(r_up, r_dn)

    if (r_up - 1.0) * (r_dn - 1.0) >= 0.0:
        R = 1.0 / r_m if r_m >= 1.0 else 1.0
        if r_m >= 1.0 and r_up > 1.0:
            x0 = 1.0 / abs(v1) ** (1.0 / r_m)
            tag = "rm_ge_1__r_up_gt_1"
        elif r_m >= 1.0 and r_up == 1.0:
            x0 = (1.0 - a_up) / abs(v1)
            tag = "rm_ge_1__r_up_eq_1"
        elif r_up == 1.0:  # r_dn < r_up = 1
            x0 = (1.0 - a_up) / abs(a_up)
            tag = "rm_le_1__r_up_eq_1"
        elif r_up != r_dn:
            x0 = 1.0
            tag = "rm_le_1__r_up_lt_1_distinct"
        else:  # r_up = r_dn < 1
            au = abs(a_up) ** (1.0 / r_m)
            ad = abs(a_dn) ** (1.0 / r_m)
            x0 = au / abs(au - ad)
            tag = "rm_le_1__equal_exponents"
        return AsymptoticLaw(POWER, "position", "predicted", coefficient=x0,
                             exponent=R, case_tag=tag)

    # mixed case: exponents straddle 1
    if r_up < r_dn:
        return AsymptoticLaw(POWER, "position", "predicted", coefficient=1.0,
                             exponent=1.0, case_tag="mixed_mu_plus",
                             note="x(b) = b + o(b); coefficient exact (mu = +1)")
    return AsymptoticLaw(POWER, "position", "predicted", coefficient=None,
                         exponent=1.0, case_tag="mixed_mu_minus",
                         note="x(b) = o(b); coefficient undetermined (mu = -1)")


def reflected_position_coefficient(alpha1: tuple[float, float],
                                   r: tuple[float, float]) -> float:
    """Coefficient via the x-reversal route: invert both maps, predict, map back.

    The reversed system has half-return maps kappa1 * x^rho with
    kappa1 = -|alpha1|^(-rho), rho = 1/r; its position coefficient chi0
    transported back through the leading-term inversion must agree with
    the direct ledger whenever r_m <= 1. Exposed for the consistency
    check, not for general use.
    """
    a_up, a_dn = alpha1
    r_up, r_dn = r
    rho_up, rho_dn = 1.0 / r_up, 1.0 / r_dn
    if rho_up == rho_dn == 1.0:
        raise ValueError("r_up = r_down = 1 is covered by the direct branch, not the reflection")
    k_up = -abs(a_up) ** (-rho_up)
    k_dn = -abs(a_dn) ** (-rho_dn)
    rho_m = min(rho_up, rho_dn)
    if rho_up < rho_dn:
        v1 = abs(k_up)
    elif rho_up > rho_dn:
        v1 = abs(k_dn)
    else:
        v1 = abs(k_up - k_dn)
        if v1 == 0.0:
            raise ValueError("reflected V1 vanishes")
    if rho_up > 1.0:
        chi0 = 1.0 / v1 ** (1.0 / rho_m)
    elif rho_up == 1.0:
        chi0 = (1.0 - k_up) / v1
    else:
        raise ValueError("reflected route applies to r_m <= 1 (rho_up >= 1)")
    # transport through the side whose inverse map has the smaller exponent;
    # on ties the lower side's map carries the coefficient back
    k_star = k_dn if rho_dn <= rho_up else k_up
    return -k_star * chi0 ** rho_m


def dulac_invert_leading(alpha: float, r: float, reflected: bool = False) -> tuple[float, float]:
    """Leading term of the inverse of D(x) = alpha * x^r: (kappa, rho).

    D^{-1}(y) = kappa * |y|^rho + higher, kappa = |alpha|^(-rho), rho = 1/r.
    With ``reflected`` the sign-reversed variant kappa1 = -|alpha|^(-rho)
    used by the x-reversal construction is returned.
    """
    if alpha == 0.0:
        raise ValueError("alpha must be nonzero")
    if r <= 0.0:
        raise ValueError("r must be positive")
    rho = 1.0 / r
    kappa = abs(alpha) ** (-rho)
    return (-kappa if reflected else kappa), rho


# --------------------------------------------------------------------------
# component-level constants
# --------------------------------------------------------------------------

def efocus_alpha1(a10: float, a01: float, b10: float, b01: float) -> float:
    """Contraction factor of the elementary-focus half-turn (positive convention).

    The series convention of the half-return map makes its linear
    coefficient the negative of this value.
    """
    disc = (a10 - b01) ** 2 + 4.0 * a01 * b10
    if disc >= 0.0:
        raise ValueError("linear part is not monodromic: (a10-b01)^2 + 4 a01 b10 >= 0")
    return math.exp(math.pi * (a10 + b01) / math.sqrt(-disc))


def nfocus_alpha1(a: float, b: float, n: int, beta: Optional[int]) -> float:
    """Half-turn contraction of a nilpotent monodromic point, by quadrature.

    ``beta=None`` means g identically zero. Monodromy requires beta > n-1
    (then the g term does not enter) or beta = n-1 with b^2 - 4an < 0.
    """
    if a <= 0.0 or n < 2:
        raise ValueError("requires a > 0 and n >= 2")
    if beta is None or b == 0.0 or beta > n - 1:
        nu = 0.0
    elif beta == n - 1:
        if b * b - 4.0 * a * n >= 0.0:
            raise ValueError("monodromy condition b^2 - 4an < 0 violated")
        nu = b
    else:
        raise ValueError("monodromy requires beta >= n-1")
    if nu == 0.0:
        return 1.0

    def integrand(theta):
        s, c = math.sin(theta), math.cos(theta)
        return (nu * s * s * c ** (n - 1)
                / ((a * c ** (2 * n) + n * s * s) + nu * c ** n * s))

    val, _ = quad(integrand, 0.0, math.pi, epsabs=1e-13, epsrel=1e-12, limit=200)
    return math.exp(val)


# --------------------------------------------------------------------------
# Gasull-style half-turn quadratures
# --------------------------------------------------------------------------

def polar_components(field: PlanarField, p: int, q: int, m: int):
    """Weighted-polar component evaluators (A, B) of a field.

    Under x = r^p cos(theta), y = r^q sin(theta) the system becomes
    r' = A(r, theta) r^m, theta' = B(r, theta) r^m. The returned callables
    accept complex r (needed by the derivative extraction) and real theta.
    """
    from .fields import poly_eval

    cp, cq = field.coeffs_p, field.coeffs_q

    def A(r, theta):
        c, s = math.cos(theta), math.sin(theta)
        x = r ** p * c
        y = r ** q * s
        num = r ** q * c * poly_eval(cp, x, y) + r ** p * s * poly_eval(cq, x, y)
        return num / (r ** (p + q - 1 + m) * (p * c * c + q * s * s))

    def B(r, theta):
        c, s = math.cos(theta), math.sin(theta)
        x = r ** p * c
        y = r ** q * s
        num = p * r ** p * c * poly_eval(cq, x, y) - q * r ** q * s * poly_eval(cp, x, y)
        return num / (r ** (p + q + m) * (p * c * c + q * s * s))

    return A, B


def _radial_jet(g: Callable, theta: float, h: float = 1e-3) -> tuple[float, float, float]:
    """(g(0), g'(0), g''(0)/2) in r, via complex-step with Richardson refinement."""
    vals = [g(complex(0.0, h / 2 ** k), theta) for k in range(3)]
    re = [v.real for v in vals]
    im = [v.imag for v in vals]
    g0 = (4.0 * re[1] - re[0]) / 3.0
    d0 = im[0] / h
    d1 = im[1] / (h / 2.0)
    g1 = (4.0 * d1 - d0) / 3.0
    s0 = (g0 - re[0]) / h ** 2
    s1 = (g0 - re[1]) / (h / 2.0) ** 2
    g2 = (4.0 * s1 - s0) / 3.0
    return g0, g1, g2


@dataclass(frozen=True)
class GasullCoefficients:
    r1_pi: float
    r2_pi: float
    T_hat_0: float
    T_hat_prime_0: float


def gasull_coeffs(A: Callable, B: Callable, m: int, degree: int = 120) -> GasullCoefficients:
    """Half-turn series data of r' = A r^m, theta' = B r^m on theta in [0, pi].

    Requires A(0, theta) = 0 and B(0, theta) > 0 (checked on the quadrature
    nodes). The radial jets A1, A2, B0, B1 are extracted by complex-step
    differentiation, so A and B must accept complex r; everything is then
    integrated spectrally via Chebyshev interpolants, giving

        r1(pi) = exp(int C1),      C1 = A1/B0,
        r2(pi) = r1(pi) * int C2 r1,   C2 = A2/B0 - A1 B1 / B0^2,
        T_hat(0) = int d(theta) / (r1^m B0),
        T_hat'(0) = -int (r1 B1/B0 + m r2/r1) / (r1^m B0).
    """
    jets: dict[float, tuple] = {}

    def at(theta: float):
        got = jets.get(theta)
        if got is None:
            a0, a1, a2 = _radial_jet(A, theta)
            b0, b1, _ = _radial_jet(B, theta)
            if abs(a0) > 1e-8 * max(1.0, abs(a1)):
                raise ConfigError(f"A(0, {theta:g}) = {a0:g} != 0: hypothesis violated")
            if b0 <= 0.0:
                raise ConfigError(f"B(0, {theta:g}) = {b0:g} <= 0: hypothesis violated")
            got = (a1, a2, b0, b1)
            jets[theta] = got
        return got

    def vectorize(fn):
        return lambda ts: np.array([fn(float(t)) for t in np.atleast_1d(ts)])

    dom = [0.0, math.pi]
    c1_cheb = Chebyshev.interpolate(vectorize(lambda t: at(t)[0] / at(t)[2]), degree, domain=dom)
    F = c1_cheb.integ()
    F = F - F(0.0)
    r1 = lambda t: math.exp(F(t))
    r1_pi = r1(math.pi)

    def c2(t):
        a1, a2, b0, b1 = at(t)
        return a2 / b0 - a1 * b1 / (b0 * b0)

    c2r1_cheb = Chebyshev.interpolate(vectorize(lambda t: c2(t) * r1(t)), degree, domain=dom)
    G = c2r1_cheb.integ()
    G = G - G(0.0)
    r2_pi = r1_pi * float(G(math.pi))

    t0_cheb = Chebyshev.interpolate(vectorize(lambda t: 1.0 / (r1(t) ** m * at(t)[2])),
                                    degree, domain=dom)
    T0 = float(t0_cheb.integ()(math.pi) - t0_cheb.integ()(0.0))

    def tprime_integrand(t):
        a1, a2, b0, b1 = at(t)
        r1t = r1(t)
        r2t = r1t * float(G(t))
        return (r1t * b1 / b0 + m * r2t / r1t) / (r1t ** m * b0)

    tp_cheb = Chebyshev.interpolate(vectorize(tprime_integrand), degree, domain=dom)
    Tp = -float(tp_cheb.integ()(math.pi) - tp_cheb.integ()(0.0))

    return GasullCoefficients(r1_pi=r1_pi, r2_pi=r2_pi, T_hat_0=T0, T_hat_prime_0=Tp)


# --------------------------------------------------------------------------
# period prediction
# --------------------------------------------------------------------------

def _argument_laws(position: AsymptoticLaw,
                   maps: Optional[dict[str, tuple[float, float]]]):
    """Leading laws coef*|b|^exp of the two entry abscissas x(b) and x(b) - b."""
    x0, lam = position.coefficient, position.exponent
    if x0 is None or lam is None:
        raise ValueError("period composition needs a concrete position law")
    lower = (x0, lam)
    if lam < 1.0 - 1e-12:
        upper = (x0, lam)          # b is subdominant to x(b)
    elif x0 > 1.0 + 1e-9:
        upper = (x0 - 1.0, 1.0)    # x(b) - b ~ (x0 - 1) b
    else:
        # x(b) = b + o(b): the upper abscissa lives on the scale |b|^(1/r_up)
        if not maps or "upper" not in maps:
            raise ValueError(
                "position x(b) = b + o(b): upper argument scale needs the map data "
                "maps={'upper': (alpha1, r), 'lower': (alpha1, r)}")
        a_up, r_up = maps["upper"]
        shift = 0.0
        if maps.get("lower") is not None:
            a_dn, r_dn = maps["lower"]
            if abs(r_dn - 1.0) < 1e-12:
                shift = -a_dn      # phi_down contributes (1 - alpha1_down) b
        coef = ((1.0 + shift) / abs(a_up)) ** (1.0 / r_up)
        upper = (coef, 1.0 / r_up)
    return upper, lower


def _compose_flight(flight: ModelFlight, arg: tuple[float, float]):
    """One side's contribution: ('neg_power'|'power'|'log'|'constant', data)."""
    coef, lam = arg
    if flight.form == "constant":
        return (CONSTANT, abs(flight.T0))
    if flight.form == "power":
        e = flight.exponent
        family = NEG_POWER if e * lam < 0.0 else POWER
        return (family, (flight.T0 * coef ** e, e * lam))
    # log: |tau| = -T0 ln(coef |b|^lam) = lam*T0*(-ln|b|) - T0 ln(coef)
    return (LOG, (lam * flight.T0, -flight.T0 * math.log(coef)))


def predict_period_law(up: ComponentClass, down: ComponentClass,
                       position: AsymptoticLaw,
                       flights: dict[str, ModelFlight],
                       maps: Optional[dict[str, tuple[float, float]]] = None) -> AsymptoticLaw:
    """Compose flight-time forms with the position law into the period law.

    ``flights`` holds the per-side ModelFlight forms (from component theory
    or measurement); ``maps`` optionally holds per-side (alpha1, r) leading
    map data, required only when the position law is x(b) = b + o(b).
    """
    del up, down  # the dispatch runs on flights; classes document intent at call sites
    if flights["upper"].form == "constant" and flights["lower"].form == "constant":
        arg_up = arg_dn = (1.0, 1.0)  # constants ignore their argument scale
    else:
        arg_up, arg_dn = _argument_laws(position, maps)
    parts = [
        _compose_flight(flights["upper"], arg_up),
        _compose_flight(flights["lower"], arg_dn),
    ]

    neg = [d for f, d in parts if f == NEG_POWER]
    if neg:
        e = min(x[1] for x in neg)
        c = sum(x[0] for x in neg if x[1] == e)
        return AsymptoticLaw(NEG_POWER, "period", "predicted", coefficient=c, exponent=e,
                             case_tag="dominant_negative_power")
    logs = [d for f, d in parts if f == LOG]
    if logs:
        slope = sum(x[0] for x in logs)
        offset = sum(x[1] for x in logs) + sum(d for f, d in parts if f == CONSTANT)
        return AsymptoticLaw(LOG, "period", "predicted", T0=slope, offset=offset,
                             case_tag="log_flights")
    consts = [d for f, d in parts if f == CONSTANT]
    if consts and sum(consts) > 0.0:
        return AsymptoticLaw(CONSTANT, "period", "predicted", T0=sum(consts),
                             case_tag="constant_flights")
    pows = [d for f, d in parts if f == POWER]
    e = min(x[1] for x in pows)
    c = sum(x[0] for x in pows if x[1] == e)
    return AsymptoticLaw(POWER, "period", "predicted", coefficient=c, exponent=e,
                         case_tag="vanishing_flights")


# --------------------------------------------------------------------------
# displacement leading-term measurement (feeds the smooth predictor)
# --------------------------------------------------------------------------

def measure_displacement_leading(xs, values, noise: float = 1e-8) -> DisplacementLeading:
    """First significant coefficient of Delta0 from samples on a log grid."""
    from .returns import fit_smooth_series

    coeffs, _ = fit_smooth_series(xs, values, n_terms=3)
    scale = max(abs(v) / x for v, x in zip(values, xs))
    for i, c in enumerate(coeffs):
        if abs(c) > max(noise, 1e-3 * scale):
            return DisplacementLeading(V=c, exponent=float(i + 1), case_tag=f"smooth_N{i + 1}")
    raise FitError("no significant displacement coefficient up to order 3")
