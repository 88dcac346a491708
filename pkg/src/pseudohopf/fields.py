"""Polynomial planar vector fields, piecewise pairings, and the builtin gallery.

A piecewise system pairs an upper and a lower component, each either a
polynomial vector field ("flow" backend, integrated numerically) or an
analytic model of its half-return map and flight time ("model" backend).
Coefficient tables are dense and rectangular: ``coeffs[i][j]`` multiplies
``x**i * y**j``.

All types are immutable (frozen dataclasses with tuple payloads), hashable,
and safe to share across threads; downstream modules memoize on them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Union

from .errors import ClassificationError, ConfigError

Coeffs = tuple[tuple[float, ...], ...]


def _freeze_table(rows) -> Coeffs:
    table = tuple(tuple(float(c) for c in row) for row in rows)
    if not table or not table[0]:
        raise ConfigError("coefficient table must be non-empty")
    width = len(table[0])
    if any(len(row) != width for row in table):
        raise ConfigError("coefficient table must be rectangular")
    if any(not math.isfinite(c) for row in table for c in row):
        raise ConfigError("coefficient table entries must be finite")
    return table


def poly_eval(coeffs: Coeffs, x: float, y: float) -> float:
    """Evaluate a dense bivariate polynomial by nested Horner (y inner, x outer)."""
    acc = 0.0
    for row in reversed(coeffs):
        inner = 0.0
        for c in reversed(row):
            inner = inner * y + c
        acc = acc * x + inner
    return acc


def poly_degree(coeffs: Coeffs) -> int:
    deg = 0
    for i, row in enumerate(coeffs):
        for j, c in enumerate(row):
            if c != 0.0:
                deg = max(deg, i + j)
    return deg


@dataclass(frozen=True)
class PlanarField:
    """Polynomial planar vector field (P, Q) with dense coefficient tables."""

    coeffs_p: Coeffs
    coeffs_q: Coeffs
    max_degree: int = -1

    def __post_init__(self):
        object.__setattr__(self, "coeffs_p", _freeze_table(self.coeffs_p))
        object.__setattr__(self, "coeffs_q", _freeze_table(self.coeffs_q))
        deg = max(poly_degree(self.coeffs_p), poly_degree(self.coeffs_q))
        if self.max_degree < 0:
            object.__setattr__(self, "max_degree", deg)
        elif deg > self.max_degree:
            raise ConfigError(f"coefficients reach degree {deg} > declared max_degree {self.max_degree}")

    def __call__(self, x: float, y: float) -> tuple[float, float]:
        return poly_eval(self.coeffs_p, x, y), poly_eval(self.coeffs_q, x, y)

    def q_on_axis(self, x: float) -> float:
        """Vertical velocity Q(x, 0)."""
        return poly_eval(self.coeffs_q, x, 0.0)

    def jet(self, which: str, i: int, j: int) -> float:
        """Coefficient of x^i y^j in P ('p') or Q ('q'); zero outside the table."""
        table = self.coeffs_p if which == "p" else self.coeffs_q
        if 0 <= i < len(table) and 0 <= j < len(table[0]):
            return table[i][j]
        return 0.0

    def rhs(self) -> Callable[[float, float], tuple[float, float]]:
        """Compile a fast (x, y) -> (P, Q) closure for integrator hot loops."""
        p_rows = self.coeffs_p
        q_rows = self.coeffs_q

        def f(x: float, y: float, _p=p_rows, _q=q_rows) -> tuple[float, float]:
            u = 0.0
            for row in reversed(_p):
                inner = 0.0
                for c in reversed(row):
                    inner = inner * y + c
                u = u * x + inner
            v = 0.0
            for row in reversed(_q):
                inner = 0.0
                for c in reversed(row):
                    inner = inner * y + c
                v = v * x + inner
            return u, v

        return f


def eval_field(field_: PlanarField, p: tuple[float, float]) -> tuple[float, float]:
    """Evaluate (P, Q) at a point."""
    return field_(p[0], p[1])


# --------------------------------------------------------------------------
# component classification
# --------------------------------------------------------------------------

FOLD = "fold"
EFOCUS = "efocus"
NFOCUS = "nfocus"
CUSP = "cusp"
PERIODIC_ORBIT = "periodic_orbit"
POLYCYCLE_TANGENTIAL = "polycycle_tangential"
POLYCYCLE_SINGULAR = "polycycle_singular"

_KINDS = (FOLD, EFOCUS, NFOCUS, CUSP, PERIODIC_ORBIT, POLYCYCLE_TANGENTIAL, POLYCYCLE_SINGULAR)

# local (smooth-series) kinds vs Dulac kinds; precedence order used by the law table
KIND_PRECEDENCE = {CUSP: 0, NFOCUS: 1, POLYCYCLE_TANGENTIAL: 2, POLYCYCLE_SINGULAR: 2,
                   PERIODIC_ORBIT: 3, EFOCUS: 4, FOLD: 5}


@dataclass(frozen=True)
class ComponentClass:
    """Declared local/global type of one component, with its parameters.

    Parameters by kind: fold -> multiplicity (2k, even); nfocus -> n, case
    ('i' or 'ii'), a, b, beta; cusp -> n; periodic_orbit -> contact (2n) and
    optionally the orbit period T0; polycycle kinds -> graphic number r (or
    ratio) and optionally the log-flight constant T0.
    """

    kind: str
    multiplicity: Optional[int] = None
    n: Optional[int] = None
    case: Optional[str] = None
    a: Optional[float] = None
    b: Optional[float] = None
    beta: Optional[int] = None
    contact: Optional[int] = None
    r: Optional[float] = None
    T0: Optional[float] = None
    validated: str = "declared"

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ConfigError(f"unknown component kind {self.kind!r}")
        if self.kind == FOLD:
            m = self.multiplicity
            if m is None or m < 2 or m % 2 != 0:
                raise ConfigError("fold multiplicity must be an even integer >= 2")
        if self.kind == NFOCUS:
            if self.n is None or self.n < 2:
                raise ConfigError("nilpotent focus requires n >= 2")
            if self.case not in ("i", "ii"):
                raise ConfigError("nilpotent focus monodromy case must be 'i' or 'ii'")
            if self.case == "ii":
                if self.b is None or self.a is None or self.beta is None:
                    raise ConfigError("case 'ii' requires a, b and beta")
                if self.beta != self.n - 1:
                    raise ConfigError("case 'ii' requires beta = n-1")
                if self.b * self.b - 4.0 * self.a * self.n >= 0.0:
                    raise ConfigError("case 'ii' requires b^2 - 4 a n < 0")
        if self.kind == CUSP and (self.n is None or self.n < 1):
            raise ConfigError("cusp requires n >= 1")
        if self.kind == PERIODIC_ORBIT:
            c = self.contact
            if c is None or c < 2 or c % 2 != 0:
                raise ConfigError("periodic orbit contact must be an even integer >= 2")
        if self.kind in (POLYCYCLE_TANGENTIAL, POLYCYCLE_SINGULAR):
            if self.r is None or self.r <= 0.0:
                raise ConfigError("polycycle requires a graphic number r > 0")

    # constructors
    @staticmethod
    def fold(multiplicity: int = 2) -> "ComponentClass":
        return ComponentClass(FOLD, multiplicity=multiplicity)

    @staticmethod
    def efocus() -> "ComponentClass":
        return ComponentClass(EFOCUS)

    @staticmethod
    def nfocus(n: int, case: str = "i", a: float = None, b: float = None,
               beta: int = None) -> "ComponentClass":
        return ComponentClass(NFOCUS, n=n, case=case, a=a, b=b, beta=beta)

    @staticmethod
    def cusp(n: int = 1) -> "ComponentClass":
        return ComponentClass(CUSP, n=n)

    @staticmethod
    def periodic_orbit(contact: int = 2, T0: float = None) -> "ComponentClass":
        return ComponentClass(PERIODIC_ORBIT, contact=contact, T0=T0)

    @staticmethod
    def polycycle(r: float, T0: float = None, singular: bool = False) -> "ComponentClass":
        kind = POLYCYCLE_SINGULAR if singular else POLYCYCLE_TANGENTIAL
        return ComponentClass(kind, r=r, T0=T0)


def classify_component(field_: PlanarField, declared: ComponentClass,
                       side: str = "upper") -> ComponentClass:
    """Validate a declared component class against the field's jet.

    Checks exist for folds (invisible-contact sign condition on the given
    side), elementary foci (negative linear discriminant) and nilpotent
    types (nilpotent linear part, leading coefficient signs). Global kinds
    carry no jet check and come back marked ``validated='unchecked'``.

    Raises ClassificationError when the jet contradicts the declaration.
    """
    f = field_
    if declared.kind == FOLD:
        a00 = f.jet("p", 0, 0)
        k2 = declared.multiplicity
        if a00 == 0.0:
            raise ClassificationError("fold requires P(0,0) != 0")
        for i in range(k2 - 1):
            if f.jet("q", i, 0) != 0.0:
                raise ClassificationError(f"Q has x^{i} term below the declared contact order")
        lead = f.jet("q", k2 - 1, 0)
        if lead == 0.0:
            raise ClassificationError(f"Q lacks the x^{k2 - 1} contact term")
        prod = a00 * lead
        invisible = prod < 0.0 if side == "upper" else prod > 0.0
        if not invisible:
            raise ClassificationError(
                f"contact is visible on the {side} side (P(0,0)*Q_x^{k2 - 1} sign)")
        return replace(declared, validated="checked")

    if declared.kind == EFOCUS:
        a10, a01 = f.jet("p", 1, 0), f.jet("p", 0, 1)
        b10, b01 = f.jet("q", 1, 0), f.jet("q", 0, 1)
        disc = (a10 - b01) ** 2 + 4.0 * a01 * b10
        if disc >= 0.0:
            raise ClassificationError("linear part is not monodromic (discriminant >= 0)")
        return replace(declared, validated="checked")

    if declared.kind == NFOCUS:
        # normal form (-y + y P1, f(x) + y g(x) + y^2 Q0), f = a x^(2n-1) + ...
        if f.jet("p", 1, 0) != 0.0 or f.jet("p", 0, 1) != -1.0 or f.jet("p", 0, 0) != 0.0:
            raise ClassificationError("P is not in nilpotent normal form (-y + y*P1)")
        if f.jet("q", 1, 0) != 0.0 or f.jet("q", 0, 1) != 0.0:
            raise ClassificationError("Q has a nonzero linear part")
        n = declared.n
        for i in range(2 * n - 1):
            if f.jet("q", i, 0) != 0.0:
                raise ClassificationError(f"f(x) has an x^{i} term below x^{2 * n - 1}")
        a = f.jet("q", 2 * n - 1, 0)
        if a <= 0.0:
            raise ClassificationError("nilpotent focus requires a > 0 in f(x) = a x^(2n-1) + ...")
        return replace(declared, validated="checked")

    if declared.kind == CUSP:
        # normal form (f(y) + x g(y) + x^2 P0, x + x Q1), f = a y^(2n) + ..., a < 0
        if f.jet("q", 1, 0) == 0.0 or f.jet("q", 0, 1) != 0.0 or f.jet("q", 0, 0) != 0.0:
            raise ClassificationError("Q is not in cusp normal form (x + x*Q1)")
        if f.jet("p", 1, 0) != 0.0 or f.jet("p", 0, 1) != 0.0 or f.jet("p", 0, 0) != 0.0:
            raise ClassificationError("P is not in cusp normal form (nilpotent linear part)")
        n = declared.n
        for j in range(2 * n):
            if f.jet("p", 0, j) != 0.0:
                raise ClassificationError(f"f(y) has a y^{j} term below y^{2 * n}")
        a = f.jet("p", 0, 2 * n)
        if a >= 0.0:
            raise ClassificationError("cusp orientation requires a < 0 in f(y) = a y^(2n) + ...")
        return replace(declared, validated="checked")

    # global kinds: nothing to read off a polynomial jet
    return replace(declared, validated="unchecked")


# --------------------------------------------------------------------------
# model-backed sides (analytic half-return and flight-time forms)
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ModelMap:
    """Analytic half-return map model.

    form 'smooth':  phi(x) = sum(coeffs[i] * x**(i+1)) with coeffs[0] <= 0.
    form 'dulac':   phi(x) = alpha * x**r + c2 * x**(r + ell), alpha < 0.
    ``orientation`` is the sign of the flight time on this side and must
    match the paired ModelFlight.
    """

    form: str
    coeffs: tuple[float, ...] = ()
    alpha: float = 0.0
    r: float = 0.0
    c2: float = 0.0
    ell: float = 0.0
    orientation: int = 1

    def __post_init__(self):
        if self.form == "smooth":
            if not self.coeffs:
                raise ConfigError("smooth map requires series coefficients")
            if self.coeffs[0] > 0.0:
                raise ConfigError("smooth map requires alpha_1 <= 0")
        elif self.form == "dulac":
            if self.alpha >= 0.0:
                raise ConfigError("dulac map requires alpha < 0")
            if self.r <= 0.0:
                raise ConfigError("dulac map requires r > 0")
            if self.c2 != 0.0 and self.ell <= 0.0:
                raise ConfigError("dulac remainder requires ell > 0")
        else:
            raise ConfigError(f"unknown map form {self.form!r}")
        if self.orientation not in (-1, 1):
            raise ConfigError("orientation must be +-1")

    def __call__(self, x: float) -> float:
        if x <= 0.0:
            raise ValueError("model map evaluated at x <= 0")
        if self.form == "smooth":
            acc = 0.0
            for c in reversed(self.coeffs):
                acc = (acc + c) * x
            return acc
        val = self.alpha * x ** self.r
        if self.c2 != 0.0:
            val += self.c2 * x ** (self.r + self.ell)
        return val


@dataclass(frozen=True)
class ModelFlight:
    """Analytic flight-time model.

    form 'constant': tau(x) = sign * (T0 + coef * x**exponent)   (exponent > 0)
    form 'power':    tau(x) = sign * T0 * x**exponent            (exponent != 0)
    form 'log':      tau(x) = sign * (-T0 * log(x)),  T0 > 0
    """

    form: str
    T0: float
    sign: int = 1
    exponent: float = 0.0
    coef: float = 0.0

    def __post_init__(self):
        if self.sign not in (-1, 1):
            raise ConfigError("flight sign must be +-1")
        if self.form == "log":
            if self.T0 <= 0.0:
                raise ConfigError("log flight requires T0 > 0")
        elif self.form == "power":
            if self.exponent == 0.0:
                raise ConfigError("power flight requires a nonzero exponent")
            if self.T0 <= 0.0:
                raise ConfigError("power flight requires T0 > 0")
        elif self.form == "constant":
            if self.coef != 0.0 and self.exponent <= 0.0:
                raise ConfigError("constant-flight correction requires exponent > 0")
        else:
            raise ConfigError(f"unknown flight form {self.form!r}")

    def __call__(self, x: float) -> float:
        if x <= 0.0:
            raise ValueError("model flight evaluated at x <= 0")
        if self.form == "constant":
            mag = self.T0 + self.coef * x ** self.exponent
        elif self.form == "power":
            mag = self.T0 * x ** self.exponent
        else:
            mag = -self.T0 * math.log(x)
        return self.sign * mag


@dataclass(frozen=True)
class FlowComponent:
    """Flow-backed side: a polynomial field plus its declared class."""

    field: PlanarField
    klass: Optional[ComponentClass] = None
    # optional first integral (coefficient table) used by drift diagnostics
    first_integral: Optional[Coeffs] = None

    backend = "flow"

    def __post_init__(self):
        if self.first_integral is not None:
            object.__setattr__(self, "first_integral", _freeze_table(self.first_integral))


@dataclass(frozen=True)
class ModelComponent:
    """Model-backed side: analytic half-return map and flight time."""

    phi: ModelMap
    tau: ModelFlight
    klass: Optional[ComponentClass] = None

    backend = "model"

    def __post_init__(self):
        if self.phi.orientation != self.tau.sign:
            raise ConfigError("model map orientation must match the flight-time sign")


Component = Union[FlowComponent, ModelComponent]


@dataclass(frozen=True)
class PiecewiseSystem:
    """Upper/lower component pair with switching line y=0 and translation family.

    ``x_window = (x_floor, x0)`` is the interval where the half-return maps
    are trusted; ``b`` is the current translation of the upper component
    (operations take b explicitly when sweeping the family).
    """

    upper: Component
    lower: Component
    b: float = 0.0
    x_window: tuple[float, float] = (1e-6, 0.5)
    limits: object = None  # Optional[flow.IntegrationLimits]; None = defaults
    name: str = ""

    def __post_init__(self):
        floor, top = self.x_window
        if not (0.0 < floor < top):
            raise ConfigError("x_window must satisfy 0 < x_floor < x0")
        object.__setattr__(self, "x_window", (float(floor), float(top)))

    def component(self, side: str) -> Component:
        if side == "upper":
            return self.upper
        if side == "lower":
            return self.lower
        raise ValueError(f"side must be 'upper' or 'lower', got {side!r}")


# --------------------------------------------------------------------------
# builtin gallery
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class GalleryEntry:
    """Builder plus sweep metadata for one benchmark pairing."""

    name: str
    build: Callable[..., PiecewiseSystem]
    params: tuple[tuple[str, float], ...] = ()
    # recommended sweep grid (b_max, ratio, count); sign of b comes from sign data
    grid: tuple[float, float, int] = (1e-2, 0.5, 20)
    summary: str = ""


def _fold_up() -> FlowComponent:
    return FlowComponent(
        PlanarField(((-1.0,),), ((0.0,), (2.0,))),
        ComponentClass.fold(2),
        first_integral=((0.0, 1.0), (0.0, 0.0), (1.0, 0.0)),  # H = y + x^2
    )


def _fold_down_sym() -> FlowComponent:
    return FlowComponent(
        PlanarField(((1.0,),), ((0.0,), (2.0,))),
        ComponentClass.fold(2),
        first_integral=((0.0, 1.0), (0.0, 0.0), (-1.0, 0.0)),  # H = y - x^2
    )


def _fold_down_broken() -> FlowComponent:
    return FlowComponent(
        PlanarField(((1.0,),), ((0.0,), (2.0,), (3.0,))),
        ComponentClass.fold(2),
        first_integral=((0.0, 1.0), (0.0, 0.0), (-1.0, 0.0), (-1.0, 0.0)),  # H = y - x^2 - x^3
    )


def _build_fold_fold_sym() -> PiecewiseSystem:
    return PiecewiseSystem(_fold_up(), _fold_down_sym(), x_window=(1e-6, 0.3),
                           name="fold_fold_sym")


def _build_fold_fold_broken() -> PiecewiseSystem:
    # lower level sets y = x^2 + x^3 + C stop returning at x = 1/3: window tops out below that
    return PiecewiseSystem(_fold_up(), _fold_down_broken(), x_window=(1e-6, 0.3),
                           name="fold_fold_broken")


def _tight_limits():
    # fold-side orbits launched at abscissa x only rise to |y| ~ x^2; resolving
    # cycles near the window floor needs the event collar well below that
    from .flow import IntegrationLimits

    return IntegrationLimits(rel_tol=1e-10, abs_tol=1e-15, event_tol=1e-15)


def _build_efocus_fold(eps: float = 0.1) -> PiecewiseSystem:
    upper = FlowComponent(
        PlanarField(((0.0, -1.0), (eps, 0.0)), ((0.0, eps), (1.0, 0.0))),
        ComponentClass.efocus(),
    )
    # cycle position scales like 6.4*b for eps=0.1; the floor must sit below it
    # for the smallest sweep parameters, hence 2e-8 instead of the default
    return PiecewiseSystem(upper, _fold_down_sym(), x_window=(2e-8, 0.5),
                           limits=_tight_limits(), name="efocus_fold")


def _build_efocus_efocus(eps: float = 0.0) -> PiecewiseSystem:
    mk = lambda: FlowComponent(
        PlanarField(((0.0, -1.0), (eps, 0.0)), ((0.0, eps), (1.0, 0.0))),
        ComponentClass.efocus(),
    )
    return PiecewiseSystem(mk(), mk(), x_window=(1e-6, 0.4), name="efocus_efocus")


def _build_nfocus_fold() -> PiecewiseSystem:
    upper = FlowComponent(
        PlanarField(((0.0, -1.0),), ((0.0,), (0.0,), (0.0,), (1.0,))),
        ComponentClass.nfocus(n=2, case="i"),
        first_integral=((0.0, 0.0, 0.5), (0.0, 0.0, 0.0), (0.0, 0.0, 0.0),
                        (0.0, 0.0, 0.0), (0.25, 0.0, 0.0)),  # H = y^2/2 + x^4/4
    )
    # flight time ~ 3.7/x: keep the floor where it stays under the default time cap
    return PiecewiseSystem(upper, _fold_down_broken(), x_window=(1e-5, 0.3),
                           name="nfocus_fold")


def _cusp_upper(c: float) -> FlowComponent:
    h = None
    if c == 0.0:
        h = ((0.0, 0.0, 0.0, 1.0 / 3.0), (0.0, 0.0, 0.0, 0.0), (0.5, 0.0, 0.0, 0.0))  # x^2/2+y^3/3
    return FlowComponent(
        PlanarField(((0.0, 0.0, -1.0), (0.0, c, 0.0)), ((0.0,), (1.0,))),
        ComponentClass.cusp(n=1),
        first_integral=h,
    )


def _build_cusp_fold() -> PiecewiseSystem:
    return PiecewiseSystem(_cusp_upper(0.0), _fold_down_broken(), x_window=(1e-6, 0.3),
                           name="cusp_fold")


def _build_cusp_fold_broken(c: float = 0.3) -> PiecewiseSystem:
    # the x^(4/3) residue flips the displacement sign near x ~ (3 r2(pi))^(3/2);
    # the window must stop below that for H1(v) to hold on all of it
    return PiecewiseSystem(_cusp_upper(c), _fold_down_broken(), x_window=(2e-8, 0.12),
                           limits=_tight_limits(), name="cusp_fold_broken")


def _build_circle_orbit_fold() -> PiecewiseSystem:
    from .flow import IntegrationLimits

    upper = FlowComponent(
        PlanarField(((1.0, -1.0),), ((0.0,), (1.0,))),
        ComponentClass.periodic_orbit(contact=2, T0=2.0 * math.pi),
        first_integral=((0.0, -2.0, 1.0), (0.0, 0.0, 0.0), (1.0, 0.0, 0.0)),  # x^2+y^2-2y
    )
    # grazing returns dip below the section by only x^2/2 and amplify the
    # integrator's y-error into x-error by 1/x: keep the floor high and the
    # tolerances two orders tighter than the default
    limits = IntegrationLimits(rel_tol=1e-12, abs_tol=1e-13, event_tol=1e-13)
    return PiecewiseSystem(upper, _fold_down_broken(), x_window=(1e-4, 0.3),
                           limits=limits, name="circle_orbit_fold")


def _build_model_polycycle_fold(r: float = 0.7, T0: float = 1.0) -> PiecewiseSystem:
    # both sides model-backed: the fold side is the pure map phi = -x with a
    # linearly vanishing flight, so sweeps can reach depths no integrated
    # fold could (its orbit only rises |y| ~ x^2 above the section)
    upper = ModelComponent(
        ModelMap("dulac", alpha=-1.0, r=r, orientation=1),
        ModelFlight("log", T0=T0, sign=1),
        ComponentClass.polycycle(r, T0=T0),
    )
    lower = ModelComponent(
        ModelMap("smooth", coeffs=(-1.0,), orientation=-1),
        ModelFlight("power", T0=2.0, sign=-1, exponent=1.0),
        ComponentClass.fold(2),
    )
    return PiecewiseSystem(upper, lower, x_window=(1e-30, 0.45),
                           name="model_polycycle_fold")


def _build_model_polycycle_polycycle(r_up: float = 1.4, r_down: float = 1.25,
                                     T0_up: float = 1.0, T0_down: float = 1.0) -> PiecewiseSystem:
    upper = ModelComponent(
        ModelMap("dulac", alpha=-1.0, r=r_up, orientation=-1),
        ModelFlight("log", T0=T0_up, sign=-1),
        ComponentClass.polycycle(r_up, T0=T0_up),
    )
    lower = ModelComponent(
        ModelMap("dulac", alpha=-1.0, r=r_down, orientation=1),
        ModelFlight("log", T0=T0_down, sign=1),
        ComponentClass.polycycle(r_down, T0=T0_down),
    )
    return PiecewiseSystem(upper, lower, x_window=(1e-30, 0.45),
                           name="model_polycycle_polycycle")


GALLERY: dict[str, GalleryEntry] = {
    e.name: e for e in (
        GalleryEntry("fold_fold_sym", _build_fold_fold_sym,
                     summary="symmetric invisible fold pair (annular center)"),
        GalleryEntry("fold_fold_broken", _build_fold_fold_broken,
                     summary="fold pair with broken symmetry, V2 = -1"),
        GalleryEntry("efocus_fold", _build_efocus_fold, params=(("eps", 0.1),),
                     summary="elementary focus (trace 2*eps) over a symmetric fold"),
        GalleryEntry("efocus_efocus", _build_efocus_efocus, params=(("eps", 0.0),),
                     summary="elementary focus pair (center for eps=0)"),
        GalleryEntry("nfocus_fold", _build_nfocus_fold,
                     summary="nilpotent focus (-y, x^3) over the broken fold"),
        GalleryEntry("cusp_fold", _build_cusp_fold,
                     summary="symmetric cusp (-y^2, x) over the broken fold"),
        # grid floor sits 10x above the event-noise scale abs_tol/(2 x*) of
        # the fold side, below which displacement signs are unreliable
        GalleryEntry("cusp_fold_broken", _build_cusp_fold_broken, params=(("c", 0.3),),
                     grid=(2e-4, 0.6, 20),
                     summary="cusp with x*y asymmetry over the broken fold"),
        # grid floor keeps the cycle's displacement signal clear of the
        # grazing-return noise floor rel_tol/x*
        GalleryEntry("circle_orbit_fold", _build_circle_orbit_fold, grid=(1e-2, 0.6, 20),
                     summary="unit-speed circular orbit tangent to the axis over the broken fold"),
        GalleryEntry("model_polycycle_fold", _build_model_polycycle_fold,
                     params=(("r", 0.7), ("T0", 1.0)), grid=(1e-5, 0.5, 20),
                     summary="model polycycle map (r=0.7, log flight) over a model fold"),
        # deep grid: the Dulac gap r_M - r_m = 0.15 leaves |b|^0.12 corrections
        # that only drop below the comparison tolerances around |b| ~ 1e-20
        GalleryEntry("model_polycycle_polycycle", _build_model_polycycle_polycycle,
                     params=(("r_up", 1.4), ("r_down", 1.25), ("T0_up", 1.0), ("T0_down", 1.0)),
                     grid=(1e-20, 0.5, 20),
                     summary="model polycycle pair (r=1.4 over r=1.25, log flights)"),
    )
}


def gallery_names() -> tuple[str, ...]:
    return tuple(GALLERY)


def make_builtin(name: str, validate: bool = True, **params) -> PiecewiseSystem:
    """Build a validated gallery system by name.

    Unknown keyword parameters, or parameters violating the component
    invariants, raise ConfigError. With ``validate`` the half-return
    hypothesis is checked numerically on the system's window.
    """
    entry = GALLERY.get(name)
    if entry is None:
        raise ConfigError(f"unknown gallery system {name!r}; known: {', '.join(GALLERY)}")
    allowed = {k for k, _ in entry.params}
    unknown = set(params) - allowed
    if unknown:
        raise ConfigError(f"{name} does not take parameters {sorted(unknown)}")
    system = entry.build(**params)
    if validate:
        validate_h1(system)
    return system


def validate_h1(system: PiecewiseSystem, n_samples: int = 8) -> None:
    """Numerically spot-check the half-return hypothesis on the window.

    At log-spaced abscissas strictly inside (x_floor, x0), both half-returns
    must succeed with phi < 0 and opposite-signed flight times. Imported
    lazily to keep this module free of integrator dependencies.
    """
    from . import returns as _returns  # deferred: returns imports this module

    floor, top = system.x_window
    ratio = (top / floor) ** (1.0 / (n_samples + 1))
    xs = [floor * ratio ** (k + 1) for k in range(n_samples)]
    for x in xs:
        up = _returns.half_return(system, "upper", x)
        dn = _returns.half_return(system, "lower", x)
        if not (up.phi < 0.0 and dn.phi < 0.0):
            raise ConfigError(f"H1 violated at x={x:g}: phi not negative on both sides")
        if up.tau * dn.tau >= 0.0:
            raise ConfigError(f"H1 violated at x={x:g}: flight times do not oppose")


# --------------------------------------------------------------------------
# JSON descriptors
# --------------------------------------------------------------------------

def component_class_to_json(klass: Optional[ComponentClass]) -> Optional[dict]:
    if klass is None:
        return None
    out = {"kind": klass.kind}
    for key in ("multiplicity", "n", "case", "a", "b", "beta", "contact", "r", "T0"):
        val = getattr(klass, key)
        if val is not None:
            out[key] = val
    return out


def component_class_from_json(data: Optional[dict]) -> Optional[ComponentClass]:
    if data is None:
        return None
    fields_ = {k: v for k, v in data.items() if k != "kind"}
    try:
        return ComponentClass(data["kind"], **fields_)
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"bad component class descriptor: {exc}") from exc


def component_to_json(comp: Component) -> dict:
    if isinstance(comp, FlowComponent):
        out = {
            "backend": "flow",
            "P": [list(row) for row in comp.field.coeffs_p],
            "Q": [list(row) for row in comp.field.coeffs_q],
        }
        if comp.klass is not None:
            out["class"] = component_class_to_json(comp.klass)
        return out
    phi = {"form": comp.phi.form}
    if comp.phi.form == "smooth":
        phi["coeffs"] = list(comp.phi.coeffs)
    else:
        phi.update(alpha=comp.phi.alpha, r=comp.phi.r, c2=comp.phi.c2, ell=comp.phi.ell)
    tau = {"form": comp.tau.form, "T0": comp.tau.T0, "sign": comp.tau.sign}
    if comp.tau.form == "constant":
        tau.update(coef=comp.tau.coef, exponent=comp.tau.exponent)
    if comp.tau.form == "power":
        tau["exponent"] = comp.tau.exponent
    out = {"backend": "model", "phi": phi, "tau": tau}
    if comp.klass is not None:
        out["class"] = component_class_to_json(comp.klass)
    return out


def component_from_json(data: dict) -> Component:
    backend = data.get("backend")
    klass = component_class_from_json(data.get("class"))
    if backend == "flow":
        try:
            field_ = PlanarField(data["P"], data["Q"])
        except KeyError as exc:
            raise ConfigError(f"flow component missing table {exc}") from exc
        return FlowComponent(field_, klass)
    if backend == "model":
        try:
            phi_d = dict(data["phi"])
            tau_d = dict(data["tau"])
        except KeyError as exc:
            raise ConfigError(f"model component missing {exc}") from exc
        form = phi_d.pop("form")
        sign = int(tau_d.get("sign", 1))
        if form == "smooth":
            phi = ModelMap("smooth", coeffs=tuple(phi_d["coeffs"]), orientation=sign)
        elif form == "dulac":
            phi = ModelMap("dulac", alpha=float(phi_d["alpha"]), r=float(phi_d["r"]),
                           c2=float(phi_d.get("c2", 0.0)), ell=float(phi_d.get("ell", 0.0)),
                           orientation=sign)
        else:
            raise ConfigError(f"unknown model map form {form!r}")
        tau = ModelFlight(tau_d["form"], T0=float(tau_d["T0"]), sign=sign,
                          exponent=float(tau_d.get("exponent", 0.0)),
                          coef=float(tau_d.get("coef", 0.0)))
        return ModelComponent(phi, tau, klass)
    raise ConfigError(f"component backend must be 'flow' or 'model', got {backend!r}")


def system_to_json(system: PiecewiseSystem) -> dict:
    return {
        "upper": component_to_json(system.upper),
        "lower": component_to_json(system.lower),
        "window": list(system.x_window),
    }


def system_from_json(data: dict) -> PiecewiseSystem:
    try:
        upper = component_from_json(data["upper"])
        lower = component_from_json(data["lower"])
    except KeyError as exc:
        raise ConfigError(f"system descriptor missing side {exc}") from exc
    window = tuple(data.get("window", (1e-6, 0.5)))
    return PiecewiseSystem(upper, lower, x_window=window, name=str(data.get("name", "")))
