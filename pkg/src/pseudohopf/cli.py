"""Command-line entry point: analyze, sweep, table, gallery, predict.

Exit codes: 0 success (including the theorem-conformant "no cycle for this
sign of b"), 1 configuration errors, 2 numerical failures. All emitted
artifacts are deterministic: floats are formatted with 17 significant
digits, JSON keys are sorted, line endings are '\n'.
"""

from __future__ import annotations

import json
import math
import sys
from pathlib import Path
from typing import Optional

import click
import numpy as np

from . import asymptotics, bifurcation, returns, sweepfit
from .asymptotics import CONSTANT, LOG, NEG_POWER, POWER, AsymptoticLaw
from .errors import (
    ConfigError,
    DegenerateCenter,
    NoSignChange,
    PseudoHopfError,
)
from .fields import (
    CUSP,
    EFOCUS,
    FOLD,
    GALLERY,
    NFOCUS,
    PERIODIC_ORBIT,
    FlowComponent,
    ModelComponent,
    ModelFlight,
    PiecewiseSystem,
    make_builtin,
    system_from_json,
)

DEFAULT_TABLE_ROWS = (
    "fold_fold_broken",
    "efocus_fold",
    "nfocus_fold",
    "circle_orbit_fold",
    "model_polycycle_fold",
    "model_polycycle_polycycle",
)


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _dump_json(obj, path: Optional[Path] = None) -> str:
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if path is not None:
        path.write_text(text, encoding="utf-8", newline="\n")
    return text


def law_to_json(law: Optional[AsymptoticLaw]) -> Optional[dict]:
    if law is None:
        return None
    return {
        "law_family": law.family,
        "of": law.of,
        "provenance": law.provenance,
        "coefficient": law.coefficient,
        "exponent": law.exponent,
        "T0": law.T0,
        "offset": law.offset,
        "case_tag": law.case_tag,
        "note": law.note,
    }


def _verdict_to_json(v: Optional[sweepfit.Verdict]) -> Optional[dict]:
    if v is None:
        return None
    return {
        "passed": v.passed,
        "family_match": v.family_match,
        "exponent_error": v.exponent_error,
        "coefficient_error": v.coefficient_error,
        "details": v.details,
    }


def _load_system(gallery: Optional[str], config: Optional[str],
                 params: dict) -> tuple[PiecewiseSystem, Optional[sweepfit.SweepGrid]]:
    if (gallery is None) == (config is None):
        raise ConfigError("provide exactly one of --gallery NAME or --config FILE")
    if gallery is not None:
        system = make_builtin(gallery, **params)
        g = GALLERY[gallery].grid
        return system, sweepfit.SweepGrid(b_max=g[0], ratio=g[1], count=g[2])
    data = json.loads(Path(config).read_text(encoding="utf-8"))
    sys_desc = data.get("system", data)
    if isinstance(sys_desc, str):
        system = make_builtin(sys_desc, **params)
        g = GALLERY[sys_desc].grid
        grid = sweepfit.SweepGrid(b_max=g[0], ratio=g[1], count=g[2])
    else:
        system = system_from_json(sys_desc)
        grid = None
    gd = data.get("grid")
    if gd:
        grid = sweepfit.SweepGrid(b_max=float(gd["b_max"]), ratio=float(gd["ratio"]),
                                  count=int(gd["count"]))
    return system, grid


def _parse_grid(spec: Optional[str]) -> Optional[sweepfit.SweepGrid]:
    if spec is None:
        return None
    try:
        bmax, q, n = spec.split(",")
        return sweepfit.SweepGrid(b_max=float(bmax), ratio=float(q), count=int(n))
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"--grid expects 'bmax,q,n', got {spec!r}") from exc


# --------------------------------------------------------------------------
# prediction pipeline from component data
# --------------------------------------------------------------------------

def _side_map_and_flight(system: PiecewiseSystem, side: str):
    """Per-side ((alpha1_series, r), flight, alpha_noise) from component theory.

    Flow-backed sides measure their flight constant at a probe abscissa;
    periodic-orbit maps measure their contraction too (no closed form),
    which is why an uncertainty scale for alpha1 comes back alongside.
    """
    comp = system.component(side)
    if isinstance(comp, ModelComponent):
        if comp.phi.form == "smooth":
            return (comp.phi.coeffs[0], 1.0), comp.tau, 0.0
        return (comp.phi.alpha, comp.phi.r), comp.tau, 0.0
    assert isinstance(comp, FlowComponent)
    klass = comp.klass
    if klass is None:
        raise ConfigError(f"{side} side needs a declared component class for predictions")
    floor, top = system.x_window
    xp = min(1e-3, math.sqrt(floor * top))
    xp = max(xp, floor * 4.0)
    sample = returns.half_return(system, side, xp)
    t_abs = abs(sample.tau)
    if klass.kind == FOLD:
        return (-1.0, 1.0), ModelFlight("power", T0=t_abs / xp, sign=1, exponent=1.0), 0.0
    if klass.kind == EFOCUS:
        f = comp.field
        a1 = asymptotics.efocus_alpha1(f.jet("p", 1, 0), f.jet("p", 0, 1),
                                       f.jet("q", 1, 0), f.jet("q", 0, 1))
        return (-a1, 1.0), ModelFlight("constant", T0=t_abs, sign=1), 0.0
    if klass.kind == NFOCUS:
        n = klass.n
        a = comp.field.jet("q", 2 * n - 1, 0)
        b_coef = klass.b if klass.case == "ii" else 0.0
        beta = klass.beta if klass.case == "ii" else None
        a1 = asymptotics.nfocus_alpha1(a, b_coef or 0.0, n, beta)
        return (-a1, 1.0), ModelFlight("power", T0=t_abs * xp ** (n - 1), sign=1,
                                       exponent=float(1 - n)), 0.0
    if klass.kind == CUSP:
        n = klass.n
        e = (2 * n - 1) / (2 * n + 1)
        return (-1.0, 1.0), ModelFlight("power", T0=t_abs * xp ** e, sign=1, exponent=-e), 0.0
    if klass.kind == PERIODIC_ORBIT:
        xs = np.geomspace(max(floor * 2, 1e-3), min(top / 3, 1e-2), 10)
        est = returns.estimate_local_coeffs(system, side, xs, "smooth")
        t0 = klass.T0 if klass.T0 is not None else t_abs
        noise = max(1e-8, 3.0 * est.residual)
        return (est.alpha[0], 1.0), ModelFlight("constant", T0=t0, sign=1), noise
    raise ConfigError(f"no flow-backed prediction recipe for component kind {klass.kind!r}")


def predict_laws(system: PiecewiseSystem) -> dict:
    """Predicted position/period laws from component data (plus cheap probes).

    Returns a dict with 'position' and 'period' laws (either may be None
    when the relevant hypothesis degenerates, e.g. V1 = 0 under the Dulac
    dispatch) and a 'notes' list explaining refusals.
    """
    notes = []
    (a_up, r_up), flight_up, noise_up = _side_map_and_flight(system, "upper")
    (a_dn, r_dn), flight_dn, noise_dn = _side_map_and_flight(system, "lower")
    triple = bifurcation.sign_data(system)
    position = None
    if r_up == 1.0 and r_dn == 1.0:
        v1 = triple.delta * (a_up - a_dn)
        if abs(v1) > max(1e-9, 10.0 * (noise_up + noise_dn)):
            position = asymptotics.predict_position_smooth(a_up, v1, 1)
        else:
            floor, top = system.x_window
            lo = max(floor * 10.0, 3e-4)
            xs = list(np.geomspace(lo, min(30.0 * lo, top / 3.0), 12))
            vals = [bifurcation.displacement(system, x, 0.0) for x in xs]
            try:
                lead = asymptotics.measure_displacement_leading(xs, vals)
                position = asymptotics.predict_position_smooth(
                    a_up, lead.V, int(lead.exponent))
            except PseudoHopfError as exc:
                notes.append(f"smooth predictor refused: {exc}")
    else:
        try:
            position = asymptotics.predict_position_dulac(
                (a_up, a_dn), (r_up, r_dn), triple.delta)
        except ValueError as exc:
            notes.append(f"dulac predictor refused: {exc}")
    period = None
    if position is not None and position.coefficient is not None:
        try:
            period = asymptotics.predict_period_law(
                system.upper.klass, system.lower.klass, position,
                {"upper": flight_up, "lower": flight_dn},
                maps={"upper": (a_up, r_up), "lower": (a_dn, r_dn)})
        except ValueError as exc:
            notes.append(f"period composition refused: {exc}")
    return {"position": position, "period": period, "notes": notes,
            "sign_data": triple, "maps": {"upper": (a_up, r_up), "lower": (a_dn, r_dn)}}


# --------------------------------------------------------------------------
# sweep + fit + compare pipeline
# --------------------------------------------------------------------------

def _fit_family(predicted: Optional[AsymptoticLaw], samples):
    """Fit the predicted family on the asymptotic half (classify when unknown)."""
    half = sweepfit.asymptotic_half(samples)
    if predicted is None:
        return sweepfit.classify_law(half if len(half) >= 10 else samples)
    if predicted.family in (POWER, NEG_POWER):
        return sweepfit.fit_power(half)
    if predicted.family == LOG:
        return sweepfit.fit_log(half)
    return sweepfit.fit_constant(half)


def run_sweep_report(system: PiecewiseSystem, grid: sweepfit.SweepGrid,
                     tol_exp: float, tol_coef: float, name: str = "") -> dict:
    result = sweepfit.sweep(system, grid)
    bs_x = [(s.b, s.x_star) for s in result.samples]
    bs_t = [(s.b, s.period) for s in result.samples]

    pred = predict_laws(system)
    pos_fit = _fit_family(pred["position"], bs_x)
    per_fit = _fit_family(pred["period"], bs_t)
    pos_full = sweepfit.fit_power(bs_x)
    verdict_pos = (sweepfit.compare(pred["position"], pos_fit, tol_exp, tol_coef)
                   if pred["position"] is not None else None)
    verdict_per = (sweepfit.compare(pred["period"], per_fit, tol_exp, tol_coef)
                   if pred["period"] is not None else None)

    return {
        "report": "sweep",
        "system": name or system.name or "inline",
        "grid": {"b_max": grid.b_max, "ratio": grid.ratio, "count": grid.count},
        "n_success": len(result.samples),
        "failures": [{"b": b, "error": msg} for b, msg in result.failures],
        "notes": pred["notes"],
        "position": {
            "predicted": law_to_json(pred["position"]),
            "fitted": law_to_json(pos_fit.law),
            "fitted_full_window": law_to_json(pos_full.law),
            "r_squared": pos_fit.r_squared,
            "max_rel_residual": pos_fit.max_rel_residual,
            "verdict": _verdict_to_json(verdict_pos),
        },
        "period": {
            "predicted": law_to_json(pred["period"]),
            "fitted": law_to_json(per_fit.law),
            "r_squared": per_fit.r_squared,
            "max_rel_residual": per_fit.max_rel_residual,
            "verdict": _verdict_to_json(verdict_per),
        },
        "_samples": result.samples,
    }


def write_sweep_artifacts(report: dict, out: Path, stem: str) -> None:
    samples = report.pop("_samples")
    out.mkdir(parents=True, exist_ok=True)
    csv_lines = ["b,x_star,period,stability,delta_residual"]
    csv_lines += [s.csv_row() for s in samples]
    (out / f"{stem}.csv").write_text("\n".join(csv_lines) + "\n",
                                     encoding="utf-8", newline="\n")
    pos = [f"{_fmt(math.log(abs(s.b)))},{_fmt(math.log(s.x_star))}" for s in samples]
    per = [f"{_fmt(math.log(abs(s.b)))},{_fmt(math.log(s.period))}" for s in samples]
    semi = [f"{_fmt(-math.log(abs(s.b)))},{_fmt(s.period)}" for s in samples]
    (out / f"{stem}_position_loglog.csv").write_text(
        "ln_abs_b,ln_x_star\n" + "\n".join(pos) + "\n", encoding="utf-8", newline="\n")
    (out / f"{stem}_period_loglog.csv").write_text(
        "ln_abs_b,ln_period\n" + "\n".join(per) + "\n", encoding="utf-8", newline="\n")
    (out / f"{stem}_period_semilog.csv").write_text(
        "neg_ln_abs_b,period\n" + "\n".join(semi) + "\n", encoding="utf-8", newline="\n")
    _dump_json(report, out / f"{stem}.json")


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------

@click.group()
def main():
    """Crossing-cycle laboratory for planar piecewise-smooth systems."""


def _system_options(fn):
    fn = click.option("--gallery", type=str, default=None, help="builtin system name")(fn)
    fn = click.option("--config", type=click.Path(exists=True, dir_okay=False),
                      default=None, help="JSON run configuration")(fn)
    fn = click.option("--param", "params", type=(str, float), multiple=True,
                      help="gallery parameter override, e.g. --param eps 0.1")(fn)
    return fn


@main.command()
@_system_options
@click.option("--b", "b_value", type=float, required=True, help="translation parameter")
@click.option("--out", type=click.Path(file_okay=False), default=None)
def analyze(gallery, config, params, b_value, out):
    """Sign data, sliding classification, and the cycle record at one b."""
    try:
        system, _ = _load_system(gallery, config, dict(params))
    except (ConfigError, OSError, json.JSONDecodeError) as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(1)
    report = {"report": "analyze", "system": system.name or gallery or "inline",
              "b": b_value, "sign_data": None, "sliding": None, "cycle": None,
              "no_cycle": False, "error": None}
    code = 0
    try:
        triple = bifurcation.sign_data(system)
        report["sign_data"] = {"delta": triple.delta, "sigma": triple.sigma, "mu": triple.mu}
        try:
            seg = bifurcation.sliding_segment(system, b_value)
            report["sliding"] = {"interval": list(seg.interval),
                                 "attractivity": seg.attractivity}
        except PseudoHopfError as exc:
            report["sliding"] = {"error": str(exc)}
        try:
            rec = bifurcation.find_crossing_cycle(system, b_value)
            report["cycle"] = {"b": rec.b, "x_star": rec.x_star, "period": rec.period,
                               "stability": rec.stability,
                               "delta_residual": rec.delta_residual,
                               "bracket": list(rec.bracket),
                               "extra_roots": list(rec.extra_roots)}
        except NoSignChange:
            report["no_cycle"] = True
    except (DegenerateCenter, PseudoHopfError) as exc:
        report["error"] = f"{type(exc).__name__}: {exc}"
        code = 2
    text = _dump_json(report, Path(out) / "analyze.json" if out else None)
    if out:
        Path(out).mkdir(parents=True, exist_ok=True)
        _dump_json(report, Path(out) / "analyze.json")
    click.echo(text, nl=False)
    sys.exit(code)


@main.command()
@_system_options
@click.option("--grid", "grid_spec", type=str, default=None, help="bmax,q,n")
@click.option("--out", type=click.Path(file_okay=False), default=".")
@click.option("--tol-exp", type=float, default=0.02)
@click.option("--tol-coef", type=float, default=0.02)
def sweep(gallery, config, params, grid_spec, out, tol_exp, tol_coef):
    """Sweep b, fit position/period laws, compare against predictions."""
    try:
        system, default_grid = _load_system(gallery, config, dict(params))
        grid = _parse_grid(grid_spec) or default_grid or sweepfit.SweepGrid()
    except (ConfigError, OSError, json.JSONDecodeError) as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(1)
    try:
        report = run_sweep_report(system, grid, tol_exp, tol_coef,
                                  name=system.name or gallery or "inline")
    except PseudoHopfError as exc:
        click.echo(f"numerical failure: {exc}", err=True)
        sys.exit(2)
    stem = f"sweep_{report['system']}"
    write_sweep_artifacts(report, Path(out), stem)
    click.echo(_dump_json(report), nl=False)
    sys.exit(0)


@main.command()
@click.option("--rows", type=str, default=None, help="comma-separated gallery names")
@click.option("--out", type=click.Path(file_okay=False), default=None)
@click.option("--tol-exp", type=float, default=0.02)
@click.option("--tol-coef", type=float, default=0.02)
def table(rows, out, tol_exp, tol_coef):
    """Reproduce the verifiable leading-law table rows on the builtin gallery."""
    names = DEFAULT_TABLE_ROWS if rows is None else tuple(r.strip() for r in rows.split(","))
    unknown = [n for n in names if n not in GALLERY]
    if unknown:
        click.echo(f"config error: unknown gallery rows {unknown}", err=True)
        sys.exit(1)
    out_dir = Path(out) if out else None
    table_rows = []
    any_error = False
    for name in names:
        try:
            system = make_builtin(name)
            g = GALLERY[name].grid
            grid = sweepfit.SweepGrid(b_max=g[0], ratio=g[1], count=g[2])
            report = run_sweep_report(system, grid, tol_exp, tol_coef, name=name)
            if out_dir is not None:
                write_sweep_artifacts(dict(report), out_dir, f"sweep_{name}")
            report.pop("_samples", None)
            verdicts = [report["position"]["verdict"], report["period"]["verdict"]]
            ok = all(v is not None and v["passed"] for v in verdicts)
            table_rows.append({"name": name, "status": "pass" if ok else "fail",
                               "position": report["position"], "period": report["period"]})
            any_error |= not ok
        except PseudoHopfError as exc:
            table_rows.append({"name": name, "status": "error",
                               "error": f"{type(exc).__name__}: {exc}"})
            any_error = True
    report = {"report": "table", "rows": table_rows,
              "all_pass": not any_error}
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        _dump_json(report, out_dir / "table.json")

    def law_cells(block):
        pred, fit = block.get("predicted"), block.get("fitted")
        def one(law):
            if law is None:
                return "-"
            if law["law_family"] in (POWER, NEG_POWER):
                c = "?" if law["coefficient"] is None else f"{law['coefficient']:.4g}"
                e = "?" if law["exponent"] is None else f"{law['exponent']:.4g}"
                return f"{c}*|b|^{e}"
            if law["law_family"] == LOG:
                t = "?" if law["T0"] is None else f"{law['T0']:.4g}"
                return f"{t}*(-ln|b|)"
            t = "?" if law["T0"] is None else f"{law['T0']:.4g}"
            return f"const {t}"
        return one(pred), one(fit)

    header = f"{'system':>28} | {'position pred':>16} | {'position fit':>16} | " \
             f"{'period pred':>16} | {'period fit':>16} | verdicts"
    click.echo(header)
    click.echo("-" * len(header))
    for row in table_rows:
        if row["status"] == "error":
            click.echo(f"{row['name']:>28} | error: {row['error']}")
            continue
        pp, pf = law_cells(row["position"])
        tp, tf = law_cells(row["period"])
        vp = row["position"]["verdict"]
        vt = row["period"]["verdict"]
        flag = lambda v: "-" if v is None else ("pass" if v["passed"] else "FAIL")
        click.echo(f"{row['name']:>28} | {pp:>16} | {pf:>16} | {tp:>16} | {tf:>16} | "
                   f"pos={flag(vp)} per={flag(vt)}")
    click.echo(f"all_pass: {report['all_pass']}")
    sys.exit(0 if report["all_pass"] else 2)


@main.command()
def gallery():
    """List builtin systems."""
    for name, entry in GALLERY.items():
        params = ", ".join(f"{k}={v:g}" for k, v in entry.params)
        suffix = f" ({params})" if params else ""
        click.echo(f"{name:>28}{suffix}: {entry.summary}")


@main.command()
@_system_options
def predict(gallery, config, params):
    """Predicted laws from component data only (no sweep)."""
    try:
        system, _ = _load_system(gallery, config, dict(params))
    except (ConfigError, OSError, json.JSONDecodeError) as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(1)
    try:
        pred = predict_laws(system)
    except PseudoHopfError as exc:
        click.echo(f"numerical failure: {exc}", err=True)
        sys.exit(2)
    triple = pred["sign_data"]
    report = {
        "report": "predict",
        "system": system.name or gallery or "inline",
        "sign_data": {"delta": triple.delta, "sigma": triple.sigma, "mu": triple.mu},
        "position": law_to_json(pred["position"]),
        "period": law_to_json(pred["period"]),
        "notes": pred["notes"],
    }
    click.echo(_dump_json(report), nl=False)
    sys.exit(0)


if __name__ == "__main__":
    main()
