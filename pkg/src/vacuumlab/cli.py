"""Command-line front end.

Subcommands::

    vacuumlab verify      --config scenario.yaml [--seed N] [--out report.json] [--format json|csv]
    vacuumlab sweep       --config scenario.yaml [--out table.csv] [--format json|csv]
    vacuumlab plot-data   --config scenario.yaml [--quantity rho] [--axis x] [--out data.txt]
    vacuumlab media-check [--config media.yaml] [--cases 1000] [--v-cap 0.99] [--seed N]

Exit codes: 0 success, 1 a check failed, 2 the configuration could not be
read or parsed, 3 it parsed but failed validation.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from pathlib import Path

import numpy as np
from pydantic import ValidationError

from . import __version__
from .axisym import AxiPoint, eq_doublestar_residual, stationary4b_residual, stationary_g, uk_identity_residual
from .config import (
    ConfigParseError,
    MediaModel,
    PlotModel,
    Scenario,
    build_grid,
    build_solution,
    load_document,
    parse_scenario,
    psi_for,
    sample_chart_points,
)
from .conserved import SupportError, energy_density, energy_momentum, integrate_box
from .diagnostics import derived_state, sup_residuals
from .fieldcore import as_points, fd_oracle
from .relmedia import validation_suite

__all__ = ["main", "run_scenario", "convergence_sweep", "emit_plot_data", "media_check", "ScenarioError"]

EXIT_OK, EXIT_FAIL, EXIT_PARSE, EXIT_INVALID = 0, 1, 2, 3


class ScenarioError(ValueError):
    """A scenario that validated structurally but cannot be run as requested."""


def _finite_or_none(x):
    x = float(x)
    return x if math.isfinite(x) else None


# -- checks --------------------------------------------------------------------


def _check_system(sc: Scenario, sol, system: int) -> dict:
    name = f"system{system}"
    tol = sc.tolerance(name)
    rep = sup_residuals(sol, build_grid(sc.grid), system)
    return {
        "check": name,
        "tolerance": tol,
        "passed": all(v <= tol for v in rep.sup_normalized.values()),
        "sup": rep.sup,
        "sup_normalized": rep.sup_normalized,
        "samples": rep.samples,
        "skipped": rep.skipped,
    }


def _check_conserved(sc: Scenario, sol) -> dict:
    tol = sc.tolerance("conserved")
    try:
        rep = energy_momentum(sol, build_grid(sc.grid))
    except SupportError as exc:
        raise ScenarioError(f"conserved check needs a compactly supported field: {exc}") from exc
    charge_ratio = abs(rep.total_charge) / rep.abs_charge if rep.abs_charge > 0 else 0.0
    gap_ratio = abs(rep.dispersion_gap) / rep.total_energy if rep.total_energy > 0 else 0.0
    return {
        "check": "conserved",
        "tolerance": tol,
        "passed": charge_ratio <= tol and gap_ratio <= tol,
        "charge_ratio": charge_ratio,
        "dispersion_ratio": gap_ratio,
        **rep.to_dict(),
    }


def _check_axisym(sc: Scenario, rng: np.random.Generator) -> dict:
    spec = sc.solution
    psi = psi_for(spec)
    if psi is None:
        raise ScenarioError(f"axisym check is not defined for family {spec.family!r}")
    k = sc.physical_constants()
    s, z = sample_chart_points(sc.axisym, rng)
    p = AxiPoint(s, z)
    if spec.family == "uk":
        residuals = {"uk_identity": uk_identity_residual(spec.k, p)}
    elif spec.family == "ansatz4a":
        residuals = {"doublestar": eq_doublestar_residual(psi, spec.a0, spec.a, spec.b, p, k)}
    else:
        r1, r2 = stationary4b_residual(psi, stationary_g(psi, k), p, k)
        residuals = {"stationary_s": r1, "stationary_z": r2}
    tol = sc.tolerance("axisym")
    sup = {name: float(np.max(np.abs(r))) for name, r in residuals.items()}
    return {"check": "axisym", "tolerance": tol, "passed": all(v <= tol for v in sup.values()),
            "sup": sup, "samples": int(len(s))}


def _media_result(media: MediaModel, seed: int) -> dict:
    suite = validation_suite(media.cases, seed, media.v_cap)
    return {
        "check": "media",
        "passed": all(v["failed"] == 0 for v in suite.values()),
        "cases": media.cases,
        "v_cap": media.v_cap,
        "suite": suite,
    }


def run_scenario(sc: Scenario) -> dict:
    """Execute the scenario's checks in declaration order and assemble a report."""
    sol = build_solution(sc.solution, sc.physical_constants())
    rng = np.random.default_rng(sc.seed)
    results, timings = [], {}
    for check in sc.checks:
        t0 = time.perf_counter()
        if check in ("system1", "system2"):
            res = _check_system(sc, sol, int(check[-1]))
        elif check == "conserved":
            res = _check_conserved(sc, sol)
        elif check == "axisym":
            res = _check_axisym(sc, rng)
        else:
            res = _media_result(sc.media, sc.seed)
        timings[check] = time.perf_counter() - t0
        results.append(res)
    return {
        "artifact": "vacuumlab",
        "version": __version__,
        "scenario": sc.model_dump(mode="json"),
        "seed": sc.seed,
        "checks": results,
        "passed": all(r["passed"] for r in results),
        "timings": timings,
    }


# -- sweeps ------------------------------------------------------------------


def _richardson_orders(values, ratios):
    """Order from consecutive triples: log(|I1 - I2| / |I2 - I3|) / log(r)."""
    out = [None, None]
    for i in range(2, len(values)):
        d1, d2 = abs(values[i - 2] - values[i - 1]), abs(values[i - 1] - values[i])
        if d1 == 0 or d2 == 0:
            out.append(None)
        else:
            out.append(_finite_or_none(math.log(d1 / d2) / math.log(ratios[i - 1])))
    return out


def convergence_sweep(sc: Scenario) -> dict:
    """Tabulate a quantity across resolutions together with its observed order.

    ``fd`` sweeps measure the largest deviation of the finite-difference
    Jacobians of E and B from the analytic ones at ``sweep.point``; the order
    is the log-log slope between consecutive steps.  ``quadrature`` sweeps
    integrate charge or energy over the grid box at each point count; the
    order comes from Richardson triples.
    """
    sw = sc.sweep
    if sw is None:
        raise ScenarioError("the scenario has no 'sweep' section")
    sol = build_solution(sc.solution, sc.physical_constants())
    rows = []
    if sw.kind == "fd":
        p = as_points(np.asarray(sw.point))
        exact = [sol.E.jacobian(p), sol.B.jacobian(p)]
        errors = []
        for h in sw.resolutions:
            bundles = [fd_oracle(sol.E, p, h), fd_oracle(sol.B, p, h)]
            errors.append(max(float(np.max(np.abs(b.jacobian - e))) for b, e in zip(bundles, exact)))
        for i, (h, err) in enumerate(zip(sw.resolutions, errors)):
            order = None
            if i > 0 and errors[i - 1] > 0 and err > 0:
                order = _finite_or_none(math.log(errors[i - 1] / err) / math.log(sw.resolutions[i - 1] / h))
            rows.append({"resolution": h, "value": err, "order": order})
    else:
        if sw.quantity == "total_charge":
            def integrand(q):
                return derived_state(sol, q).rho
        else:
            def integrand(q):
                return energy_density(sol, q)
        values, errors = [], []
        for n in sw.resolutions:
            try:
                res = integrate_box(integrand, build_grid(sc.grid, int(n)), sw.rule, sw.check_support)
            except SupportError as exc:
                raise ScenarioError(str(exc)) from exc
            values.append(float(res.value))
            errors.append(float(res.error))
        ratios = [1.0] + [sw.resolutions[i] / sw.resolutions[i - 1] for i in range(1, len(values))]
        orders = _richardson_orders(values, ratios)
        rows = [
            {"resolution": int(n), "value": v, "error": e, "order": o}
            for n, v, e, o in zip(sw.resolutions, values, errors, orders)
        ]
    return {"artifact": "vacuumlab", "version": __version__, "kind": sw.kind, "quantity": sw.quantity,
            "rows": rows}


# -- plot data ---------------------------------------------------------------

_AXES = {"x": 0, "y": 1, "z": 2}


def emit_plot_data(sc: Scenario, quantity: str | None = None, axis: str | None = None) -> np.ndarray:
    """Two columns: coordinate along the axis, quantity value."""
    plot = sc.plot or PlotModel()
    quantity = quantity or plot.quantity
    axis = axis or plot.axis
    if axis not in _AXES:
        raise ScenarioError(f"unknown axis {axis!r}")
    sol = build_solution(sc.solution, sc.physical_constants())
    coord = np.linspace(plot.start, plot.stop, plot.samples)
    pts = np.zeros((plot.samples, 4))
    pts[:, :3] = plot.offset
    pts[:, _AXES[axis]] += coord
    pts[:, 3] = plot.time
    keep = ~sol.singular.contains(pts) if sol.singular else np.ones(len(pts), dtype=bool)
    if not keep.any():
        raise ScenarioError("every sample lies inside the solution's singular set")
    coord, pts = coord[keep], pts[keep]
    if quantity == "E_norm":
        vals = np.linalg.norm(sol.E.value(pts), axis=-1)
    elif quantity == "B_norm":
        vals = np.linalg.norm(sol.B.value(pts), axis=-1)
    elif quantity == "energy_density":
        vals = energy_density(sol, pts)
    elif quantity in ("rho", "force_norm", "power"):
        st = derived_state(sol, pts)
        vals = {"rho": st.rho, "force_norm": np.linalg.norm(st.force, axis=-1), "power": st.power}[quantity]
    else:
        raise ScenarioError(f"unknown quantity {quantity!r}")
    return np.column_stack([coord, vals])


# -- media check ---------------------------------------------------------------


def media_check(cases: int, seed: int, v_cap: float) -> dict:
    res = _media_result(MediaModel(cases=cases, v_cap=v_cap), seed)
    return {"artifact": "vacuumlab", "version": __version__, "seed": seed, **res}


# -- output ------------------------------------------------------------------


def _json_text(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n"


def _flatten(prefix, value, out):
    if isinstance(value, dict):
        for k in sorted(value):
            _flatten(f"{prefix}.{k}" if prefix else str(k), value[k], out)
    elif isinstance(value, (list, tuple)) and value and not isinstance(value[0], (dict, list)):
        for i, v in enumerate(value):
            out.append((f"{prefix}[{i}]", v))
    else:
        out.append((prefix, value))


def _csv_text(rows: list[dict], columns: list[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow(["" if r.get(c) is None else r.get(c) for c in columns])
    return buf.getvalue()


def _report_csv(report: dict) -> str:
    rows = []
    for res in report["checks"] if "checks" in report else [report]:
        flat = []
        _flatten("", {k: v for k, v in res.items() if k not in ("check", "passed")}, flat)
        for key, value in flat:
            rows.append({"check": res["check"], "key": key, "value": value, "passed": res["passed"]})
    return _csv_text(rows, ["check", "key", "value", "passed"])


def _write(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _load(path: str) -> Scenario:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigParseError(f"cannot read {path}: {exc}") from exc
    return parse_scenario(load_document(text))


def _summary(report: dict) -> str:
    lines = []
    for res in report.get("checks", []):
        lines.append(f"{res['check']:<10} {'PASS' if res['passed'] else 'FAIL'}")
    return "\n".join(lines) + "\n"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vacuumlab", description="Nonlinear vacuum field checks.")
    parser.add_argument("--version", action="version", version=f"vacuumlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_required=True):
        p.add_argument("--config", required=config_required, help="YAML scenario file")
        p.add_argument("--seed", type=int, default=None, help="override the scenario seed (u64)")
        p.add_argument("--out", default=None, help="output path (default: stdout)")
        p.add_argument("--format", choices=("json", "csv"), default="json")

    common(sub.add_parser("verify", help="run the scenario's checks"))
    common(sub.add_parser("sweep", help="convergence sweep over resolutions"))
    plot = sub.add_parser("plot-data", help="two-column samples along an axis")
    common(plot)
    plot.add_argument("--quantity", default=None)
    plot.add_argument("--axis", default=None)
    media = sub.add_parser("media-check", help="random relativistic-media identity suite")
    common(media, config_required=False)
    media.add_argument("--cases", type=int, default=None)
    media.add_argument("--v-cap", type=float, default=None)
    return parser


def _with_seed(sc: Scenario, seed: int | None) -> Scenario:
    if seed is None:
        return sc
    return parse_scenario({**sc.model_dump(mode="json"), "seed": seed})


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "media-check":
            media, seed = MediaModel(), 0
            if args.config:
                sc = _load(args.config)
                media, seed = sc.media, sc.seed
            if args.seed is not None:
                seed = args.seed
            media = MediaModel(
                cases=media.cases if args.cases is None else args.cases,
                v_cap=media.v_cap if args.v_cap is None else args.v_cap,
            )
            if not 0 <= seed < 2**64:
                raise ScenarioError("seed must be an unsigned 64-bit integer")
            report = media_check(media.cases, seed, media.v_cap)
            if args.format == "json":
                _write(_json_text(report), args.out)
            else:
                rows = [{"test": k, **v} for k, v in report["suite"].items()]
                _write(_csv_text(rows, ["test", "max_deviation", "tolerance", "passed", "failed"]), args.out)
            return EXIT_OK if report["passed"] else EXIT_FAIL

        sc = _with_seed(_load(args.config), args.seed)
        if args.command == "verify":
            report = run_scenario(sc)
            text = _json_text(report) if args.format == "json" else _report_csv(report)
            _write(text, args.out)
            if args.out:
                sys.stdout.write(_summary(report))
            return EXIT_OK if report["passed"] else EXIT_FAIL
        if args.command == "sweep":
            table = convergence_sweep(sc)
            if args.format == "json":
                _write(_json_text(table), args.out)
            else:
                _write(_csv_text(table["rows"], ["resolution", "value", "error", "order"]), args.out)
            return EXIT_OK
        data = emit_plot_data(sc, args.quantity, args.axis)
        buf = io.StringIO()
        np.savetxt(buf, data, fmt="%.17g")
        _write(buf.getvalue(), args.out)
        return EXIT_OK
    except ConfigParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (ValidationError, ScenarioError) as exc:
        print(f"invalid scenario: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
