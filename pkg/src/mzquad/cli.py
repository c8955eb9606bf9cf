"""Command-line front end.

Subcommands::

    mzquad tri-rule  --vertices 0,0 1,0 0,1 --degree 3 [--out rule.json]
    mzquad integrate --domain tri --vertices ... --degree 5 --fn f3
    mzquad integrate --domain poly --standin interior --fn "x*y"
    mzquad mz        --domain poly --standin boundary --p inf --N 4 --refine 3
    mzquad repro     --table 1 --out results/

Exit status: 0 success, 2 bad input or geometry, 3 numerical failure,
4 oracle budget exhausted.  Every file written is accompanied by a run
manifest (``<file>.manifest.json``, or ``manifest.json`` in a directory).
"""

import argparse
from datetime import datetime, timezone
from importlib import resources
import json
import math
import os
import platform
import sys

import numpy as np
import scipy

from . import __version__
from .errors import InputError, MZQuadError, OracleBudgetExceeded
from .expr import BUILTINS, resolve
from .geometry import Polygon, Triangle
from .mesh import Mesh, ScatteredSet, refine_uniform, triangulate
from .mz_verify import mz_ensemble, write_csv
from .oracle import OracleConfig, integrate
from .poly_rule import apply_polygon_rule, polygon_weights
from .tri_rule import apply_rule, triangle_weights

RIGHT_TRIANGLE = ((0.0, 0.0), (0.0, 1.0), (1.0, 0.0))
TABLE1_DEGREES = (1, 3, 5, 7, 9, 11)
# f2 has a square-root ridge, so it gets a looser oracle tolerance
TABLE_ORACLE_TOL = {"f1": 1e-13, "f2": 1e-8, "f3": 1e-13}
TABLE_ORACLE_BUDGET = 400_000_000


def load_standin():
    """The shipped stand-in polygon data as ``(polygon, interior_points)``."""
    text = resources.files("mzquad").joinpath("data/standin_polygon.json").read_text()
    obj = json.loads(text)
    return Polygon(obj["polygon"]), np.array(obj["interior"], dtype=float)


def standin_mesh(with_interior):
    poly, interior = load_standin()
    return triangulate(ScatteredSet(poly, interior if with_interior else np.empty((0, 2))))


# -- manifests ---------------------------------------------------------------


def _now():
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


class RunManifest:
    """Record of one command: parameters, seed, versions, times, outputs."""

    def __init__(self, command, params, seed=None):
        self.command = command
        self.params = params
        self.seed = seed
        self.started = _now()
        self.outputs = []

    def to_json(self):
        return {
            "command": self.command,
            "params": self.params,
            "seed": self.seed,
            "versions": {
                "mzquad": __version__,
                "numpy": np.__version__,
                "scipy": scipy.__version__,
                "python": platform.python_version(),
            },
            "started": self.started,
            "finished": _now(),
            "outputs": self.outputs,
        }

    def write(self, path):
        with open(path, "w", newline="\n") as fh:
            json.dump(self.to_json(), fh, indent=2)
            fh.write("\n")


def _write_text(path, text, manifest):
    with open(path, "w", newline="\n") as fh:
        fh.write(text)
    manifest.outputs.append(os.path.abspath(path))


def _write_json(path, obj, manifest):
    _write_text(path, json.dumps(obj, indent=2) + "\n", manifest)


# -- argument helpers --------------------------------------------------------


def _point(text):
    try:
        x, y = (float(s) for s in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a point 'x,y', got {text!r}") from None
    return (x, y)


def _p_value(text):
    if text.lower() in ("inf", "infinity"):
        return math.inf
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number or 'inf', got {text!r}") from None


def _read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc


def _add_geometry(ap, degree_default=1):
    ap.add_argument("--domain", choices=("tri", "poly"), default="tri")
    ap.add_argument("--vertices", nargs=3, type=_point, metavar="X,Y", help="triangle vertices")
    ap.add_argument("--degree", type=int, default=degree_default, help="triangle rule degree")
    g = ap.add_mutually_exclusive_group()
    g.add_argument("--points", help='scattered points JSON {"polygon": [...], "interior": [...]}')
    g.add_argument("--polygon", help='polygon JSON {"vertices": [...]}')
    g.add_argument("--mesh", help='mesh JSON {"vertices": [...], "triangles": [...]}')
    g.add_argument("--standin", choices=("boundary", "interior"), help="shipped stand-in polygon")
    ap.add_argument("--refine", type=int, default=0, help="uniform refinement levels")


def _base_mesh(args):
    if args.points:
        return triangulate(ScatteredSet.from_json(_read_json(args.points)))
    if args.polygon:
        obj = _read_json(args.polygon)
        if "vertices" not in obj:
            raise InputError(f"{args.polygon}: polygon JSON needs a 'vertices' list")
        return triangulate(ScatteredSet(Polygon(obj["vertices"]), np.empty((0, 2))))
    if args.mesh:
        obj = _read_json(args.mesh)
        try:
            return Mesh.from_json(obj)
        except KeyError as exc:
            raise InputError(f"{args.mesh}: missing key {exc}") from None
    if args.standin:
        return standin_mesh(args.standin == "interior")
    raise InputError("--domain poly needs one of --points, --polygon, --mesh or --standin")


def _triangle(args):
    return Triangle(*(args.vertices or RIGHT_TRIANGLE))


def _geometry_params(args):
    out = {"domain": args.domain}
    if args.domain == "tri":
        out.update(vertices=[list(v) for v in (args.vertices or RIGHT_TRIANGLE)], degree=args.degree)
    else:
        for key in ("points", "polygon", "mesh", "standin"):
            if getattr(args, key):
                out[key] = getattr(args, key)
        out["refine"] = args.refine
    return out


# -- commands ----------------------------------------------------------------


def cmd_tri_rule(args):
    rule = triangle_weights(Triangle(*args.vertices), args.degree)
    nonpos = int(np.sum(rule.weights <= 0))
    print(f"degree {rule.degree}: {len(rule)} points, condition estimate {rule.condition:.4e}")
    if nonpos:
        print(f"warning: nonpositive weights present ({nonpos} of {len(rule)})")
    else:
        print("all weights positive")
    if args.out:
        manifest = RunManifest("tri-rule", {"vertices": [list(v) for v in args.vertices], "degree": args.degree})
        _write_json(args.out, rule.to_json(), manifest)
        manifest.write(args.out + ".manifest.json")
    else:
        print(json.dumps(rule.to_json()))
    return 0


def _rel(exact, quad):
    return abs(exact - quad) / abs(exact) if exact != 0 else abs(quad)


def cmd_integrate(args):
    f = resolve(args.fn)
    cfg = OracleConfig(tolerance=args.oracle_tol, max_evaluations=args.oracle_budget)
    if args.domain == "tri":
        domain = _triangle(args)
        quad = apply_rule(triangle_weights(domain, args.degree), f)
    else:
        domain = refine_uniform(_base_mesh(args), args.refine)
        quad = apply_polygon_rule(polygon_weights(domain), f)
    report = {"fn": args.fn, "quadrature": quad}
    status = 0
    try:
        value, estimate = integrate(domain, f, cfg)
    except OracleBudgetExceeded as exc:
        value, estimate = exc.value, exc.error_estimate
        report["oracle_status"] = "budget exceeded"
        status = exc.exit_code
    report.update(oracle=value, oracle_error=estimate, relative_error=_rel(value, quad))
    print(f"quadrature     {quad:.16e}")
    print(f"oracle         {value:.16e} +/- {estimate:.3e}")
    print(f"relative error {report['relative_error']:.4e}")
    if status:
        print("oracle budget exceeded; values above are partial", file=sys.stderr)
    if args.out:
        params = _geometry_params(args) | {"fn": args.fn, "oracle_tol": args.oracle_tol}
        manifest = RunManifest("integrate", params)
        _write_json(args.out, report, manifest)
        manifest.write(args.out + ".manifest.json")
    return status


def cmd_mz(args):
    cfg = OracleConfig(tolerance=args.oracle_tol, max_evaluations=args.oracle_budget)
    reports = []
    if args.domain == "tri":
        rule = triangle_weights(_triangle(args), args.degree)
        for p in args.p:
            for N in args.N:
                reports.append(mz_ensemble(rule, p, N, args.trials, args.seed, cfg))
    else:
        mesh = _base_mesh(args)
        for level in range(args.refine + 1):
            rule = polygon_weights(mesh)
            for p in args.p:
                for N in args.N:
                    reports.append(mz_ensemble(rule, p, N, args.trials, args.seed, cfg, mesh_id=f"mesh-L{level}"))
            if level < args.refine:
                mesh = refine_uniform(mesh)
    text = write_csv(reports)
    if args.out:
        params = _geometry_params(args) | {
            "p": ["inf" if p == math.inf else p for p in args.p],
            "N": args.N,
            "trials": args.trials,
            "oracle_tol": args.oracle_tol,
        }
        manifest = RunManifest("mz", params, seed=args.seed)
        _write_text(args.out, text, manifest)
        manifest.write(args.out + ".manifest.json")
    else:
        sys.stdout.write(text)
    return 0


def _oracle_value(domain, f, name):
    cfg = OracleConfig(tolerance=TABLE_ORACLE_TOL[name], max_evaluations=TABLE_ORACLE_BUDGET)
    try:
        return integrate(domain, f, cfg)
    except OracleBudgetExceeded as exc:
        return exc.value, exc.error_estimate


def table1():
    """Rows ``{degree, f1, f2, f3, ...}`` for the right-triangle experiment."""
    t = Triangle(*RIGHT_TRIANGLE)
    fns = {name: BUILTINS[name][0] for name in ("f1", "f2", "f3")}
    exact = {name: _oracle_value(t, f, name) for name, f in fns.items()}
    rows = []
    for d in TABLE1_DEGREES:
        rule = triangle_weights(t, d)
        row = {"degree": d}
        for name, f in fns.items():
            value, estimate = exact[name]
            quad = apply_rule(rule, f)
            row[name] = _rel(value, quad)
            row[name + "_quadrature"] = quad
            row[name + "_oracle"] = value
            row[name + "_oracle_error"] = estimate
        rows.append(row)
    return rows


def table2():
    """Rows for the stand-in polygon, boundary only and with interior points."""
    rows = []
    for label, with_interior in (("boundary", False), ("boundary+interior", True)):
        mesh = standin_mesh(with_interior)
        rule = polygon_weights(mesh)
        row = {"points": label, "n_points": len(rule), "n_triangles": mesh.count}
        for name in ("f1", "f2", "f3"):
            f = BUILTINS[name][0]
            value, estimate = _oracle_value(mesh, f, name)
            quad = apply_polygon_rule(rule, f)
            row[name] = _rel(value, quad)
            row[name + "_quadrature"] = quad
            row[name + "_oracle"] = value
            row[name + "_oracle_error"] = estimate
        rows.append(row)
    return rows


def _table_csv(rows, key_fields):
    lines = [",".join(key_fields + ["f1", "f2", "f3"])]
    for r in rows:
        lines.append(",".join([str(r[k]) for k in key_fields] + [f"{r[n]:.4e}" for n in ("f1", "f2", "f3")]))
    return "\n".join(lines) + "\n"


def cmd_repro(args):
    os.makedirs(args.out, exist_ok=True)
    manifest = RunManifest("repro", {"table": args.table, "oracle_tol": TABLE_ORACLE_TOL})
    if args.table == 1:
        rows = table1()
        csv_text = _table_csv(rows, ["degree"])
    else:
        rows = table2()
        csv_text = _table_csv(rows, ["points", "n_points", "n_triangles"])
    stem = os.path.join(args.out, f"table{args.table}")
    _write_text(stem + ".csv", csv_text, manifest)
    _write_json(stem + ".json", rows, manifest)
    manifest.write(os.path.join(args.out, "manifest.json"))
    sys.stdout.write(csv_text)
    return 0


# -- entry point -------------------------------------------------------------


def build_parser():
    ap = argparse.ArgumentParser(prog="mzquad", description=__doc__.split("\n")[0])
    ap.add_argument("--version", action="version", version=f"mzquad {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("tri-rule", help="weights of the degree-d rule on a triangle")
    p.add_argument("--vertices", nargs=3, type=_point, metavar="X,Y", required=True)
    p.add_argument("--degree", type=int, required=True)
    p.add_argument("--out", help="write the rule as JSON")
    p.set_defaults(func=cmd_tri_rule)

    p = sub.add_parser("integrate", help="quadrature against the adaptive oracle")
    _add_geometry(p)
    p.add_argument("--fn", required=True, help="f1, f2, f3 or an expression in x and y")
    p.add_argument("--oracle-tol", type=float, default=1e-12)
    p.add_argument("--oracle-budget", type=int, default=200_000_000, help="maximum integrand evaluations")
    p.add_argument("--out", help="write the report as JSON")
    p.set_defaults(func=cmd_integrate)

    p = sub.add_parser("mz", help="Marcinkiewicz-Zygmund ratio ensembles")
    _add_geometry(p)
    p.add_argument("--p", nargs="+", type=_p_value, default=[math.inf])
    p.add_argument("--N", nargs="+", type=int, default=[1])
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--oracle-tol", type=float, default=1e-10)
    p.add_argument("--oracle-budget", type=int, default=4_000_000)
    p.add_argument("--out", help="write the CSV here instead of standard output")
    p.set_defaults(func=cmd_mz)

    p = sub.add_parser("repro", help="regenerate the relative-error tables")
    p.add_argument("--table", type=int, choices=(1, 2), required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_repro)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except MZQuadError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
