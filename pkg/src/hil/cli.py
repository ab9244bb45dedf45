"""Command line front-end: ``hil verify`` and ``hil sharpness``.

Exit codes: 0 all cases pass, 1 usage or input error, 2 an inequality is
violated (beyond its tolerance), 3 a solver failed.  JSON output carries
``"schema": "hil/1"`` and is byte-identical across identical invocations.
The ``HIL_WORKERS`` environment variable sets the number of worker threads;
output order and content do not depend on it.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

from .corpus import make_surface, make_testfn
from .errors import HILError, SingularPencil, SolverStall
from .inequalities import INEQUALITY_NAMES, _json_default, evaluate, reports_to_csv
from .quadrature import QuadratureSpec
from .revolution import RevolutionHypersurface
from .sharpness import assemble_forms, min_generalized_rayleigh, sweep_rows_to_csv
from .specs import parse_spec

SCHEMA = "hil/1"
EXIT_OK, EXIT_USAGE, EXIT_VIOLATION, EXIT_SOLVER = 0, 1, 2, 3
CERT_TOL = 1e-6


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _float_flag(name):
    def conv(text):
        try:
            return float(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{name} expects a number, got {text!r}") from None
    return conv


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="hil", description="Hardy-type inequalities on hypersurfaces")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    v = sub.add_parser("verify", help="evaluate both sides of an inequality")
    v.add_argument("--inequality", required=True, choices=INEQUALITY_NAMES)
    v.add_argument("--surface", required=True, help="e.g. sphere:n=3 or icosphere:subdiv=3")
    v.add_argument("--testfn", required=True, help="e.g. constant or radial_bump:delta=0.5,R=1.5")
    for flag in ("p", "a", "b", "r"):
        v.add_argument(f"--{flag}", type=_float_flag(f"--{flag}"), default=None)
    v.add_argument("--quad", default=None, help="quadrature spec, e.g. profile_order=24")
    v.add_argument("--family-param", action="append", default=[],
                   help="sweep: key=v1,v2,... (prefix surface. or testfn. to disambiguate)")
    v.add_argument("--out", default=None)
    v.add_argument("--format", choices=("json", "csv"), default="json")

    s = sub.add_parser("sharpness", help="minimal Rayleigh quotient on a finite basis")
    s.add_argument("--inequality", required=True, choices=INEQUALITY_NAMES)
    s.add_argument("--surface", required=True)
    s.add_argument("--basis", default="auto", help="mesh, radial:k or auto")
    for flag in ("p", "a", "r"):
        s.add_argument(f"--{flag}", type=_float_flag(f"--{flag}"), default=None)
    s.add_argument("--family-param", action="append", default=[],
                   help="sweep of a surface parameter: key=v1,v2,...")
    s.add_argument("--out", default=None)
    s.add_argument("--format", choices=("json", "csv"), default="csv")
    return ap


# --- sweeps -------------------------------------------------------------------------
def _with_param(spec: str, key: str, value) -> str:
    name, params = parse_spec(spec)
    params[key] = value
    body = ",".join(f"{k}={v}" for k, v in params.items())
    return f"{name}:{body}" if body else name


def _parse_sweep(text: str):
    if "=" not in text:
        raise UsageError(f"--family-param expects key=v1,v2,..., got {text!r}")
    key, _, vals = text.partition("=")
    values = [v.strip() for v in vals.split(",") if v.strip()]
    if not values:
        raise UsageError(f"--family-param {key!r} has no values")
    return key.strip(), values


def _expand(surface: str, testfn: str | None, sweeps: list, default_target: str):
    cases = [(surface, testfn, None)]
    for text in sweeps:
        key, values = _parse_sweep(text)
        target = default_target
        if key.startswith(("surface.", "testfn.")):
            target, key = key.split(".", 1)
        elif testfn is not None and key in parse_spec(testfn)[1]:
            target = "testfn"
        elif key in parse_spec(surface)[1]:
            target = "surface"
        out = []
        for s, t, label in cases:
            for v in values:
                tag = f"{key}={v}" if label is None else f"{label};{key}={v}"
                if target == "surface":
                    out.append((_with_param(s, key, v), t, tag))
                else:
                    out.append((s, _with_param(t, key, v), tag))
        cases = out
    return cases


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("HIL_WORKERS", "1")))
    except ValueError:
        return 1


def _map(fn, items):
    n = _workers()
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, default=_json_default) + "\n"


# --- commands -----------------------------------------------------------------------
def run_verify(args) -> int:
    quad = QuadratureSpec.parse(args.quad) if args.quad else None
    cases = _expand(args.surface, args.testfn, args.family_param, "testfn")

    def one(case):
        surface_spec, testfn_spec, label = case
        M = make_surface(surface_spec)
        phi = make_testfn(testfn_spec, M)
        rep = evaluate(args.inequality, M, phi, p=args.p, a=args.a, b=args.b, r=args.r, quad=quad)
        return label, rep

    results = _map(one, cases)
    reports = []
    for i, (label, rep) in enumerate(results):
        d = rep.to_dict()
        d["case"] = i
        d["param"] = label
        reports.append(d)
        print(f"case {i}: {rep.name} lhs={rep.lhs:.12g} rhs={rep.rhs:.12g} margin={rep.margin:.6g} "
              f"tolerance={rep.tolerance:.3g} verdict={rep.verdict}", file=sys.stderr)
    if args.format == "json":
        _emit(_dump({"schema": SCHEMA, "command": "verify", "reports": reports}), args.out)
    else:
        _emit(reports_to_csv([rep for _, rep in results]), args.out)
    return EXIT_VIOLATION if any(rep.verdict == "fail" for _, rep in results) else EXIT_OK


def run_sharpness(args) -> int:
    params = {k: getattr(args, k) for k in ("p", "a", "r") if getattr(args, k) is not None}
    cases = _expand(args.surface, None, args.family_param, "surface")

    def one(case):
        surface_spec, _, label = case
        M = make_surface(surface_spec)
        F = assemble_forms(M, args.inequality, params, basis=args.basis)
        res = min_generalized_rayleigh(F, tol=CERT_TOL)
        return M, {"surface": surface_spec, "inequality": args.inequality,
                   "p": float(params.get("p", 2.0)), "a": params.get("a", ""),
                   "param": label or "", "lambda_min": res.lambda_min, "iterations": res.iterations,
                   "note": res.note}

    results = _map(one, cases)
    rows = [row for _, row in results]
    for row in rows:
        print(f"{row['surface']} {row['param']} lambda_min={row['lambda_min']:.12g} ({row['note']})",
              file=sys.stderr)
    if args.format == "csv":
        _emit(sweep_rows_to_csv(rows), args.out)
    else:
        _emit(_dump({"schema": SCHEMA, "command": "sharpness", "rows": rows}), args.out)
    bad = any(isinstance(M, RevolutionHypersurface) and row["lambda_min"] < 1 - CERT_TOL
              for M, row in results)
    return EXIT_VIOLATION if bad else EXIT_OK


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.command == "verify":
            return run_verify(args)
        return run_sharpness(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SolverStall, SingularPencil) as exc:
        print(f"solver error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except HILError as exc:
        print(f"input error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ValueError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
