"""Command-line interface: ``uniharm {certify,oracle,geometry,sweep,report} SPEC [flags]``.

Exit codes: 0 certified / pass, 1 not certified / collision / heuristic only,
2 invalid input, 3 internal error.  Errors go to stderr as
``uniharm:error:<category>: <message>``.
"""
from __future__ import annotations

import argparse
import math
import os
import sys
import tempfile
import time
from dataclasses import asdict

import numpy as np

from . import __version__, criteria, geometry, oracle
from .core import LogPHarmonicMap
from .mapspec import MapSpec, SpecError, canonical_dumps, parse_spec

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_INTERNAL = 0, 1, 2, 3

VERDICT_EXIT = {
    "certified": EXIT_OK,
    "pass": EXIT_OK,
    "heuristic-pass": EXIT_FAIL,
    "not-certified": EXIT_FAIL,
    "degenerate": EXIT_FAIL,
    "collision": EXIT_FAIL,
    "jacobian-sign-failure": EXIT_FAIL,
    "boundary-anomaly": EXIT_FAIL,
}


class UsageError(Exception):
    pass


# output --------------------------------------------------------------------

def write_atomic(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".uniharm-")
    try:
        with os.fdopen(fd, "w", encoding="ascii", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def boundary_csv(f, n: int) -> str:
    if n < 3:
        raise ValueError("boundary CSV needs n >= 3")
    theta = 2 * np.pi * np.arange(n) / n
    w = np.asarray(f(np.exp(1j * theta)), dtype=complex)
    lines = ["theta,re,im"]
    lines += [f"{t:.17g},{v.real:.17g},{v.imag:.17g}" for t, v in zip(theta, w)]
    return "\n".join(lines) + "\n"


def emit_boundary_csv(f, n: int, path: str) -> None:
    write_atomic(path, boundary_csv(f, n))


# report pieces -------------------------------------------------------------

def _sup_obj(sup: criteria.SupEstimate) -> dict:
    return {"value": sup.value, "infinite": sup.infinite, "arg_point": sup.arg_point,
            "samples_used": sup.samples_used, "refined": sup.refined}


def criterion_obj(rep: criteria.CriterionReport) -> dict:
    return {"kind": rep.kind.value, "sup": _sup_obj(rep.sup), "threshold": rep.threshold,
            "threshold_basis": rep.threshold_basis, "M": rep.M, "margin": rep.margin,
            "verdict": rep.verdict, "options": rep.options}


def verdict_obj(v: oracle.OracleVerdict) -> dict:
    w = v.witness
    if isinstance(w, tuple):
        w = list(w)
    return {"status": v.status, "witness": w, "residual": v.residual, "params": v.params}


def connectivity_obj(est: geometry.ConnectivityEstimate) -> dict:
    return {"Mhat": est.Mhat, "witness_pair": list(est.witness_pair),
            "path_length": est.path_length, "pairs_sampled": est.pairs_sampled,
            "path": list(est.path)}


def _grid_pair(text: str) -> tuple[int, int]:
    try:
        nr, nt = text.lower().split("x")
        return int(nr), int(nt)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected NRxNT, got {text!r}") from None


# commands ------------------------------------------------------------------

def _basis(args):
    if args.M is not None:
        return args.M
    if args.convex:
        return "convex"
    if args.estimate_M:
        return "estimate"
    return "auto"


def _theorem(args, spec: MapSpec) -> criteria.RatioKind:
    tag = args.theorem or ("T7" if spec.kind == "log-p-harmonic" else "T2")
    return criteria.RatioKind.parse(tag, t7_literal=args.t7_literal)


def _run_certify(args, spec, f):
    kind = _theorem(args, spec)
    nr, nt = args.grid_polar
    plan = criteria.SupPlan(nr=nr, ntheta=nt)
    rep = criteria.certify(f, kind, _basis(args), plan, as_stated=args.as_stated,
                           coefficients=args.coefficients, boundary_n=args.boundary_n,
                           pairs=args.pairs, seed=args.seed)
    return rep


def cmd_certify(args, spec, f):
    rep = _run_certify(args, spec, f)
    return VERDICT_EXIT[rep.verdict], {"criterion": criterion_obj(rep)}


def _oracle_body(args, f):
    v = oracle.univalence_verdict(f, args.grid, args.sigma, args.tau, args.boundary_n)
    body = {"oracle": verdict_obj(v)}
    if v.status in ("jacobian-sign-failure", "boundary-anomaly"):
        # the verdict stops at the first failing stage; keep the collision evidence too
        inj = oracle.injectivity_scan(f, args.grid, args.sigma, args.tau)
        body["injectivity"] = verdict_obj(inj)
    return v, body


def cmd_oracle(args, spec, f):
    v, body = _oracle_body(args, f)
    return VERDICT_EXIT[v.status], body


def _geometry_obj(f, n, pairs, seed):
    poly = geometry.boundary_polyline(f, n)
    simple = geometry.is_simple(poly)
    out = {"n": n, "vertices": len(poly), "simple": simple,
           "convex": bool(simple and geometry.is_convex(poly))}
    if simple:
        out["connectivity"] = connectivity_obj(geometry.connectivity_estimate(poly, pairs, seed))
    return out


def cmd_geometry(args, spec, f):
    out = _geometry_obj(f, args.n, args.pairs, args.seed)
    return (EXIT_OK if out["simple"] else EXIT_FAIL), {"geometry": out}


def cmd_sweep(args, spec, f):
    if isinstance(f, LogPHarmonicMap):
        raise criteria.ShapeMismatchError("sweep needs a polyharmonic map")
    t = criteria.as_two_term(f)
    samples = oracle.default_a_samples(args.na)
    res = oracle.stable_sweep(t.G, t.K, t.p, samples, args.grid, args.sigma, args.tau,
                              args.boundary_n)
    rows = [{"a": a, "verdict": verdict_obj(v)} for a, v in res]
    ok = all(v.passed for _, v in res)
    return (EXIT_OK if ok else EXIT_FAIL), {"sweep": rows, "all_pass": ok}


def cmd_report(args, spec, f):
    rep = _run_certify(args, spec, f)
    v, body = _oracle_body(args, f)
    geo = _geometry_obj(f, args.n, args.pairs, args.seed)
    code = EXIT_OK if rep.verdict == "certified" and v.passed else EXIT_FAIL
    return code, {"criterion": criterion_obj(rep), **body, "geometry": geo}


COMMANDS = {"certify": cmd_certify, "oracle": cmd_oracle, "geometry": cmd_geometry,
            "sweep": cmd_sweep, "report": cmd_report}


# argument parsing ----------------------------------------------------------

def _add_common(p):
    p.add_argument("spec", help="map file (JSON)")
    p.add_argument("--json", metavar="OUT", help="also write the report to OUT")
    p.add_argument("--csv", metavar="OUT", help="write boundary samples theta,re,im to OUT")
    p.add_argument("--csv-n", type=int, default=256, help="boundary samples in the CSV")
    p.add_argument("--boundary-n", type=int, default=2048)
    p.add_argument("--timing", action="store_true", help="record wall time (breaks byte-stability)")


def _add_certify_flags(p):
    p.add_argument("--theorem", choices=["T1", "T2", "T4", "T5", "T6", "T7"])
    basis = p.add_mutually_exclusive_group()
    basis.add_argument("--M", type=float, help="user-supplied linear-connectivity constant")
    basis.add_argument("--convex", action="store_true", help="require a convex reference image (M=1)")
    basis.add_argument("--estimate-M", action="store_true", help="sampled M (heuristic verdicts only)")
    p.add_argument("--as-stated", action="store_true", help="T5 threshold 1/M instead of 1/(2M)")
    p.add_argument("--t7-literal", action="store_true", help="T7 evaluated term by term as printed")
    p.add_argument("--coefficients", choices=["corrected", "printed"], default="corrected",
                   help="Lambda coefficients for T2/T5 (printed form is not sufficient)")
    p.add_argument("--grid", dest="grid_polar", type=_grid_pair, default=(64, 256),
                   metavar="NRxNT", help="polar scan for the supremum")


def _add_oracle_flags(p, grid_flag="--grid"):
    p.add_argument(grid_flag, dest="grid", type=int, default=256)
    p.add_argument("--sigma", type=float, default=1e-3)
    p.add_argument("--tau", type=float, default=1e-6)


def _add_geometry_flags(p):
    p.add_argument("--n", type=int, default=2048)
    p.add_argument("--pairs", type=int, default=2000)
    p.add_argument("--seed", type=int, default=0)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="uniharm", description="Univalence certificates for polyharmonic maps.")
    parser.add_argument("--version", action="version", version=f"uniharm {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("certify", help="evaluate a univalence criterion")
    _add_common(p)
    _add_certify_flags(p)
    p.add_argument("--pairs", type=int, default=2000)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("oracle", help="brute-force univalence check")
    _add_common(p)
    _add_oracle_flags(p)

    p = sub.add_parser("geometry", help="boundary image geometry and M estimate")
    _add_common(p)
    _add_geometry_flags(p)

    p = sub.add_parser("sweep", help="oracle over the stable family a|z|^(2(p-1))G + K")
    _add_common(p)
    _add_oracle_flags(p)
    p.add_argument("--na", type=int, default=8, help="angles per modulus (moduli 0.5, 0.95)")

    p = sub.add_parser("report", help="certify + oracle + geometry")
    _add_common(p)
    _add_certify_flags(p)
    _add_oracle_flags(p, "--oracle-grid")
    _add_geometry_flags(p)
    return parser


def _params(args) -> dict:
    skip = {"spec", "json", "csv", "timing", "command"}
    out = {}
    for k, v in sorted(vars(args).items()):
        if k in skip:
            continue
        out[k] = list(v) if isinstance(v, tuple) else v
    return out


def _fail(category: str, message: str, code: int) -> int:
    print(f"uniharm:error:{category}: {message}", file=sys.stderr)
    return code


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        return _fail("usage", str(exc), EXIT_INPUT)
    start = time.perf_counter()
    try:
        spec = parse_spec(args.spec)
        f = spec.to_map()
    except SpecError as exc:
        return _fail("spec", str(exc), EXIT_INPUT)
    except OSError as exc:
        return _fail("io", str(exc), EXIT_INPUT)
    try:
        code, body = COMMANDS[args.command](args, spec, f)
    except (criteria.ShapeMismatchError, criteria.ConvexCheckError,
            oracle.SampleOutOfRangeError, ValueError) as exc:
        category = {criteria.ShapeMismatchError: "shape",
                    criteria.ConvexCheckError: "convex"}.get(type(exc), "input")
        return _fail(category, str(exc), EXIT_INPUT)
    except Exception as exc:  # pragma: no cover - defensive
        return _fail("internal", f"{type(exc).__name__}: {exc}", EXIT_INTERNAL)

    report = {"tool": "uniharm", "version": __version__, "command": args.command,
              "spec_digest": spec.digest(), "parameters": _params(args),
              "exit_code": code, **body}
    if args.timing:
        report["wall_time"] = time.perf_counter() - start
    text = canonical_dumps(report) + "\n"
    try:
        if args.json:
            write_atomic(args.json, text)
        if args.csv:
            emit_boundary_csv(f, args.csv_n, args.csv)
    except OSError as exc:
        return _fail("io", str(exc), EXIT_INTERNAL)
    sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
