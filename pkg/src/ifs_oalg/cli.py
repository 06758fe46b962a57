"""Command-line front end: ``ifs-oalg attractor | verify | codemap``.

Exit codes: 0 success, 1 check failure, 2 input error, 3 not hyperbolic,
4 missing left inverse, 5 support meets the branch set.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import branch, exel, pimsner
from .algebra import verify_cuntz
from .codemap import code_error_bound, code_point, format_word, parse_word
from .errors import (BudgetExceeded, IFSError, LetterOutOfRange, NotCographSeparated, NotHyperbolic,
                     NotLeftInverse, OnBranchSet, SpecParseError)
from .exact import format_rational
from .functions import SampledFunction
from .ifs import IFSystem, PointCloud, attractor_run, diameter_bound, self_similarity_residual
from .pimsner import CographFunction
from .systems import load_system

log = logging.getLogger("ifs_oalg")

SCHEMA = 1
CHECKS = ("attractor", "branch", "covariance", "cuntz", "cograph", "exel")
DEFAULT_CHECKS = "attractor,branch,cuntz,covariance"
BRANCH_TOL = 1e-6

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_HYPERBOLIC, EXIT_LEFT_INVERSE, EXIT_BRANCH = range(6)


class _Exit(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


# formatting ----------------------------------------------------------------

def _clean(obj):
    """JSON-ready copy: floats to 15 significant digits, rationals as "p/q"."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, Fraction):
        return format_rational(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v) or math.isinf(v):
            return str(v)
        return float(f"{v:.15g}")
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    return obj


def dumps(report: dict) -> str:
    return json.dumps(_clean(report), sort_keys=True, indent=2) + "\n"


def cloud_csv(cloud: PointCloud) -> str:
    pts = cloud.points[np.lexsort(cloud.points.T[::-1])]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([f"x{k}" for k in range(cloud.dimension)])
    for row in pts:
        writer.writerow([repr(float(v)) for v in row])
    return buf.getvalue()


# argument types --------------------------------------------------------------

def _positive(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not a number") from None
    if not v > 0 or math.isinf(v):
        raise argparse.ArgumentTypeError("must be positive and finite")
    return v


def _depth(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer") from None
    if v < 0:
        raise argparse.ArgumentTypeError("depth must be nonnegative")
    return v


def _checks(text: str) -> list[str]:
    names = [t.strip() for t in text.split(",") if t.strip()]
    unknown = sorted(set(names) - set(CHECKS))
    if unknown or not names:
        raise argparse.ArgumentTypeError(f"unknown checks {unknown}; choose from {','.join(CHECKS)}")
    return sorted(set(names), key=CHECKS.index)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ifs-oalg", description="Affine IFS attractors and their operator algebras.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--system", required=True, help="built-in name or JSON spec path")
    common.add_argument("--eps", type=_positive, default=None,
                        help="attractor resolution (default 1e-4 in dimension 1, 1e-2 otherwise)")

    a = sub.add_parser("attractor", parents=[common], help="approximate the attractor")
    a.add_argument("--out", help="CSV path; the JSON summary goes next to it")

    v = sub.add_parser("verify", parents=[common], help="run verification checks")
    v.add_argument("--checks", type=_checks, default=_checks(DEFAULT_CHECKS))
    v.add_argument("--depth", type=_depth, default=3)
    v.add_argument("--tol", type=_positive, default=1e-8)
    v.add_argument("--out", help="JSON report path (default stdout)")
    v.add_argument("--osc-certificate", choices=("true", "false"), default=None,
                   help="user-supplied open set condition certificate, recorded in the report")

    c = sub.add_parser("codemap", parents=[common], help="evaluate the code map on a finite word")
    c.add_argument("--word", required=True)
    c.add_argument("--depth", type=_depth, default=None, help="ignored; the word length is the depth")
    return p


def _eps(args, sys_: IFSystem) -> float:
    if args.eps is not None:
        return args.eps
    return 1e-4 if sys_.dimension == 1 else 1e-2


def _cloud(sys_: IFSystem, eps: float):
    try:
        return attractor_run(sys_, eps)
    except NotHyperbolic as exc:
        raise _Exit(EXIT_HYPERBOLIC, f"not hyperbolic: {exc}") from exc


# subcommands -----------------------------------------------------------------

def cmd_attractor(args) -> int:
    sys_ = load_system(args.system)
    eps = _eps(args, sys_)
    run = _cloud(sys_, eps)
    residual = self_similarity_residual(sys_, run.cloud)
    ok = residual <= 2 * eps
    summary = {
        "schema": SCHEMA,
        "system": sys_.name,
        "eps": eps,
        "residual": residual,
        "resolution": run.cloud.resolution,
        "iterations": run.iterations,
        "points": len(run.cloud),
        "contraction_ratio": sys_.ratio,
        "status": "pass" if ok else "fail",
    }
    if args.out:
        out = Path(args.out)
        out.write_text(cloud_csv(run.cloud))
        out.with_suffix(".json").write_text(dumps(summary))
    sys.stdout.write(dumps(summary))
    return EXIT_OK if ok else EXIT_FAIL


def _coordinate_poly(dimension: int, coeffs: list) -> SampledFunction:
    """Polynomial in the first coordinate."""
    return SampledFunction.polynomial({(k,) + (0,) * (dimension - 1): c for k, c in enumerate(coeffs)})


def _hat_away_from(sys_: IFSystem, cloud: PointCloud, report: branch.BranchReport) -> SampledFunction:
    """Hat at the cloud point farthest from B, with radius half that distance."""
    bp = report.branched_points
    if len(bp) == 0:
        return SampledFunction.constant(1)
    dist = bp.tree.query(cloud.points)[0]
    k = int(dist.argmax())
    center = tuple(Fraction(v).limit_denominator(2**20) for v in cloud.points[k])
    radius = Fraction(float(dist[k]) / 2).limit_denominator(2**20)
    return SampledFunction.hat(center, radius)


def _status_ok(rep: dict) -> bool:
    return rep.get("status") in ("exact", "pass")


def _aggregate(parts: dict) -> str:
    if not all(_status_ok(r) for r in parts.values()):
        return "fail"
    return "exact" if all(r["status"] == "exact" for r in parts.values()) else "pass"


def run_checks(sys_: IFSystem, args) -> dict:
    eps = _eps(args, sys_)
    n = args.depth
    results = {}
    run = _cloud(sys_, eps)
    cloud = run.cloud
    a = _coordinate_poly(sys_.dimension, [Fraction(1, 2), Fraction(1)])
    b = _coordinate_poly(sys_.dimension, [Fraction(1), Fraction(0), Fraction(-1, 3)])
    xi = CographFunction.product(a, b, sys_) + CographFunction.product(SampledFunction.constant(1), a, sys_)
    br = None

    if "attractor" in args.checks:
        residual = self_similarity_residual(sys_, cloud)
        results["attractor"] = {"check": "attractor", "status": "pass" if residual <= 2 * eps else "fail",
                                "residual": residual, "resolution": cloud.resolution,
                                "iterations": run.iterations, "tolerances": {"residual": 2 * eps}}
    if {"branch", "exel"} & set(args.checks):
        br = branch.branch_report(sys_, cloud, BRANCH_TOL)
    if "branch" in args.checks:
        results["branch"] = {"check": "branch", "status": "pass", **br.to_json()}
    if "cuntz" in args.checks:
        results["cuntz"] = verify_cuntz(sys_.d)
    if "covariance" in args.checks:
        cov = {
            "condition_i": pimsner.verify_condition_i(a, xi, b, sys_, n),
            "condition_ii": pimsner.verify_condition_ii(xi, xi, sys_, n),
            "gauge_i": pimsner.verify_gauge(a, xi, sys_, n, Fraction(1, 4)),
            "gauge_cube_root": pimsner.verify_gauge(a, xi, sys_, n, Fraction(1, 3)),
            "generators": pimsner.verify_generators(a, b, sys_, n),
        }
        try:
            cov["condition_iii"] = pimsner.verify_condition_iii(
                SampledFunction.constant(1), sys_, cloud, n, tol=max(args.tol, 1e-10), branch_tol=BRANCH_TOL)
        except OnBranchSet as exc:
            raise _Exit(EXIT_BRANCH, f"condition (iii) with a = 1: {exc}") from exc
        results["covariance"] = {"check": "covariance", "status": _aggregate(cov), "parts": cov,
                                 "note": pimsner.CANONICAL_TAIL_NOTE}
    if "cograph" in args.checks:
        try:
            results["cograph"] = pimsner.verify_cograph_generators(sys_, cloud, n, BRANCH_TOL)
        except NotCographSeparated as exc:
            results["cograph"] = {"check": "cograph", "status": "fail: NotCographSeparated", "reason": str(exc),
                                  "normalization_note": pimsner.NORMALIZATION_NOTE}
    if "exel" in args.checks:
        gamma = sys_.left_inverse
        if gamma is None:
            raise _Exit(EXIT_LEFT_INVERSE, f"system {sys_.name} has no left inverse")
        part = {}
        try:
            part["left_inverse"] = exel.verify_left_inverse(sys_, gamma, cloud, max(args.tol, 1e-14))
        except NotLeftInverse as exc:
            part["left_inverse"] = exc.report
        part["transfer_identity"] = exel.verify_transfer_identity(a, b, sys_, gamma, cloud, max(args.tol, 1e-12))
        part["toeplitz"] = exel.verify_toeplitz(a, sys_, gamma, n)
        part["gauge"] = exel.verify_exel_gauge(a, sys_, n, Fraction(1, 4))
        ha = _hat_away_from(sys_, cloud, br)
        try:
            part["redundancy"] = exel.verify_redundancy(ha, a, sys_, gamma, cloud, args.tol, BRANCH_TOL)
        except OnBranchSet as exc:
            raise _Exit(EXIT_BRANCH, f"redundancy: {exc}") from exc
        results["exel"] = {"check": "exel", "status": _aggregate(part), "parts": part}
    return results


def cmd_verify(args) -> int:
    sys_ = load_system(args.system)
    results = run_checks(sys_, args)
    ok = all(_status_ok(r) for r in results.values())
    report = {
        "schema": SCHEMA,
        "system": sys_.name,
        "config": {"checks": args.checks, "depth": args.depth, "tol": args.tol, "eps": _eps(args, sys_)},
        "osc_certificate": None if args.osc_certificate is None else args.osc_certificate == "true",
        "checks": results,
        "status": "pass" if ok else "fail",
    }
    text = dumps(report)
    if args.out:
        Path(args.out).write_text(text)
    sys.stdout.write(text)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_codemap(args) -> int:
    sys_ = load_system(args.system)
    w = parse_word(args.word, sys_.d)
    eps = _eps(args, sys_)
    diam = diameter_bound(_cloud(sys_, eps).cloud)
    x = code_point(sys_, w)
    bound = code_error_bound(sys_, len(w), diam)
    out = {
        "schema": SCHEMA,
        "system": sys_.name,
        "word": format_word(w),
        "point": [float(v) for v in x],
        "point_exact": [format_rational(v) for v in x],
        "bound": bound,
        "diameter_bound": diam,
        "note": pimsner.CANONICAL_TAIL_NOTE,
    }
    sys.stdout.write(dumps(out))
    return EXIT_OK


COMMANDS = {"attractor": cmd_attractor, "verify": cmd_verify, "codemap": cmd_codemap}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except _Exit as exc:
        print(f"ifs-oalg: {exc}", file=sys.stderr)
        return exc.code
    except NotHyperbolic as exc:
        print(f"ifs-oalg: not hyperbolic: {exc}", file=sys.stderr)
        return EXIT_HYPERBOLIC
    except OnBranchSet as exc:
        print(f"ifs-oalg: {exc}", file=sys.stderr)
        return EXIT_BRANCH
    except (SpecParseError, LetterOutOfRange, BudgetExceeded) as exc:
        print(f"ifs-oalg: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except IFSError as exc:
        print(f"ifs-oalg: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
