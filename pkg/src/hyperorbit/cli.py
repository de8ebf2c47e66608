"""hyperorbit command line: analyze, construct, density, simulate, log, example.

Exit codes: 0 success, 2 domain error (e.g. non-commuting input),
3 malformed input, 4 work budget exceeded.
"""

from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from . import __version__
from .analysis import analyze_family
from .constructor import build_generators, reference_checks_table, reference_example, reference_logs
from .density import density_verdict, empirical_coverage
from .exp_log import exp_K, log_branch, principal_log_K
from .io import (
    SCHEMA_VERSION,
    InputError,
    family_to_dict,
    load_family,
    load_semigroup,
    parse_family,
    read_json,
    write_json,
)
from .matrix_core import BlockPartition, BudgetExceeded, HyperorbitError, ToleranceConfig, max_norm
from .normal_form import NonCommutingError, compute_normal_form
from .orbit import coverage_report, emit_points, enumerate_orbit
from .semigroup import canonical_vectors

EXIT_DOMAIN = 2
EXIT_INPUT = 3
EXIT_BUDGET = 4


def _tol(args):
    return ToleranceConfig(structural_tol=args.tol, relation_height=args.height)


def _parse_vector(text, n):
    try:
        vals = [float(x) for x in text.replace(",", " ").split()]
    except ValueError as exc:
        raise InputError(f"cannot parse vector {text!r}") from exc
    if len(vals) != n:
        raise InputError(f"vector has {len(vals)} entries, expected {n}")
    return np.array(vals)


def cmd_analyze(args):
    mats, labels = load_family(args.family)
    cov = {"coeff_bound": args.coeff_bound, "box_halfwidth": args.box, "cells_per_axis": args.grid}
    report = analyze_family(mats, _tol(args), args.seed, cov, references=reference_checks_table())
    out = report.to_dict()
    out["labels"] = labels
    write_json(out, args.output)
    return 0


def cmd_construct(args):
    part = BlockPartition(tuple(args.t_blocks or ()), tuple(args.b_blocks or ()))
    recipe = build_generators(part, args.height, _tol(args))
    out = family_to_dict(recipe.A)
    out["recipe"] = recipe.to_dict()
    write_json(out, args.output)
    return 0


def cmd_density(args):
    H = load_semigroup(args.vectors)
    tol = _tol(args)
    verdict = density_verdict(H, tol=tol)
    out = {"schema_version": SCHEMA_VERSION, "n": H.n, "verdict": verdict.to_dict()}
    code = 0
    if H.n <= 3 or args.emit_points:
        stats, pts = empirical_coverage(
            H, args.coeff_bound, args.box, args.grid, norm=args.norm, return_points=True
        )
        if H.n > 3:
            stats = {k: v for k, v in stats.items() if k in ("points_in_box", "points_enumerated", "partial")}
        out["coverage"] = stats
        if args.emit_points:
            emit_points(pts, args.emit_points, H.n)
        if stats["partial"]:
            code = EXIT_BUDGET
    write_json(out, args.output)
    return code


def cmd_simulate(args):
    mats, _ = load_family(args.family)
    n = mats[0].shape[0]
    tol = _tol(args)
    if args.v0 == "auto":
        nf = compute_normal_form(mats, tol, args.seed)
        v0 = canonical_vectors(nf.partition, nf.P, tol).v0
    else:
        v0 = _parse_vector(args.v0, n)
    sample = enumerate_orbit(mats, v0, args.max_exp, args.box, include_identity=args.include_identity, tol=tol)
    out = {"schema_version": SCHEMA_VERSION, "v0": v0.tolist(), "max_exponent": args.max_exp}
    out["sample"] = sample.to_dict()
    if n <= 3:
        out["coverage"] = coverage_report(sample, args.grid)
    if args.emit_points:
        emit_points(sample, args.emit_points)
    write_json(out, args.output)
    return 0


def _parse_partition(text):
    """'2,1;1' -> T-blocks (2, 1), B-blocks (1,)."""
    t, _, b = text.partition(";")
    try:
        tb = tuple(int(x) for x in t.split(",") if x.strip())
        bb = tuple(int(x) for x in b.split(",") if x.strip())
        return BlockPartition(tb, bb)
    except ValueError as exc:
        raise InputError(f"bad partition {text!r}: expected e.g. '2,1;1'") from exc


def _parse_ints(text):
    try:
        return [int(x) for x in text.replace(",", " ").split()]
    except ValueError as exc:
        raise InputError(f"bad integer list {text!r}") from exc


def _load_matrices(path):
    data = read_json(path)
    if isinstance(data, dict) and "matrix" in data:
        data = {"generators": [data["matrix"]]}
    return parse_family(data, str(path))


def cmd_log(args):
    mats, labels = _load_matrices(args.matrix)
    tol = _tol(args)
    if args.partition:
        part = _parse_partition(args.partition)
        P = P_inv = np.eye(part.n)
    else:
        nf = compute_normal_form(mats, tol, args.seed)
        part, P, P_inv = nf.partition, nf.P, nf.P_inv
    branch = _parse_ints(args.branch) if args.branch else [0] * part.s
    entries = []
    for k, a in enumerate(mats):
        target = a @ a if args.square else a
        res = principal_log_K(P_inv @ target @ P, part, tol)
        b = log_branch(res, branch)
        entries.append({"label": labels[k], "log": (P @ b @ P_inv).tolist()})
    out = {
        "schema_version": SCHEMA_VERSION,
        "partition": part.to_dict(),
        "P": P.tolist(),
        "of_square": bool(args.square),
        "branch": branch,
        "logs": entries,
    }
    write_json(out, args.output)
    return 0


def cmd_example(args):
    if args.variant == "both":
        out = {"schema_version": SCHEMA_VERSION}
        for v in ("corrected", "printed"):
            out[v] = family_to_dict(reference_example(v))
        out["intended_square_logs"] = [b.tolist() for b in reference_logs()]
        a2 = reference_example("printed")[1]
        b2 = reference_logs()[1]
        out["printed_square_mismatch"] = max_norm(a2 @ a2 - exp_K(b2, BlockPartition((2,))))
    else:
        out = family_to_dict(reference_example(args.variant))
    write_json(out, args.output)
    return 0


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=1e-9, help="structural tolerance (default 1e-9)")
    common.add_argument("--seed", type=int, default=0, help="seed for generic combinations")
    common.add_argument("--height", type=int, default=10**6, help="integer relation height bound")
    common.add_argument("-o", "--output", default=None, help="output file (default stdout)")

    parser = argparse.ArgumentParser(prog="hyperorbit", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", parents=[common], help="decide hypercyclicity of a family")
    p.add_argument("family")
    p.add_argument("--coeff-bound", type=int, default=50)
    p.add_argument("--box", type=float, default=10 * math.pi)
    p.add_argument("--grid", type=int, default=50)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("construct", parents=[common], help="emit a minimal hypercyclic family")
    p.add_argument("--t-blocks", type=int, action="append", help="T-block size (repeatable)")
    p.add_argument("--b-blocks", type=int, action="append", help="B-block size in 2x2 units (repeatable)")
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("density", parents=[common], help="density verdict for additive generators")
    p.add_argument("vectors")
    p.add_argument("--coeff-bound", type=int, default=50)
    p.add_argument("--box", type=float, default=10 * math.pi)
    p.add_argument("--grid", type=int, default=50)
    p.add_argument("--norm", choices=("l1", "linf"), default="l1", help="coefficient bound type")
    p.add_argument("--emit-points", default=None, help="CSV file for enumerated in-box points")
    p.set_defaults(func=cmd_density)

    p = sub.add_parser("simulate", parents=[common], help="sample the orbit through v0")
    p.add_argument("family")
    p.add_argument("--v0", default="auto", help="'auto' or comma separated entries")
    p.add_argument("--max-exp", type=int, default=60)
    p.add_argument("--box", type=float, default=5.0)
    p.add_argument("--grid", type=int, default=50)
    p.add_argument("--include-identity", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--emit-points", default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("log", parents=[common], help="principal logarithm in a K class")
    p.add_argument("--matrix", required=True, help="JSON with 'matrix' or a family file")
    p.add_argument("--partition", default=None, help="e.g. '2,1;1'; omitted: computed by normal form")
    p.add_argument("--square", action="store_true", help="take logs of A^2")
    p.add_argument("--branch", default=None, help="branch integers k1,...,ks, one per B-block")
    p.set_defaults(func=cmd_log)

    p = sub.add_parser("example", parents=[common], help="the three-generator example on R^2")
    p.add_argument("--variant", choices=("corrected", "printed", "both"), default="both")
    p.set_defaults(func=cmd_example)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"hyperorbit: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except BudgetExceeded as exc:
        print(f"hyperorbit: budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except NonCommutingError as exc:
        print(f"hyperorbit: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (HyperorbitError, ValueError) as exc:
        print(f"hyperorbit: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except OSError as exc:
        print(f"hyperorbit: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
