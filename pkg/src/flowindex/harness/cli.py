"""Command line interface.

Exit codes: 0 all checks pass, 1 an equality check failed, 2 usage or input
error, 3 numerical non-convergence.
"""

from __future__ import annotations

import argparse
import re
import sys

from ..bvp1d.flow import sf_oracle, spectral_flow, track_flow
from ..maslov import (
    DegenerateCrossingError,
    SymplecticFamily,
    maslov_index,
    maslov_via_crossings,
    winding_oracle,
)
from ..specflow import HERMITIAN, NonConvergenceError, WindowCollisionError, sf_partition
from ..sympcore import same_span
from ..tolerances import override
from .report import csv_text, dumps
from .runner import emit_curves, load_scenario, run_scenario, run_suite
from .schema import SchemaError, load_json, parse_lagrangian_pair, parse_matrix_path

EXIT_OK, EXIT_MISMATCH, EXIT_USAGE, EXIT_NONCONVERGENCE = 0, 1, 2, 3


def parse_seeds(text: str) -> list[int]:
    """``"1..50"``, ``"3,7,9"`` or a mix such as ``"1..5,10"``."""
    seeds = []
    for part in text.split(","):
        part = part.strip()
        m = re.fullmatch(r"(-?\d+)\.\.(-?\d+)", part)
        if m:
            lo, hi = int(m.group(1)), int(m.group(2))
            if hi < lo:
                raise argparse.ArgumentTypeError(f"empty seed range {part!r}")
            seeds.extend(range(lo, hi + 1))
        elif re.fullmatch(r"-?\d+", part):
            seeds.append(int(part))
        else:
            raise argparse.ArgumentTypeError(f"bad seed list {text!r}; use e.g. 1..50 or 1,2,3")
    return seeds


def _common():
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--tol-rank", type=float, help="relative singular value cut-off for ranks")
    p.add_argument("--tol-zero", type=float, help="relative half-width of the zero eigenvalue band")
    p.add_argument("--step", type=float, help="initial Runge-Kutta step; Cauchy data then use Runge-Kutta")
    p.add_argument("--out", help="output file (directory for curves); stdout by default")
    fmt = p.add_mutually_exclusive_group()
    fmt.add_argument("--json", dest="format", action="store_const", const="json", help="JSON output (default)")
    fmt.add_argument("--csv", dest="format", action="store_const", const="csv", help="CSV output")
    p.set_defaults(format="json")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(
        prog="flowindex",
        description="Spectral flow and Maslov index computations for matrix paths and boundary value problems.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def source(p, pair=False):
        g = p.add_mutually_exclusive_group(required=True)
        g.add_argument("--scenario", help="scenario JSON file or catalog name (R1, P1, J1, Z1, L1)")
        if pair:
            g.add_argument("--pair", help="Lagrangian pair JSON file")
        else:
            g.add_argument("--matrix-path", help="matrix path JSON file")

    p = sub.add_parser("sf", parents=[common], help="spectral flow by the partition method")
    source(p)
    p.add_argument("--orientation", type=int, choices=(1, -1), default=1)
    p = sub.add_parser("oracle", parents=[common], help="spectral flow by eigenvalue tracking")
    source(p)
    p = sub.add_parser("maslov", parents=[common], help="Maslov index by every applicable engine")
    source(p, pair=True)
    p = sub.add_parser("verify", parents=[common], help="both sides of SF = -Mas for one scenario")
    p.add_argument("--scenario", required=True, help="scenario JSON file or catalog name")
    p.add_argument("--crossings", action="store_true", help="also evaluate the Maslov index by crossing forms")
    p.add_argument("--timings", action="store_true", help="include wall-clock timings in the report")
    p = sub.add_parser("suite", parents=[common], help="verify a seeded random family or the catalog")
    p.add_argument("--seeds", type=parse_seeds, help="seed list, e.g. 1..50; omit to run the catalog")
    p.add_argument("--m", type=int, default=2, choices=(1, 2), help="fibre dimension of random scenarios")
    p.add_argument("--jobs", type=int, default=1, help="scenarios run concurrently")
    p = sub.add_parser("curves", parents=[common], help="write eigenvalue, Cauchy gap and winding CSV files")
    p.add_argument("--scenario", required=True, help="scenario JSON file or catalog name")
    p.add_argument("--samples", type=int, help="number of s intervals (default: the scenario's s_samples)")
    return parser


def _emit(args, payload):
    if args.format == "csv":
        rows = payload if isinstance(payload, list) else [payload]
        rows = [{k: v for k, v in r.items() if not isinstance(v, (dict, list))} for r in rows]
        header = list(rows[0]) if rows else []
        text = csv_text(header, [[r.get(k, "") for k in header] for r in rows])
    else:
        text = dumps(payload)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_sf(args):
    if args.matrix_path:
        total, comp = sf_partition(parse_matrix_path(load_json(args.matrix_path)), args.orientation)
        _emit(args, {"input": args.matrix_path, "sf_partition": total, "segments": len(comp.segment_terms)})
    else:
        sc = load_scenario(args.scenario, args.step)
        if args.orientation != 1:
            raise SchemaError("--orientation", "only the default co-orientation applies to scenarios")
        total, comp = spectral_flow(sc)
        _emit(args, {"input": sc.label, "sf_partition": total, "segments": len(comp.segment_terms)})
    return EXIT_OK


def _cmd_oracle(args):
    if args.matrix_path:
        path = parse_matrix_path(load_json(args.matrix_path))
        if path.kind != HERMITIAN:
            raise SchemaError("kind", "the tracking oracle follows real eigenvalues; use a hermitian path")
        rec = track_flow(lambda s: path.coordinates(s), cap=None)
        _emit(args, {"input": args.matrix_path, "sf_oracle": rec.total, "ambiguous": rec.ambiguous})
    else:
        sc = load_scenario(args.scenario, args.step)
        _emit(args, {"input": sc.label, "sf_oracle": sf_oracle(sc)})
    return EXIT_OK


def _cmd_maslov(args):
    if args.pair:
        lam, mu, space = parse_lagrangian_pair(load_json(args.pair))
        family = SymplecticFamily.constant(space)
        name = args.pair
    else:
        sc = load_scenario(args.scenario, args.step)
        lam, mu, family, name = sc.boundary, sc.cauchy_path(), sc.family(), sc.label
    mas, _ = maslov_index(lam, mu, family)
    out = {"input": name, "maslov_partition": mas, "maslov_crossings": None, "winding": None}
    try:
        out["maslov_crossings"] = maslov_via_crossings(lam, mu, family)
    except DegenerateCrossingError as exc:
        out["crossings_note"] = str(exc)
    try:
        out["winding"] = winding_oracle(lam, mu(0.0), family) if _fixed(mu) else None
    except ValueError:
        pass
    _emit(args, out)
    checks = [v for v in (out["maslov_crossings"], out["winding"]) if v is not None]
    return EXIT_OK if all(v == mas for v in checks) else EXIT_MISMATCH


def _fixed(mu):
    return all(same_span(mu(0.0), mu(s), tol=1e-8) for s in (0.25, 0.5, 0.75, 1.0))


def _cmd_verify(args):
    report = run_scenario(args.scenario, crossings=args.crossings, timings=args.timings, step=args.step)
    _emit(args, report.to_dict())
    ok = report.equal and report.sf_oracle == report.sf_partition
    if report.maslov_crossings is not None:
        ok = ok and report.maslov_crossings == report.maslov_partition
    return EXIT_OK if ok else EXIT_MISMATCH


def _cmd_suite(args):
    rows = run_suite(args.seeds, m=args.m, jobs=max(1, args.jobs), step=args.step)
    if args.format == "json":
        passed = sum(r["equal"] for r in rows)
        _emit(args, {"rows": rows, "passed": passed, "total": len(rows)})
    else:
        _emit(args, rows)
    return EXIT_OK if all(r["equal"] for r in rows) else EXIT_MISMATCH


def _cmd_curves(args):
    sc = load_scenario(args.scenario, args.step)
    files = emit_curves(sc, args.out or ".", args.samples)
    sys.stdout.write("".join(f"{f}\n" for f in files))
    return EXIT_OK


COMMANDS = {
    "sf": _cmd_sf,
    "oracle": _cmd_oracle,
    "maslov": _cmd_maslov,
    "verify": _cmd_verify,
    "suite": _cmd_suite,
    "curves": _cmd_curves,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    tols = {}
    if args.tol_rank is not None:
        tols["rank_rel"] = args.tol_rank
    if args.tol_zero is not None:
        tols["zero_rel"] = args.tol_zero
    try:
        with override(**tols):
            return COMMANDS[args.command](args)
    except SchemaError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except KeyError as exc:
        print(f"input error: {exc.args[0]}", file=sys.stderr)
        return EXIT_USAGE
    except (NonConvergenceError, WindowCollisionError) as exc:
        where = getattr(exc, "interval", None)
        suffix = f" (s in {where})" if where is not None else ""
        print(f"numerical failure: {exc}{suffix}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except ValueError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
