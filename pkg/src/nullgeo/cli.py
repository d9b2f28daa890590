"""Command line interface.

    nullgeo check <path|builtin:NAME> [--samples N] [--seed S]
        [--tol FAMILY=VAL]... [--only FAMILY,...] [--format text|json]
        [--param NAME=VAL]... [--mutate SPEC]... [-o FILE]

Exit codes: 0 all checks pass, 1 at least one failure, 2 load/usage error.
The environment variable NULLGEO_TOL_SCALE multiplies every tolerance.
"""

from __future__ import annotations

import argparse
import sys

from .errors import NullGeoError
from .report import emit_report
from .runner import FAMILIES, run_checks
from .scenario import apply_mutation, load_scenario


def _parse_kv(items, cast, flag):
    out = {}
    for item in items or []:
        key, sep, val = item.partition("=")
        if not sep:
            raise NullGeoError(f"{flag} expects NAME=VALUE, got '{item}'")
        try:
            out[key] = cast(val)
        except ValueError as exc:
            raise NullGeoError(f"{flag} {key}: {exc}") from exc
    return out


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nullgeo", description=__doc__.strip().splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    chk = sub.add_parser("check", help="run verification checks on a scenario")
    chk.add_argument("scenario", help="path to a scenario JSON file or builtin:NAME")
    chk.add_argument("--samples", type=int, default=None, help="number of sample points")
    chk.add_argument("--seed", type=int, default=None, help="sampling seed")
    chk.add_argument("--tol", action="append", metavar="FAMILY=VAL", help="tolerance override (family or check id)")
    chk.add_argument("--only", action="append", metavar="FAMILY,...", help=f"check families to run, from: {', '.join(FAMILIES)}")
    chk.add_argument("--format", choices=("text", "json"), default="text")
    chk.add_argument("--param", action="append", metavar="NAME=VAL", help="scenario parameter override")
    chk.add_argument("--mutate", action="append", metavar="SPEC", help="perturb one entry: phi:I,J,D | metric:I,J,D | frame:ROLE,K,COMP,D")
    chk.add_argument("-o", "--output", default=None, help="write the report to a file instead of stdout")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        doc = load_scenario(args.scenario)
        for spec in args.mutate or []:
            doc = apply_mutation(doc, spec)
        selectors = None
        if args.only:
            selectors = [f for chunk in args.only for f in chunk.split(",") if f]
        report = run_checks(
            doc,
            selectors=selectors,
            samples=args.samples,
            seed=args.seed,
            tol_overrides=_parse_kv(args.tol, float, "--tol"),
            param_overrides=_parse_kv(args.param, float, "--param"),
        )
    except NullGeoError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    payload = emit_report(report, args.format)
    if args.output:
        with open(args.output, "wb") as fh:
            fh.write(payload)
    else:
        sys.stdout.buffer.write(payload)
    return 0 if not report.failed else 1


if __name__ == "__main__":
    sys.exit(main())
