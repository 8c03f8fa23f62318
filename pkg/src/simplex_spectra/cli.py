"""
Command-line front end: ``census``, ``verify`` and ``basin``.

Exit codes: 0 ok, 1 a verification check failed, 2 usage error,
3 degenerate (n, m) combination, 4 internal invariant violation.
"""

from __future__ import annotations

import argparse
import logging
import os
import re
import sys
from typing import Optional, Sequence

from . import __version__
from .classify import TheoryNumericMismatch
from .oracle import (COVERAGE_SCALE, verify_census_against_multistart,
                     verify_rank_one_contractions)
from .power import basin_experiment
from .report import basin_report, census_report, serialize, verify_report
from .stationary import CorrespondenceError, DegenerateCombinationError, census
from .tensor import MAX_ENTRIES

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_DEGENERATE = 3
EXIT_INTERNAL = 4

SEED_ENV = "SIMPLEX_SPECTRA_SEED"
SEED_MAX = 2 ** 64 - 1
MAX_N = 12

log = logging.getLogger("simplex_spectra")


class UsageError(ValueError):
    pass


def _seed(text: str) -> int:
    try:
        value = int(text, 10)
    except ValueError:
        raise UsageError(f"seed must be an integer, got {text!r}") from None
    if not 0 <= value <= SEED_MAX:
        raise UsageError("seed must lie in [0, 2**64 - 1]")
    return value


def resolve_seed(flag: Optional[str], environ=os.environ) -> int:
    """Flag beats ``SIMPLEX_SPECTRA_SEED`` beats the default 0."""
    if flag is not None:
        return _seed(flag)
    env = environ.get(SEED_ENV)
    if env not in (None, ""):
        return _seed(env)
    return 0


_RANGE = re.compile(r"^\s*([nm])\s*=\s*(\d+)(?:\s*\.\.\s*(\d+))?\s*$")


def parse_grid(text: str) -> list[tuple[int, int]]:
    """
    Parse ``"n=3..5,m=3..5"`` into the sorted (n, m) product.

    A single value (``n=4``) is also accepted. Both keys are required.
    """
    ranges = {}
    for part in text.split(","):
        match = _RANGE.match(part)
        if not match:
            raise UsageError(f"cannot parse grid component {part!r}")
        key, lo, hi = match.group(1), int(match.group(2)), match.group(3)
        hi = lo if hi is None else int(hi)
        if key in ranges:
            raise UsageError(f"grid key {key!r} given twice")
        if hi < lo:
            raise UsageError(f"empty range in {part!r}")
        ranges[key] = range(lo, hi + 1)
    if set(ranges) != {"n", "m"}:
        raise UsageError("grid must specify both n and m")
    return [(n, m) for n in ranges["n"] for m in ranges["m"]]


def _check_nm(n: int, m: int) -> None:
    if n < 3 or m < 3:
        raise UsageError("need n >= 3 and m >= 3")
    if n > MAX_N:
        raise UsageError(f"n > {MAX_N} is outside the supported range")


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


###############################################################################
# Commands


def cmd_census(args) -> int:
    _check_nm(args.n, args.m)
    report = census_report(args.n, args.m, seed=args.seed)
    _emit(serialize(report, args.format), args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    grid = parse_grid(args.grid)
    for n, m in grid:
        _check_nm(n, m)
        if (n - 1) ** m > MAX_ENTRIES:
            raise UsageError(f"dense tensor for (n, m) = ({n}, {m}) is too large")
    # (3, 4) has no isolated stationary points, so only its contractions are checked
    multistart = [(n, m) for n, m in grid if (n, m) != (3, 4)]
    skipped = [(n, m) for n, m in grid if (n, m) == (3, 4)]
    outside = [(n, m) for n, m in multistart if n > 5 or m > 6]
    if outside:
        raise UsageError(f"multistart cross-check limited to n <= 5, m <= 6; got {outside}")
    starts = args.starts
    checks = [verify_rank_one_contractions(grid, seed=args.seed)]
    for n, m in multistart:
        checks.append(verify_census_against_multistart(n, m, starts=starts, seed=args.seed))
    report = verify_report(checks, args.seed, starts, skipped)
    _emit(serialize(report, args.format), args.out)
    return EXIT_OK if report["passed"] else EXIT_CHECK_FAILED


def cmd_basin(args) -> int:
    _check_nm(args.n, args.m)
    if args.runs < 0:
        raise UsageError("--runs must be >= 0")
    if args.shift is not None and not args.shift >= 0:
        raise UsageError("--shift must be >= 0")
    cen = census(args.n, args.m)
    result = basin_experiment(args.n, args.m, args.runs, seed=args.seed,
                              shift=args.shift, reference=cen)
    report = basin_report(result, cen)
    _emit(serialize(report, args.format), args.out)
    if result.runs and not result.all_certified:
        log.error("%d converged limits not certified against the census", result.unmatched)
        return EXIT_INTERNAL
    return EXIT_OK


###############################################################################
# Parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="simplex-spectra",
        description="Stationary points and eigenpairs of regular simplex tensors.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--out", metavar="FILE", default=None)
    common.add_argument("--seed", metavar="U64", default=None,
                        help=f"RNG seed (default: ${SEED_ENV} or 0)")

    p = sub.add_parser("census", parents=[common], help="enumerate and classify stationary points")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.set_defaults(func=cmd_census)

    p = sub.add_parser("verify", parents=[common], help="run the brute-force cross-checks")
    p.add_argument("--grid", required=True, help='e.g. "n=3..5,m=3..5"')
    p.add_argument("--starts", type=int, default=COVERAGE_SCALE)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("basin", parents=[common], help="shifted power-method basin experiment")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--runs", type=int, default=1000)
    p.add_argument("--shift", type=float, default=None,
                   help="shift gamma (default (m-1)*n)")
    p.set_defaults(func=cmd_basin)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on bad usage, 0 after --help / --version
        return int(exc.code or 0)
    try:
        args.seed = resolve_seed(args.seed)
        if getattr(args, "starts", 1) < 1:
            raise UsageError("--starts must be >= 1")
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DegenerateCombinationError as exc:
        print(f"error: degenerate combination: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (TheoryNumericMismatch, CorrespondenceError) as exc:
        print(f"error: internal invariant violated: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
