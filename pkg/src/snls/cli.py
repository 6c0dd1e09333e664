"""Command-line entry point.

Subcommands: run, sweep-n, operator-tests, convergence, report.
Exit codes: 0 success, 2 invalid configuration, 3 numeric failure
(e.g. Cayley non-convergence; the manifest records the failing step).
"""

from __future__ import annotations

import argparse
import sys

from .config import ConfigError, load_config
from .integrators import CayleyConvergenceError
from .runner import (
    resolve_threads,
    run_convergence,
    run_ensemble,
    run_operator_tests,
    run_report,
    run_sweep,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def _common_flags(parser: argparse.ArgumentParser, top_level: bool) -> None:
    # subcommand copies use SUPPRESS so they never clobber values already
    # parsed from the top-level position of the same flag
    d = {} if top_level else {"default": argparse.SUPPRESS}
    parser.add_argument("--config", **({"help": "path to the run configuration file"} | d))
    parser.add_argument("--out", **({"help": "output directory (default: ./out)"} |
                                    ({"default": "out"} if top_level else d)))
    parser.add_argument("--threads", type=int,
                        **({"help": "worker pool size for path-level parallelism (0 = auto)"} |
                           ({"default": 0} if top_level else d)))
    parser.add_argument("--quiet", action="store_true",
                        **({"help": "suppress stdout; diagnostics still go to stderr"} | d))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="snls",
        description="Pseudospectral simulator for the stochastic NLS with "
                    "multiplicative Stratonovich noise on a periodic box.",
    )
    _common_flags(parser, top_level=True)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("run", "integrate an ensemble and write time series + manifest"),
        ("sweep-n", "run the truncation-level sweep with shared driving noise"),
        ("operator-tests", "exact multiplier checks for the truncation operator bounds"),
        ("convergence", "strong-error study against the linear-noise oracle"),
        ("report", "verify checksums and summarize a finished run directory"),
    ):
        p = sub.add_parser(name, help=help_text)
        _common_flags(p, top_level=False)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    quiet = args.quiet

    if args.command == "report":
        try:
            return run_report(args.out, quiet=quiet)
        except FileNotFoundError as exc:
            print(f"report: {exc}", file=sys.stderr)
            return EXIT_CONFIG

    if not args.config:
        print(f"{args.command}: --config is required", file=sys.stderr)
        return EXIT_CONFIG
    try:
        config = load_config(args.config)
    except ConfigError as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    threads = resolve_threads(args.threads)
    try:
        if args.command == "run":
            run_ensemble(config, args.out, threads=threads, quiet=quiet)
        elif args.command == "sweep-n":
            run_sweep(config, args.out, threads=threads, quiet=quiet)
        elif args.command == "operator-tests":
            report = run_operator_tests(config, args.out, quiet=quiet)
            return EXIT_OK if report["all_passed"] else 1
        elif args.command == "convergence":
            run_convergence(config, args.out, threads=threads, quiet=quiet)
    except CayleyConvergenceError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
