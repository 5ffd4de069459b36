"""Command-line driver for the verification suites."""

from __future__ import annotations

import argparse
import os
import sys

from .runner import ALL_SUITES, ConfigError, SuiteConfig, emit_report, run_suite

REPORT_DIR_ENV = "PADICLAB_REPORT_DIR"


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="padiclab",
        description=(
            "Run exact p-adic verification suites for the cyclotomic local"
            " points, the finite-level Coleman maps and the Tate curve"
        ),
    )
    ap.add_argument("--p", type=int, default=3, help="odd prime (default 3)")
    ap.add_argument("--nmax", type=int, default=2, help="top tower level (default 2)")
    ap.add_argument("--prec", type=int, default=30, help="target precision (default 30)")
    ap.add_argument("--q-ord", type=int, default=1, help="valuation of the Tate parameter")
    ap.add_argument(
        "--q-unit", type=int, default=None, help="unit part of the Tate parameter (default 1+p)"
    )
    ap.add_argument(
        "--kappa-gamma", type=int, default=None, help="value of the generator (default 1+p)"
    )
    ap.add_argument("--seed", type=int, default=0, help="seed for the functional battery")
    ap.add_argument(
        "--suite",
        action="append",
        choices=ALL_SUITES,
        default=None,
        help="suite to run (repeatable; default: all)",
    )
    ap.add_argument("--deep", action="store_true", help="enable the generation index check")
    ap.add_argument(
        "--functionals", type=int, default=20, help="seeded functionals per level (default 20)"
    )
    ap.add_argument(
        "--lratio", type=int, default=1, help="input L-value/period ratio for the bookkeeping suite"
    )
    ap.add_argument("--format", choices=("json", "text"), default="json")
    ap.add_argument("--out", default=None, help="output path (default: stdout)")
    ap.add_argument(
        "--timings",
        action="store_true",
        help="record wall-clock millis (breaks byte-stability of reports)",
    )
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    suites = tuple(args.suite) if args.suite else ALL_SUITES
    config = SuiteConfig(
        p=args.p,
        n_max=args.nmax,
        prec=args.prec,
        q_ord=args.q_ord,
        q_unit=args.q_unit,
        kappa_gamma=args.kappa_gamma,
        seed=args.seed,
        suites=suites,
        deep=args.deep,
        n_functionals=args.functionals,
        lratio=args.lratio,
        timings=args.timings,
    )
    try:
        config.resolved()
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    report = run_suite(config)
    out = args.out
    if out is None and os.environ.get(REPORT_DIR_ENV):
        os.makedirs(os.environ[REPORT_DIR_ENV], exist_ok=True)
        tag = f"report-p{args.p}-n{args.nmax}-N{args.prec}-s{args.seed}.{args.format}"
        out = os.path.join(os.environ[REPORT_DIR_ENV], tag)
    try:
        payload = emit_report(report, args.format, out)
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 2
    if out is None:
        if isinstance(payload, bytes):
            sys.stdout.buffer.write(payload)
        else:
            sys.stdout.write(payload)
    else:
        print(f"wrote {out}", file=sys.stderr)
    return report.exit_code


if __name__ == "__main__":
    raise SystemExit(main())
