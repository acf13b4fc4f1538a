"""Command-line front end.

Subcommands: estimate, ci, simulate-sigma, simulate-a, report.
Exit codes: 0 success, 2 usage, 3 validation, 4 numeric degeneracy.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import __version__
from .bootstrap import AllReplicatesDegenerateError, BootstrapConfig, bootstrap_ci
from .changepoint import (
    DegenerateRatioError,
    GroupParams,
    GroupSummary,
    InsufficientDataError,
    NoChangepointError,
    TruncationBoundError,
    classify_dominance,
    corrected_estimate,
    plug_in_estimate,
)
from .distributions import MomentExistenceError
from .plots import render_report
from .reporting import (
    ConfigError,
    NoDataError,
    SchemaError,
    changepoint_design_from_config,
    read_rows,
    rows_from_cell_metrics,
    rows_from_sigma_series,
    sigma_design_from_config,
    write_manifest,
    write_rows,
)
from .simulation import run_full_grid, run_sigma_series

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_VALIDATION = 3
EXIT_DEGENERATE = 4

OUT_DIR_ENV = "DOMCROSS_OUT_DIR"

_DEGENERATE_ERRORS = (
    DegenerateRatioError,
    NoChangepointError,
    TruncationBoundError,
    InsufficientDataError,
    MomentExistenceError,
    AllReplicatesDegenerateError,
)
_VALIDATION_ERRORS = (ConfigError, SchemaError, NoDataError, ValueError, OSError)


def _summary(mean, sd, n) -> GroupSummary:
    if sd <= 0:
        raise ValueError(f"standard deviations must be positive, got {sd}")
    if n < 3:
        raise ValueError(f"arm sizes must be >= 3, got {n}")
    return GroupSummary(mean=mean, variance=sd * sd, n=n)


def _cmd_estimate(args) -> int:
    t1 = _summary(args.mean1, args.sd1, args.n1)
    t2 = _summary(args.mean2, args.sd2, args.n2)
    est = corrected_estimate(t1, t2, args.k)
    plug = plug_in_estimate(t1, t2)
    ordering = classify_dominance(
        GroupParams(args.mean1, args.sd1), GroupParams(args.mean2, args.sd2)
    )
    print(f"plug-in estimate: {plug!r}")
    print(f"series estimate:  {est.estimate!r}  (k = {est.k})")
    print(f"sample SD ratio (smaller/larger): {est.sd_ratio!r}")
    print(f"arm with larger sample SD: {est.larger_sd_arm.value}")
    print(f"ordering (sample-oriented): {ordering.describe()}")
    return EXIT_OK


def _cmd_ci(args) -> int:
    t1 = _summary(args.mean1, args.sd1, args.n1)
    t2 = _summary(args.mean2, args.sd2, args.n2)
    est = corrected_estimate(t1, t2, args.k)
    cfg = BootstrapConfig(b=args.b, seed=args.seed, k=est.k)
    result = bootstrap_ci(t1, t2, cfg)
    levels = args.levels if args.levels else [0.95, 0.9]
    print(f"point estimate (series, k = {est.k}): {est.estimate!r}")
    print(f"bootstrap median: {result.median!r}")
    if 0.95 in levels:
        print(f"95% CI: [{result.ci95[0]!r}, {result.ci95[1]!r}]")
    if 0.9 in levels:
        print(f"90% CI: [{result.ci90[0]!r}, {result.ci90[1]!r}]")
    print(f"replicates: {args.b} ({result.n_degenerate} degenerate)")
    if args.csv:
        lines = ["prob,value"]
        lines += [f"{p!r},{v!r}" for p, v in result.quantiles.items()]
        Path(args.csv).write_text("\n".join(lines) + "\n", encoding="utf-8")
    return EXIT_OK


def _resolve_out_dir(args) -> Path:
    out = args.out_dir or os.environ.get(OUT_DIR_ENV)
    if not out:
        raise ValueError(f"no output directory: pass --out-dir or set {OUT_DIR_ENV}")
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _cmd_simulate_sigma(args) -> int:
    config_text = Path(args.config).read_text(encoding="utf-8")
    design = sigma_design_from_config(config_text, seed=args.seed)
    out_dir = _resolve_out_dir(args)
    rows = rows_from_sigma_series(run_sigma_series(design))
    csv_path = out_dir / "sigma_series.csv"
    write_rows(rows, csv_path)
    n_cells = len(design.alphas) * len(design.ns)
    write_manifest(
        out_dir / "sigma_series.manifest.json",
        series="sigma",
        seed=args.seed,
        config_text=config_text,
        n_cells=n_cells,
        version=__version__,
    )
    print(f"wrote {len(rows)} rows for {n_cells} cells to {csv_path}")
    return EXIT_OK


def _cmd_simulate_a(args) -> int:
    config_text = Path(args.config).read_text(encoding="utf-8")
    design = changepoint_design_from_config(config_text, seed=args.seed)
    out_dir = _resolve_out_dir(args)
    metrics = run_full_grid(design, parallelism=args.parallelism)
    rows = rows_from_cell_metrics(metrics)
    csv_path = out_dir / "changepoint.csv"
    write_rows(rows, csv_path)
    write_manifest(
        out_dir / "changepoint.manifest.json",
        series="changepoint",
        seed=args.seed,
        config_text=config_text,
        n_cells=len(metrics),
        version=__version__,
    )
    print(f"wrote {len(rows)} rows for {len(metrics)} cells to {csv_path}")
    return EXIT_OK


def _cmd_report(args) -> int:
    rows = []
    for path in args.csv_paths:
        rows.extend(read_rows(path))
    out_dir = _resolve_out_dir(args)
    paths = render_report(rows, args.appendix, out_dir)
    for p in paths:
        print(p)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="domcross",
        description=(
            "Estimate the outcome level where the stochastic ordering of two "
            "normal groups reverses, with bootstrap intervals and simulation "
            "studies."
        ),
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_summary_args(p):
        p.add_argument("--mean1", type=float, required=True, help="mean of arm 1")
        p.add_argument("--sd1", type=float, required=True, help="SD of arm 1")
        p.add_argument("--n1", type=int, required=True, help="size of arm 1")
        p.add_argument("--mean2", type=float, required=True, help="mean of arm 2")
        p.add_argument("--sd2", type=float, required=True, help="SD of arm 2")
        p.add_argument("--n2", type=int, required=True, help="size of arm 2")
        p.add_argument("--k", type=int, default=None, help="series truncation order")

    p = sub.add_parser("estimate", help="point estimates from two arm summaries")
    add_summary_args(p)
    p.set_defaults(func=_cmd_estimate)

    p = sub.add_parser("ci", help="bootstrap confidence intervals")
    add_summary_args(p)
    p.add_argument("--b", type=int, default=2000, help="bootstrap replicates")
    p.add_argument("--seed", type=int, required=True, help="root seed")
    p.add_argument("--levels", type=float, nargs="+", default=None,
                   help="confidence levels to print (subset of 0.95 0.9)")
    p.add_argument("--csv", default=None, help="also write replicate quantiles as CSV")
    p.set_defaults(func=_cmd_ci)

    p = sub.add_parser("simulate-sigma", help="run the series-convergence study")
    p.add_argument("--config", required=True, help="design config file")
    p.add_argument("--out-dir", default=None, help=f"output directory (or ${OUT_DIR_ENV})")
    p.add_argument("--seed", type=int, required=True, help="root seed")
    p.add_argument("--parallelism", type=int, default=1)
    p.set_defaults(func=_cmd_simulate_sigma)

    p = sub.add_parser("simulate-a", help="run the changepoint grid study")
    p.add_argument("--config", required=True, help="design config file")
    p.add_argument("--out-dir", default=None, help=f"output directory (or ${OUT_DIR_ENV})")
    p.add_argument("--seed", type=int, required=True, help="root seed")
    p.add_argument("--parallelism", type=int, default=1)
    p.set_defaults(func=_cmd_simulate_a)

    p = sub.add_parser("report", help="render SVG figures from result CSVs")
    p.add_argument("csv_paths", nargs="+", help="result CSV files")
    p.add_argument("--appendix", required=True, choices=["A", "B", "C", "fig1"],
                   help="figure layout to render")
    p.add_argument("--out-dir", default=None, help=f"output directory (or ${OUT_DIR_ENV})")
    p.set_defaults(func=_cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _DEGENERATE_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except _VALIDATION_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    raise SystemExit(main())
