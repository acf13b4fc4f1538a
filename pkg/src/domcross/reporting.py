"""Result persistence: row schema, CSV round-trip, config files, manifests.

Rows use a fixed metric vocabulary and a flat CSV layout so simulation
output is diffable and golden-file friendly.  Floats are written with their
shortest round-trip representation; parsing the emitted file recovers the
rows exactly.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
from dataclasses import dataclass
from pathlib import Path

from .simulation import (
    ChangepointDesign,
    CellMetrics,
    SigmaSeriesDesign,
    SigmaSeriesRow,
)

__all__ = [
    "CSV_COLUMNS",
    "ConfigError",
    "METRICS",
    "NoDataError",
    "ResultRow",
    "SchemaError",
    "changepoint_design_from_config",
    "read_rows",
    "rows_from_cell_metrics",
    "rows_from_sigma_series",
    "rows_to_csv_text",
    "sigma_design_from_config",
    "write_manifest",
    "write_rows",
]

METRICS = (
    "rel_bias_pct",
    "boot_median_rel_bias_pct",
    "coverage95",
    "coverage90",
    "w_left_95",
    "w_right_95",
    "w_left_90",
    "w_right_90",
    "sigma_rel_bias_pct",
)

SERIES_NAMES = ("sigma", "changepoint")

CSV_COLUMNS = ("series", "n", "delta", "sigma_c", "alpha", "k", "metric", "value", "mc_se")


class SchemaError(ValueError):
    """CSV contents do not match the result-row schema."""


class NoDataError(ValueError):
    """An operation that needs result rows received none."""


class ConfigError(ValueError):
    """A design config file failed validation; names the offending field."""


@dataclass(frozen=True)
class ResultRow:
    """One metric value of one design cell.

    ``delta`` and ``sigma_c`` are None for the sigma series; ``k`` is None
    for the raw plug-in rows of the sigma series.
    """

    series: str
    n: int
    delta: float | None
    sigma_c: float | None
    alpha: float
    k: int | None
    metric: str
    value: float
    mc_se: float | None

    def __post_init__(self):
        if self.series not in SERIES_NAMES:
            raise SchemaError(f"unknown series {self.series!r}; expected one of {SERIES_NAMES}")
        if self.metric not in METRICS:
            raise SchemaError(f"unknown metric {self.metric!r}; expected one of {METRICS}")


def rows_from_sigma_series(results: list[SigmaSeriesRow]) -> list[ResultRow]:
    """Convert sigma-series output to result rows."""
    return [
        ResultRow(
            series="sigma",
            n=r.n,
            delta=None,
            sigma_c=None,
            alpha=r.alpha,
            k=r.k,
            metric="sigma_rel_bias_pct",
            value=r.rel_bias_pct,
            mc_se=r.mc_se,
        )
        for r in results
    ]


def rows_from_cell_metrics(metrics: list[CellMetrics]) -> list[ResultRow]:
    """Convert changepoint-grid output to result rows, nine per cell."""
    rows = []
    for cm in metrics:
        pairs = (
            ("rel_bias_pct", cm.rel_bias_pct, cm.rel_bias_pct_se),
            ("sigma_rel_bias_pct", cm.sigma_rel_bias_pct, cm.sigma_rel_bias_pct_se),
            ("boot_median_rel_bias_pct", cm.boot_median_rel_bias_pct, cm.boot_median_rel_bias_pct_se),
            ("coverage95", cm.coverage95, cm.coverage95_se),
            ("coverage90", cm.coverage90, cm.coverage90_se),
            ("w_left_95", cm.w_left_95, cm.w_left_95_se),
            ("w_right_95", cm.w_right_95, cm.w_right_95_se),
            ("w_left_90", cm.w_left_90, cm.w_left_90_se),
            ("w_right_90", cm.w_right_90, cm.w_right_90_se),
        )
        for metric, value, se in pairs:
            rows.append(
                ResultRow(
                    series="changepoint",
                    n=cm.cell.n,
                    delta=cm.cell.delta,
                    sigma_c=cm.cell.sigma_c,
                    alpha=cm.cell.alpha,
                    k=cm.k,
                    metric=metric,
                    value=value,
                    mc_se=se,
                )
            )
    return rows


# ---------------------------------------------------------------------------
# CSV round-trip
# ---------------------------------------------------------------------------

def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def rows_to_csv_text(rows: list[ResultRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in rows:
        writer.writerow(
            [
                r.series,
                r.n,
                _fmt(r.delta),
                _fmt(r.sigma_c),
                _fmt(r.alpha),
                _fmt(r.k),
                r.metric,
                _fmt(r.value),
                _fmt(r.mc_se),
            ]
        )
    return buf.getvalue()


def write_rows(rows: list[ResultRow], path) -> None:
    """Write rows as UTF-8 CSV with a header; emission is deterministic."""
    Path(path).write_text(rows_to_csv_text(rows), encoding="utf-8")


def _parse_opt_float(text: str) -> float | None:
    return None if text == "" else float(text)


def _parse_opt_int(text: str) -> int | None:
    return None if text == "" else int(text)


def read_rows(path) -> list[ResultRow]:
    """Parse a result CSV, validating the schema and metric vocabulary."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file, no header row") from None
        missing = [c for c in CSV_COLUMNS if c not in header]
        if missing:
            raise SchemaError(f"{path}: missing columns {missing}")
        if tuple(header) != CSV_COLUMNS:
            raise SchemaError(f"{path}: unexpected column order {header}")
        rows = []
        for lineno, rec in enumerate(reader, start=2):
            if len(rec) != len(CSV_COLUMNS):
                raise SchemaError(f"{path}:{lineno}: expected {len(CSV_COLUMNS)} fields")
            try:
                rows.append(
                    ResultRow(
                        series=rec[0],
                        n=int(rec[1]),
                        delta=_parse_opt_float(rec[2]),
                        sigma_c=_parse_opt_float(rec[3]),
                        alpha=float(rec[4]),
                        k=_parse_opt_int(rec[5]),
                        metric=rec[6],
                        value=float(rec[7]),
                        mc_se=_parse_opt_float(rec[8]),
                    )
                )
            except (ValueError, SchemaError) as exc:
                if isinstance(exc, SchemaError):
                    raise
                raise SchemaError(f"{path}:{lineno}: {exc}") from None
    return rows


# ---------------------------------------------------------------------------
# Design config files
# ---------------------------------------------------------------------------
# Flat "key = value" lines; lists are comma-separated; '#' starts a comment.

def _parse_kv(text: str) -> dict[str, str]:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        key = key.strip()
        if key in out:
            raise ConfigError(f"field {key!r}: duplicated")
        out[key] = value.strip()
    return out


def _floats(raw: str, field: str) -> tuple:
    try:
        return tuple(float(part.strip()) for part in raw.split(","))
    except ValueError:
        raise ConfigError(f"field {field!r}: could not parse {raw!r} as a list of numbers") from None


def _ints(raw: str, field: str) -> tuple:
    try:
        return tuple(int(part.strip()) for part in raw.split(","))
    except ValueError:
        raise ConfigError(f"field {field!r}: could not parse {raw!r} as a list of integers") from None


def _int(raw: str, field: str) -> int:
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"field {field!r}: could not parse {raw!r} as an integer") from None


def _float(raw: str, field: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"field {field!r}: could not parse {raw!r} as a number") from None


def sigma_design_from_config(text: str, seed: int) -> SigmaSeriesDesign:
    """Build a sigma-series design from config text; unknown keys are errors."""
    kv = _parse_kv(text)
    allowed = {"alphas", "ns", "reps", "k_grid"}
    unknown = sorted(set(kv) - allowed)
    if unknown:
        raise ConfigError(f"field {unknown[0]!r}: not a sigma-series setting")
    kwargs = {}
    if "alphas" in kv:
        kwargs["alphas"] = _floats(kv["alphas"], "alphas")
    if "ns" in kv:
        kwargs["ns"] = _ints(kv["ns"], "ns")
    if "reps" in kv:
        kwargs["reps"] = _int(kv["reps"], "reps")
    if "k_grid" in kv:
        kwargs["k_grid"] = _ints(kv["k_grid"], "k_grid")
    try:
        return SigmaSeriesDesign(seed=seed, **kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def changepoint_design_from_config(text: str, seed: int) -> ChangepointDesign:
    """Build a changepoint-grid design from config text; unknown keys are errors."""
    kv = _parse_kv(text)
    allowed = {"ns", "deltas", "sigma_cs", "alphas", "mu_c", "m", "b"}
    unknown = sorted(set(kv) - allowed)
    if unknown:
        raise ConfigError(f"field {unknown[0]!r}: not a changepoint-grid setting")
    kwargs = {}
    if "ns" in kv:
        kwargs["ns"] = _ints(kv["ns"], "ns")
    if "deltas" in kv:
        kwargs["deltas"] = _floats(kv["deltas"], "deltas")
    if "sigma_cs" in kv:
        kwargs["sigma_cs"] = _floats(kv["sigma_cs"], "sigma_cs")
    if "alphas" in kv:
        kwargs["alphas"] = _floats(kv["alphas"], "alphas")
    if "mu_c" in kv:
        kwargs["mu_c"] = _float(kv["mu_c"], "mu_c")
    if "m" in kv:
        kwargs["m"] = _int(kv["m"], "m")
    if "b" in kv:
        kwargs["b"] = _int(kv["b"], "b")
    try:
        return ChangepointDesign(seed=seed, **kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def write_manifest(path, *, series: str, seed: int, config_text: str, n_cells: int, version: str) -> None:
    """Record what produced a result file: seed, config hash, cell count."""
    payload = {
        "cells": n_cells,
        "config_sha256": hashlib.sha256(config_text.encode("utf-8")).hexdigest(),
        "seed": seed,
        "series": series,
        "version": version,
    }
    Path(path).write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8")
