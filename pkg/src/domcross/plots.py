"""Small-multiples SVG figures from result rows.

Each appendix figure is one file per arm size with a panel grid (SD-ratio
levels as rows, mean-difference levels as columns) plotted against the
control-arm SD.  The convergence figure plots series bias against the
truncation order with panels per (SD ratio, arm size).  Emission is a pure
function of the rows: no timestamps, fixed SVG hash salt, deterministic
bytes.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib
from matplotlib.figure import Figure

from .reporting import NoDataError, ResultRow, SchemaError

__all__ = ["FIG1_NS", "render_appendix", "render_fig1", "render_report"]

FIG1_NS = (32, 52, 102, 202)

_SVG_RC = {"svg.hashsalt": "domcross", "svg.fonttype": "none"}

_COLOR_MAIN = "black"
_COLOR_ALT = "green"
_COLOR_ZERO = "lightgray"
_COLOR_REF90 = "lightblue"


def _save(fig: Figure, path: Path) -> None:
    with matplotlib.rc_context(_SVG_RC):
        fig.savefig(path, format="svg", metadata={"Date": None})


def _require_metrics(rows, needed) -> None:
    present = {r.metric for r in rows}
    missing = sorted(set(needed) - present)
    if missing:
        raise SchemaError(f"rows lack required metrics {missing}")


def _grid_levels(rows):
    alphas = sorted({r.alpha for r in rows})
    deltas = sorted({r.delta for r in rows if r.delta is not None})
    sigma_cs = sorted({r.sigma_c for r in rows if r.sigma_c is not None})
    return alphas, deltas, sigma_cs


def _panel_series(rows, metric, n, delta, alpha, sigma_cs):
    vals = {
        r.sigma_c: r.value
        for r in rows
        if r.metric == metric and r.n == n and r.delta == delta and r.alpha == alpha
    }
    xs = [s for s in sigma_cs if s in vals]
    return xs, [vals[s] for s in xs]


def render_appendix(rows: list[ResultRow], appendix: str, out_dir) -> list[Path]:
    """Emit one SVG per arm size for appendix layout A, B or C.

    A: series and bootstrap-median relative bias with a zero line.
    B: coverage at both levels with reference lines at 0.95 and 0.90.
    C: signed left/right relative widths, solid 95% and dashed 90%.
    """
    appendix = appendix.upper()
    layouts = {
        "A": (("rel_bias_pct", "boot_median_rel_bias_pct"), "relative bias (%)"),
        "B": (("coverage95", "coverage90"), "coverage"),
        "C": (("w_left_95", "w_right_95", "w_left_90", "w_right_90"), "relative width (%)"),
    }
    if appendix not in layouts:
        raise ValueError(f"unknown appendix {appendix!r}; expected A, B or C")
    changepoint_rows = [r for r in rows if r.series == "changepoint"]
    if not changepoint_rows:
        raise NoDataError("no changepoint rows to plot")
    needed, ylabel = layouts[appendix]
    _require_metrics(changepoint_rows, needed)
    alphas, deltas, sigma_cs = _grid_levels(changepoint_rows)
    out_dir = Path(out_dir)
    paths = []
    for n in sorted({r.n for r in changepoint_rows}):
        fig = Figure(figsize=(3.0 * len(deltas), 2.4 * len(alphas)))
        axes = fig.subplots(len(alphas), len(deltas), squeeze=False, sharex=True)
        for i, alpha in enumerate(alphas):
            for j, delta in enumerate(deltas):
                ax = axes[i][j]
                _draw_panel(ax, appendix, changepoint_rows, n, delta, alpha, sigma_cs)
                if i == 0:
                    ax.set_title(f"delta = {delta:g}", fontsize=9)
                if j == 0:
                    ax.set_ylabel(f"ratio = {alpha:g}\n{ylabel}", fontsize=8)
                if i == len(alphas) - 1:
                    ax.set_xlabel("control-arm SD", fontsize=8)
                ax.tick_params(labelsize=7)
        fig.suptitle(f"n = {n} per arm", fontsize=11)
        fig.tight_layout(rect=(0, 0, 1, 0.97))
        path = out_dir / f"appendix_{appendix}_n{n}.svg"
        _save(fig, path)
        paths.append(path)
    return paths


def _draw_panel(ax, appendix, rows, n, delta, alpha, sigma_cs):
    if appendix == "A":
        x, y = _panel_series(rows, "rel_bias_pct", n, delta, alpha, sigma_cs)
        ax.plot(x, y, color=_COLOR_MAIN, marker="o", markersize=2.5)
        x, y = _panel_series(rows, "boot_median_rel_bias_pct", n, delta, alpha, sigma_cs)
        ax.plot(x, y, color=_COLOR_ALT, marker="o", markersize=2.5)
        ax.axhline(0.0, color=_COLOR_ZERO, zorder=0)
    elif appendix == "B":
        x, y = _panel_series(rows, "coverage95", n, delta, alpha, sigma_cs)
        ax.plot(x, y, color=_COLOR_MAIN, marker="o", markersize=2.5)
        x, y = _panel_series(rows, "coverage90", n, delta, alpha, sigma_cs)
        ax.plot(x, y, color=_COLOR_ALT, marker="o", markersize=2.5)
        ax.axhline(0.95, color=_COLOR_ZERO, zorder=0)
        ax.axhline(0.90, color=_COLOR_REF90, zorder=0)
    else:
        for metric, color, style in (
            ("w_left_95", _COLOR_MAIN, "-"),
            ("w_right_95", _COLOR_ALT, "-"),
            ("w_left_90", _COLOR_MAIN, "--"),
            ("w_right_90", _COLOR_ALT, "--"),
        ):
            x, y = _panel_series(rows, metric, n, delta, alpha, sigma_cs)
            ax.plot(x, y, color=color, linestyle=style, marker="o", markersize=2.5)


def render_fig1(rows: list[ResultRow], out_dir) -> Path:
    """Emit the series-convergence figure: bias of the truncated series vs k.

    Panels are laid out with SD-ratio levels as rows and arm sizes as
    columns; the canonical column sizes are used when present in the data.
    Plug-in rows (k=None) are not drawn.
    """
    sigma_rows = [r for r in rows if r.series == "sigma" and r.k is not None]
    if not sigma_rows:
        raise NoDataError("no sigma-series rows to plot")
    _require_metrics(sigma_rows, ("sigma_rel_bias_pct",))
    available_ns = sorted({r.n for r in sigma_rows})
    ns = [n for n in FIG1_NS if n in available_ns] or available_ns
    alphas = sorted({r.alpha for r in sigma_rows})
    fig = Figure(figsize=(3.0 * len(ns), 2.4 * len(alphas)))
    axes = fig.subplots(len(alphas), len(ns), squeeze=False)
    for i, alpha in enumerate(alphas):
        for j, n in enumerate(ns):
            ax = axes[i][j]
            pts = sorted(
                (r.k, r.value)
                for r in sigma_rows
                if r.alpha == alpha and r.n == n
            )
            ax.plot([p[0] for p in pts], [p[1] for p in pts],
                    color=_COLOR_MAIN, marker="o", markersize=2.5)
            ax.axhline(0.0, color=_COLOR_ZERO, zorder=0)
            if i == 0:
                ax.set_title(f"n = {n}", fontsize=9)
            if j == 0:
                ax.set_ylabel(f"ratio = {alpha:g}\nseries bias (%)", fontsize=8)
            if i == len(alphas) - 1:
                ax.set_xlabel("truncation order k", fontsize=8)
            ax.tick_params(labelsize=7)
    fig.tight_layout()
    path = Path(out_dir) / "fig1_series_convergence.svg"
    _save(fig, path)
    return path


def render_report(rows: list[ResultRow], appendix: str, out_dir) -> list[Path]:
    """Dispatch on the appendix selector; returns the emitted file paths."""
    if appendix.lower() == "fig1":
        return [render_fig1(rows, out_dir)]
    return render_appendix(rows, appendix, out_dir)
