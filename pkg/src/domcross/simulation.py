"""Monte Carlo studies of the series estimator and its bootstrap intervals.

Two study designs are provided.  The scaling-factor series draws SD ratios
directly (as sqrt of a scaled F variate) and measures the relative bias of
the truncated series for a grid of truncation orders.  The changepoint grid
simulates full two-arm summary data, estimates the crossing point, runs the
parametric bootstrap in every repetition, and reports relative bias,
interval coverage and signed relative interval widths per design cell.

Every (cell, repetition) pair owns an RNG stream derived from the root seed
and the cell parameters, so any parallel schedule produces identical output.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .bootstrap import BootstrapConfig, bootstrap_ci
from .changepoint import (
    DegenerateRatioError,
    GroupParams,
    GroupSummary,
    corrected_estimate,
    default_k,
    true_changepoint,
)
from .distributions import (
    derive_rng,
    derive_seed,
    log_f_moments,
    sample_f_ratio,
    sample_normal_mean,
    sample_variance,
)

__all__ = [
    "CellMetrics",
    "ChangepointCell",
    "ChangepointDesign",
    "DEFAULT_K_GRID",
    "SigmaSeriesDesign",
    "SigmaSeriesRow",
    "UndefinedRelativeWidthError",
    "relative_widths",
    "run_changepoint_cell",
    "run_full_grid",
    "run_sigma_series",
    "series_sums_from_ratios",
]

DEFAULT_K_GRID = (10, 20, 30, 40, 50, 75, 100, 150, 200)


class UndefinedRelativeWidthError(ValueError):
    """Relative interval widths are undefined when the true value is zero."""


# ---------------------------------------------------------------------------
# Series one: convergence of the truncated series in k
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SigmaSeriesDesign:
    """Grid for the scaling-factor study: SD ratios, arm sizes, repetitions.

    ``k_grid=None`` uses DEFAULT_K_GRID restricted per arm size to the
    orders whose moment corrections exist (k <= n - 2).  An explicit grid is
    validated against every arm size instead.
    """

    alphas: tuple = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)
    ns: tuple = (12, 22, 32, 42, 52, 77, 102, 152, 202)
    reps: int = 10_000
    k_grid: tuple | None = None
    seed: int = 0

    def __post_init__(self):
        if not all(0.0 < a < 1.0 for a in self.alphas):
            raise ValueError(f"alphas must lie strictly in (0, 1), got {self.alphas}")
        if not all(n >= 3 for n in self.ns):
            raise ValueError(f"arm sizes must be >= 3, got {self.ns}")
        if self.reps < 2:
            raise ValueError(f"reps must be >= 2, got {self.reps}")

    def k_grid_for(self, n: int) -> tuple:
        if self.k_grid is None:
            return tuple(k for k in DEFAULT_K_GRID if k <= n - 2)
        bad = [k for k in self.k_grid if k > n - 2]
        if bad:
            raise ValueError(
                f"k_grid entries {bad} exceed n-2={n - 2} for arm size {n}"
            )
        return tuple(self.k_grid)


@dataclass(frozen=True)
class SigmaSeriesRow:
    """Mean relative bias of one (alpha, n, k) cell; k=None is the raw plug-in."""

    alpha: float
    n: int
    k: int | None
    rel_bias_pct: float
    mc_se: float


def series_sums_from_ratios(ratios: np.ndarray, n1: int, n2: int, k_max: int) -> np.ndarray:
    """Truncated series sums for a vector of SD ratios, all orders at once.

    Returns an array of shape (len(ratios), k_max + 1) whose column k holds
    the series truncated at order k.  Terms are evaluated in log space and
    accumulated in increasing order, matching the scalar estimator bit for
    bit.
    """
    log_r = np.log(np.asarray(ratios, dtype=float))
    log_weights = log_f_moments(n1 - 1, n2 - 1, k_max)
    terms = np.exp(np.outer(log_r, np.arange(k_max + 1)) - log_weights)
    return np.cumsum(terms, axis=1)


def run_sigma_series(design: SigmaSeriesDesign) -> list[SigmaSeriesRow]:
    """Relative bias of the truncated series across the (alpha, n, k) grid.

    For each cell, draws ``reps`` SD ratios r = sqrt(alpha^2 * F(n-1, n-1)),
    forms the truncated series at every k in the grid plus the raw plug-in
    1/(1 - r), and reports mean relative bias against the exact scaling
    factor 1/(1 - alpha), in percent, with Monte Carlo standard errors.
    """
    rows = []
    for alpha in design.alphas:
        for n in design.ns:
            ks = design.k_grid_for(n)
            rng = derive_rng(design.seed, "sigma-series", alpha, n)
            fdraws = sample_f_ratio(n - 1, n - 1, rng, size=design.reps)
            ratios = np.sqrt(alpha * alpha * fdraws)
            sums = series_sums_from_ratios(ratios, n, n, max(ks))
            target = 1.0 / (1.0 - alpha)
            for k in ks:
                rel = 100.0 * (sums[:, k] - target) / target
                rows.append(SigmaSeriesRow(alpha, n, k, _mean(rel), _mc_se(rel)))
            plug = 100.0 * (1.0 / (1.0 - ratios) - target) / target
            rows.append(SigmaSeriesRow(alpha, n, None, _mean(plug), _mc_se(plug)))
    return rows


def _mean(values) -> float:
    return float(np.mean(np.asarray(values, dtype=float)))


def _mc_se(values) -> float:
    arr = np.asarray(values, dtype=float)
    if len(arr) < 2:
        return float("nan")
    return float(np.std(arr, ddof=1) / math.sqrt(len(arr)))


def _prop_se(flags) -> float:
    arr = np.asarray(flags, dtype=float)
    p = float(arr.mean())
    return math.sqrt(p * (1.0 - p) / len(arr))


# ---------------------------------------------------------------------------
# Series two: bias, coverage and width across the changepoint grid
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ChangepointCell:
    """One design cell: arm size, mean difference, control SD, SD ratio."""

    n: int
    delta: float
    sigma_c: float
    alpha: float
    mu_c: float = 1.0

    def __post_init__(self):
        if self.n < 3:
            raise ValueError(f"n must be >= 3, got {self.n}")
        if self.sigma_c <= 0:
            raise ValueError(f"sigma_c must be positive, got {self.sigma_c}")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie strictly in (0, 1), got {self.alpha}")

    @property
    def mu_t(self) -> float:
        return self.mu_c + self.delta

    @property
    def sigma_t(self) -> float:
        return self.alpha * self.sigma_c


@dataclass(frozen=True)
class ChangepointDesign:
    """Full factorial grid over (n, delta, sigma_c, alpha) with shared mu_c."""

    ns: tuple = (20, 50, 100, 250, 500, 1000)
    deltas: tuple = (-2.0, -1.0, 1.0, 2.0)
    sigma_cs: tuple = (0.2, 0.5, 1.0, 1.5, 2.0)
    alphas: tuple = (0.3, 0.5, 0.7, 0.9)
    mu_c: float = 1.0
    m: int = 1000
    b: int = 2000
    seed: int = 0

    def __post_init__(self):
        if any(d == 0.0 for d in self.deltas):
            raise ValueError("deltas must be nonzero (zero makes relative metrics undefined)")
        if self.m < 2:
            raise ValueError(f"m must be >= 2, got {self.m}")
        if self.b < 2:
            raise ValueError(f"b must be >= 2, got {self.b}")

    def cells(self) -> list[ChangepointCell]:
        return [
            ChangepointCell(n=n, delta=d, sigma_c=s, alpha=a, mu_c=self.mu_c)
            for n, d, s, a in itertools.product(
                self.ns, self.deltas, self.sigma_cs, self.alphas
            )
        ]


@dataclass(frozen=True)
class CellMetrics:
    """Per-cell simulation metrics with Monte Carlo standard errors.

    Widths are signed: a percentile falling on the far side of the true
    value makes the corresponding width negative.
    """

    cell: ChangepointCell
    k: int
    n_reps: int
    n_failed: int
    rel_bias_pct: float
    rel_bias_pct_se: float
    sigma_rel_bias_pct: float
    sigma_rel_bias_pct_se: float
    boot_median_rel_bias_pct: float
    boot_median_rel_bias_pct_se: float
    coverage95: float
    coverage95_se: float
    coverage90: float
    coverage90_se: float
    w_left_95: float
    w_left_95_se: float
    w_right_95: float
    w_right_95_se: float
    w_left_90: float
    w_left_90_se: float
    w_right_90: float
    w_right_90_se: float


def relative_widths(a_true: float, q_lo: float, q_hi: float) -> tuple[float, float]:
    """Signed distances from the interval endpoints to the true value.

    Left width 100*(a_true - q_lo)/|a_true| and right width
    100*(q_hi - a_true)/|a_true|; their sum is the interval width relative
    to |a_true| and their difference measures the skewness of the replicate
    distribution.
    """
    if a_true == 0.0:
        raise UndefinedRelativeWidthError("relative widths are undefined at a_true = 0")
    scale = abs(a_true)
    return 100.0 * (a_true - q_lo) / scale, 100.0 * (q_hi - a_true) / scale


def _rep_rng_key(cell: ChangepointCell, rep: int) -> tuple:
    return ("cell", cell.n, cell.delta, cell.sigma_c, cell.alpha, cell.mu_c, "rep", rep)


def draw_cell_summaries(cell: ChangepointCell, rep: int, seed: int):
    """Treatment and control summaries for one repetition of a cell.

    Draw order within the repetition's stream is fixed: treatment mean,
    treatment variance, control mean, control variance.
    """
    rng = derive_rng(seed, *_rep_rng_key(cell, rep))
    t = GroupSummary(
        sample_normal_mean(cell.mu_t, cell.sigma_t, cell.n, rng),
        sample_variance(cell.sigma_t ** 2, cell.n, rng),
        cell.n,
    )
    c = GroupSummary(
        sample_normal_mean(cell.mu_c, cell.sigma_c, cell.n, rng),
        sample_variance(cell.sigma_c ** 2, cell.n, rng),
        cell.n,
    )
    return t, c


def run_changepoint_cell(cell: ChangepointCell, m: int, b: int, seed: int) -> CellMetrics:
    """All metrics for one design cell from m repetitions with b replicates each.

    Repetitions that fail on an exact SD tie are dropped and counted; the
    true changepoint is computed from the cell parameters.  Coverage counts
    interval endpoints as inside.
    """
    a_true = true_changepoint(
        GroupParams(cell.mu_t, cell.sigma_t), GroupParams(cell.mu_c, cell.sigma_c)
    )
    sigma_true = 1.0 / (1.0 - cell.alpha)
    k = default_k(cell.n)
    rel_bias, sigma_bias, med_bias = [], [], []
    cov95, cov90 = [], []
    wl95, wr95, wl90, wr90 = [], [], [], []
    n_failed = 0
    for rep in range(m):
        t, c = draw_cell_summaries(cell, rep, seed)
        boot_seed = derive_seed(seed, *_rep_rng_key(cell, rep), "bootstrap")
        try:
            est = corrected_estimate(t, c, k)
            boot = bootstrap_ci(t, c, BootstrapConfig(b=b, seed=boot_seed, k=k))
        except DegenerateRatioError:
            n_failed += 1
            continue
        rel_bias.append(100.0 * (est.estimate - a_true) / a_true)
        sigma_bias.append(100.0 * (est.series_sum - sigma_true) / sigma_true)
        med_bias.append(100.0 * (boot.median - a_true) / a_true)
        cov95.append(boot.ci95[0] <= a_true <= boot.ci95[1])
        cov90.append(boot.ci90[0] <= a_true <= boot.ci90[1])
        left95, right95 = relative_widths(a_true, *boot.ci95)
        left90, right90 = relative_widths(a_true, *boot.ci90)
        wl95.append(left95)
        wr95.append(right95)
        wl90.append(left90)
        wr90.append(right90)
    n_reps = m - n_failed
    if n_reps == 0:
        raise RuntimeError(f"every repetition failed in cell {cell}")
    return CellMetrics(
        cell=cell,
        k=k,
        n_reps=n_reps,
        n_failed=n_failed,
        rel_bias_pct=_mean(rel_bias),
        rel_bias_pct_se=_mc_se(rel_bias),
        sigma_rel_bias_pct=_mean(sigma_bias),
        sigma_rel_bias_pct_se=_mc_se(sigma_bias),
        boot_median_rel_bias_pct=_mean(med_bias),
        boot_median_rel_bias_pct_se=_mc_se(med_bias),
        coverage95=_mean(cov95),
        coverage95_se=_prop_se(cov95),
        coverage90=_mean(cov90),
        coverage90_se=_prop_se(cov90),
        w_left_95=_mean(wl95),
        w_left_95_se=_mc_se(wl95),
        w_right_95=_mean(wr95),
        w_right_95_se=_mc_se(wr95),
        w_left_90=_mean(wl90),
        w_left_90_se=_mc_se(wl90),
        w_right_90=_mean(wr90),
        w_right_90_se=_mc_se(wr90),
    )


def _run_cell_task(args) -> CellMetrics:
    cell, m, b, seed = args
    return run_changepoint_cell(cell, m, b, seed)


def run_full_grid(design: ChangepointDesign, parallelism: int = 1) -> list[CellMetrics]:
    """Metrics for every cell of the design grid, in grid order.

    Cells are independent work units; with parallelism > 1 they are fanned
    out to worker processes.  Output is identical for any parallelism level
    because every stream is derived from (seed, cell, repetition) alone.
    """
    if parallelism < 1:
        raise ValueError(f"parallelism must be >= 1, got {parallelism}")
    tasks = [(cell, design.m, design.b, design.seed) for cell in design.cells()]
    if parallelism == 1:
        return [_run_cell_task(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=parallelism) as pool:
        return list(pool.map(_run_cell_task, tasks))
