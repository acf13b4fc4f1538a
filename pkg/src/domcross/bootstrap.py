"""Parametric bootstrap confidence intervals for the crossing point.

Each replicate redraws both arms' summary statistics from their fitted
sampling distributions (normal for the mean, scaled chi-square for the
variance), treating the observed summaries as the truth, then recomputes the
series estimate.  Percentile intervals are read off the replicate
distribution; no bias correction or acceleration is applied.

Replicate b draws from its own stream derived from (seed, b), so the result
is a pure function of the inputs no matter how replicates are scheduled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .changepoint import (
    DegenerateRatioError,
    GroupSummary,
    corrected_estimate,
    default_k,
    _oriented,
)
from .distributions import derive_rng, sample_normal_mean, sample_variance

__all__ = [
    "AllReplicatesDegenerateError",
    "BootstrapConfig",
    "BootstrapResult",
    "DEFAULT_PROBS",
    "bootstrap_ci",
    "bootstrap_replicate",
    "empirical_quantile",
]

DEFAULT_PROBS = (0.025, 0.05, 0.5, 0.95, 0.975)


class AllReplicatesDegenerateError(RuntimeError):
    """Every bootstrap replicate was degenerate; no interval can be formed."""


@dataclass(frozen=True)
class BootstrapConfig:
    """Bootstrap settings: replicate count, root seed, truncation, quantiles."""

    b: int
    seed: int
    k: int | None = None
    probs: tuple = DEFAULT_PROBS

    def __post_init__(self):
        if self.b < 2:
            raise ValueError(f"b must be >= 2, got {self.b}")
        if not self.probs:
            raise ValueError("probs must be nonempty")
        if not all(0.0 < p < 1.0 for p in self.probs):
            raise ValueError(f"probs must lie strictly in (0, 1), got {self.probs}")
        if any(b <= a for a, b in zip(self.probs, self.probs[1:])):
            raise ValueError(f"probs must be strictly increasing, got {self.probs}")


@dataclass(frozen=True)
class BootstrapResult:
    """Replicate quantiles, median, and the two percentile intervals."""

    quantiles: dict
    median: float
    ci95: tuple
    ci90: tuple
    n_degenerate: int


def empirical_quantile(sorted_values, p: float) -> float:
    """Linear interpolation of order statistics at index (N-1)*p.

    The input must be sorted ascending and nonempty.  This is the common
    interpolating sample-quantile rule; it is fixed here so results are
    bit-reproducible.
    """
    n = len(sorted_values)
    if n == 0:
        raise ValueError("cannot take a quantile of an empty sample")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p!r}")
    h = (n - 1) * p
    lo = math.floor(h)
    if lo + 1 >= n:
        return float(sorted_values[-1])
    frac = h - lo
    return float(sorted_values[lo] + frac * (sorted_values[lo + 1] - sorted_values[lo]))


def _starred(t: GroupSummary, rng: np.random.Generator) -> GroupSummary:
    # Draw order is fixed: mean first, then variance.
    mean = sample_normal_mean(t.mean, t.sd, t.n, rng)
    variance = sample_variance(t.variance, t.n, rng)
    if variance <= 0.0:
        # float underflow of the gamma draw; probability ~0, treated as degenerate
        raise DegenerateRatioError("bootstrap variance draw underflowed to zero")
    return GroupSummary(mean, variance, t.n)


def bootstrap_replicate(t1: GroupSummary, t2: GroupSummary, k: int, rng) -> float:
    """One bootstrap replicate of the series estimate.

    Redraws arm 1 then arm 2 (mean before variance within each arm) and
    returns the series estimate of the starred pair.  If the starred SDs
    order opposite to the originals on arms of unequal size, the truncation
    is capped at the largest order the new orientation supports.
    """
    s1 = _starred(t1, rng)
    s2 = _starred(t2, rng)
    _, large, _ = _oriented(s1, s2)
    return corrected_estimate(s1, s2, min(k, large.n - 2)).estimate


def bootstrap_ci(t1: GroupSummary, t2: GroupSummary, cfg: BootstrapConfig) -> BootstrapResult:
    """Percentile bootstrap intervals for the crossing point.

    Runs ``cfg.b`` replicates, each on the stream derived from
    ``(cfg.seed, b)``, and reads off sample quantiles.  Degenerate replicates
    (exactly tied starred SDs) are dropped and counted.
    """
    _, large, _ = _oriented(t1, t2)
    k = cfg.k if cfg.k is not None else default_k(large.n)
    values = []
    n_degenerate = 0
    for b in range(cfg.b):
        rng = derive_rng(cfg.seed, "replicate", b)
        try:
            values.append(bootstrap_replicate(t1, t2, k, rng))
        except DegenerateRatioError:
            n_degenerate += 1
    if not values:
        raise AllReplicatesDegenerateError(
            f"all {cfg.b} bootstrap replicates were degenerate"
        )
    values.sort()
    quantiles = {p: empirical_quantile(values, p) for p in cfg.probs}
    return BootstrapResult(
        quantiles=quantiles,
        median=empirical_quantile(values, 0.5),
        ci95=(empirical_quantile(values, 0.025), empirical_quantile(values, 0.975)),
        ci90=(empirical_quantile(values, 0.05), empirical_quantile(values, 0.95)),
        n_degenerate=n_degenerate,
    )
