"""Crossing point of the stochastic ordering between two location-scale groups.

Two distributions from a common continuous location-scale family either order
stochastically everywhere (equal scales) or swap their ordering exactly once,
at the outcome value where their z-scores coincide:

    A = mu2 + (mu1 - mu2) / (1 - sigma1/sigma2)

The group with the larger scale is stochastically larger above A, the group
with the smaller scale below it.

Estimation from summary statistics replaces the scale ratio with the sample
SD ratio.  The naive plug-in estimate has no finite expectation, so the
series estimator expands 1/(1 - ratio) as a truncated geometric series and
bias-corrects each power of the sample SD ratio with the matching fractional
moment of the F distribution.  Arms are always relabeled so the one with the
smaller sample SD takes subscript 1; the value is invariant under swapping
the inputs, and the relabeling is recorded in the result.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .distributions import log_f_moments

__all__ = [
    "Arm",
    "DegenerateRatioError",
    "DominanceKind",
    "DominanceResult",
    "GroupParams",
    "GroupSummary",
    "InsufficientDataError",
    "NoChangepointError",
    "SeriesEstimate",
    "TruncationBoundError",
    "classify_dominance",
    "corrected_estimate",
    "default_k",
    "plug_in_estimate",
    "sigma_series",
    "true_changepoint",
]

MAX_SERIES_ORDER = 500


class NoChangepointError(ValueError):
    """Equal scales: the ordering holds everywhere and never reverses."""


class DegenerateRatioError(ValueError):
    """Equal sample SDs: the SD-ratio estimators are undefined."""


class TruncationBoundError(ValueError):
    """Series truncation order exceeds the largest finite-moment order."""


class InsufficientDataError(ValueError):
    """Arm too small to support any series truncation order."""


class Arm(enum.IntEnum):
    GROUP1 = 1
    GROUP2 = 2

    @property
    def other(self) -> "Arm":
        return Arm.GROUP2 if self is Arm.GROUP1 else Arm.GROUP1


class DominanceKind(enum.Enum):
    FULL_DOMINANCE = "full_dominance"
    CROSSING_AT = "crossing_at"


@dataclass(frozen=True)
class GroupParams:
    """True location and scale of one arm, in outcome units."""

    mu: float
    sigma: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma!r}")


@dataclass(frozen=True)
class GroupSummary:
    """Observed summary statistics of one arm: mean, variance, size."""

    mean: float
    variance: float
    n: int

    def __post_init__(self):
        if not self.variance > 0:
            raise ValueError(f"variance must be positive, got {self.variance!r}")
        if self.n < 2:
            raise ValueError(f"n must be >= 2, got {self.n!r}")

    @property
    def sd(self) -> float:
        return math.sqrt(self.variance)


@dataclass(frozen=True)
class DominanceResult:
    """Outcome of comparing two location-scale distributions.

    ``kind`` is FULL_DOMINANCE exactly when the scales are equal (then
    ``dominated`` names the stochastically smaller arm, or is None for
    identical distributions).  Otherwise the ordering crosses at
    ``changepoint`` and ``larger_above`` names the arm that is
    stochastically larger on {A >= changepoint}: always the arm with the
    larger scale.
    """

    kind: DominanceKind
    changepoint: float | None = None
    larger_above: Arm | None = None
    dominated: Arm | None = None
    identical: bool = False

    def describe(self) -> str:
        if self.kind is DominanceKind.FULL_DOMINANCE:
            if self.identical:
                return "the two distributions are identical"
            return (
                f"arm {self.dominated.other.value} is stochastically larger "
                "at every threshold"
            )
        return (
            f"arm {self.larger_above.value} is stochastically larger on "
            f"{{A >= {self.changepoint!r}}}, arm {self.larger_above.other.value} below"
        )


@dataclass(frozen=True)
class SeriesEstimate:
    """Series estimate of the crossing point with its diagnostics.

    ``sd_ratio`` is the smaller-over-larger sample SD ratio used in the
    series, ``series_sum`` the bias-corrected truncated sum, ``estimate``
    the crossing-point estimate in outcome units, and ``larger_sd_arm``
    records which input arm played the subscript-2 (larger sample SD) role.
    """

    sd_ratio: float
    series_sum: float
    estimate: float
    k: int
    larger_sd_arm: Arm


# ---------------------------------------------------------------------------
# Population-level results
# ---------------------------------------------------------------------------

def true_changepoint(g1: GroupParams, g2: GroupParams) -> float:
    """The unique A where both groups have the same z-score.

    Raises NoChangepointError when the scales are equal.
    """
    if g1.sigma == g2.sigma:
        raise NoChangepointError("equal scales: the ordering never reverses")
    return g2.mu + (g1.mu - g2.mu) / (1.0 - g1.sigma / g2.sigma)


def classify_dominance(g1: GroupParams, g2: GroupParams) -> DominanceResult:
    """Classify the stochastic ordering of two location-scale distributions."""
    if g1.sigma == g2.sigma:
        if g1.mu == g2.mu:
            return DominanceResult(kind=DominanceKind.FULL_DOMINANCE, identical=True)
        dominated = Arm.GROUP1 if g1.mu < g2.mu else Arm.GROUP2
        return DominanceResult(kind=DominanceKind.FULL_DOMINANCE, dominated=dominated)
    larger_above = Arm.GROUP1 if g1.sigma > g2.sigma else Arm.GROUP2
    return DominanceResult(
        kind=DominanceKind.CROSSING_AT,
        changepoint=true_changepoint(g1, g2),
        larger_above=larger_above,
    )


# ---------------------------------------------------------------------------
# Sample-level estimators
# ---------------------------------------------------------------------------

def _oriented(t1: GroupSummary, t2: GroupSummary):
    """Relabel arms so the one with the smaller sample SD comes first.

    Returns (small, large, larger_sd_arm) where larger_sd_arm identifies the
    original input arm that took the subscript-2 role.  An exact tie of the
    sample SDs is a hard error: it has probability zero for continuous data
    and no meaningful estimate exists there.
    """
    if t1.variance == t2.variance:
        raise DegenerateRatioError(
            "sample SDs are equal; the SD-ratio estimators are undefined"
        )
    if t1.variance < t2.variance:
        return t1, t2, Arm.GROUP2
    return t2, t1, Arm.GROUP1


def plug_in_estimate(t1: GroupSummary, t2: GroupSummary) -> float:
    """Naive crossing-point estimate from the sample means and SDs.

    Direct substitution into the changepoint formula.  Unbiasedness fails
    badly (the estimator has no finite expectation); prefer
    :func:`corrected_estimate` for anything quantitative.
    """
    small, large, _ = _oriented(t1, t2)
    return large.mean + (small.mean - large.mean) / (1.0 - small.sd / large.sd)


def default_k(n2: int) -> int:
    """Default series truncation for an arm of size n2: min(n2 - 2, 500)."""
    if n2 < 3:
        raise InsufficientDataError(f"need n >= 3 for a nonempty series, got {n2}")
    return min(n2 - 2, MAX_SERIES_ORDER)


def _series_sum(log_ratio: float, n1: int, n2: int, k: int) -> float:
    if k < 0:
        raise ValueError(f"k must be >= 0, got {k}")
    if k > n2 - 2:
        raise TruncationBoundError(
            f"k={k} exceeds n2-2={n2 - 2}; moment corrections beyond that order "
            "do not exist"
        )
    log_weights = log_f_moments(n1 - 1, n2 - 1, k)
    terms = np.exp(np.arange(k + 1) * log_ratio - log_weights)
    # ascending-order accumulation, plain summation
    return float(terms.cumsum()[-1])


def sigma_series(t1: GroupSummary, t2: GroupSummary, k: int) -> float:
    """Bias-corrected truncated series estimate of 1 / (1 - scale ratio).

    Sums (s1/s2)^j divided by the (j/2)-th moment of F(n1-1, n2-1) for
    j = 0..k, with arms relabeled so s1 < s2.  Each term is evaluated in log
    space and the terms are accumulated in increasing j.
    """
    small, large, _ = _oriented(t1, t2)
    return _series_sum(math.log(small.sd / large.sd), small.n, large.n, k)


def corrected_estimate(t1: GroupSummary, t2: GroupSummary, k: int | None = None) -> SeriesEstimate:
    """Series estimate of the crossing point from two arm summaries.

    With ``k`` omitted the truncation defaults to ``default_k`` of the
    larger-sample-SD arm.  The result is invariant under swapping the two
    inputs; the orientation actually used is recorded in the result.
    """
    small, large, larger_sd_arm = _oriented(t1, t2)
    if k is None:
        k = default_k(large.n)
    series = _series_sum(math.log(small.sd / large.sd), small.n, large.n, k)
    estimate = large.mean + (small.mean - large.mean) * series
    return SeriesEstimate(
        sd_ratio=small.sd / large.sd,
        series_sum=series,
        estimate=estimate,
        k=k,
        larger_sd_arm=larger_sd_arm,
    )
