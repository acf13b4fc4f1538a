"""Estimation of the crossing point of stochastic dominance between two groups.

Two continuous location-scale distributions with unequal scales swap their
stochastic ordering at exactly one outcome value.  This package locates that
value from population parameters, estimates it from two-arm summary
statistics with a moment-corrected series estimator, attaches parametric
bootstrap confidence intervals, and ships a simulation harness plus a CLI
for bias/coverage/width studies and their figures.
"""

from .bootstrap import (
    AllReplicatesDegenerateError,
    BootstrapConfig,
    BootstrapResult,
    bootstrap_ci,
    bootstrap_replicate,
    empirical_quantile,
)
from .changepoint import (
    Arm,
    DegenerateRatioError,
    DominanceKind,
    DominanceResult,
    GroupParams,
    GroupSummary,
    InsufficientDataError,
    NoChangepointError,
    SeriesEstimate,
    TruncationBoundError,
    classify_dominance,
    corrected_estimate,
    default_k,
    plug_in_estimate,
    sigma_series,
    true_changepoint,
)
from .distributions import (
    MomentExistenceError,
    derive_rng,
    derive_seed,
    f_cdf,
    f_moment_half,
    f_quantile,
    sample_f_ratio,
    sample_normal_mean,
    sample_variance,
)

__version__ = "0.1.0"

__all__ = [
    "AllReplicatesDegenerateError",
    "Arm",
    "BootstrapConfig",
    "BootstrapResult",
    "DegenerateRatioError",
    "DominanceKind",
    "DominanceResult",
    "GroupParams",
    "GroupSummary",
    "InsufficientDataError",
    "MomentExistenceError",
    "NoChangepointError",
    "SeriesEstimate",
    "TruncationBoundError",
    "bootstrap_ci",
    "bootstrap_replicate",
    "classify_dominance",
    "corrected_estimate",
    "default_k",
    "derive_rng",
    "derive_seed",
    "empirical_quantile",
    "f_cdf",
    "f_moment_half",
    "f_quantile",
    "plug_in_estimate",
    "sample_f_ratio",
    "sample_normal_mean",
    "sample_variance",
    "sigma_series",
    "true_changepoint",
]
