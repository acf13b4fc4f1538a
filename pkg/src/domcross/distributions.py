"""Special functions and random samplers behind the crossing-point estimator.

Fractional moments of the F distribution are evaluated in log space (sums of
log-gamma terms) so that degrees of freedom up to ~1000 and moment orders up
to ~500 stay inside double range.  The F CDF is computed from the regularized
incomplete beta function (continued fraction) and the quantile by bisection;
both are exact enough for verification work and are not tuned for speed.

All samplers take an explicit ``numpy.random.Generator``.  Streams for
simulation work are derived from a root seed plus a structured key (see
:func:`derive_rng`), so results never depend on thread scheduling or on the
order in which work units run.
"""

from __future__ import annotations

import hashlib
import math
from functools import lru_cache

import numpy as np

__all__ = [
    "MomentExistenceError",
    "derive_rng",
    "derive_seed",
    "f_cdf",
    "f_moment_half",
    "f_quantile",
    "log_f_moment_half",
    "log_f_moments",
    "sample_f_ratio",
    "sample_normal_mean",
    "sample_variance",
]


class MomentExistenceError(ValueError):
    """Requested fractional F moment is infinite (order >= denominator df)."""


# ---------------------------------------------------------------------------
# Fractional moments of the F distribution
# ---------------------------------------------------------------------------

def _check_moment_args(order: int, df1: int, df2: int) -> None:
    if order < 0 or order != int(order):
        raise ValueError(f"moment order must be a nonnegative integer, got {order!r}")
    if df1 < 1 or df2 < 1:
        raise ValueError(f"degrees of freedom must be >= 1, got ({df1}, {df2})")
    if order >= df2:
        raise MomentExistenceError(
            f"moment of order {order}/2 does not exist for F({df1}, {df2}); "
            f"requires order < {df2}"
        )


def log_f_moment_half(order: int, df1: int, df2: int) -> float:
    """Natural log of the (order/2)-th raw moment of F(df1, df2).

    E[F^(order/2)] = (df2/df1)^(order/2)
                     * G((df1+order)/2) G((df2-order)/2) / (G(df1/2) G(df2/2))
    with G the gamma function, finite only for order < df2.
    """
    _check_moment_args(order, df1, df2)
    return (
        0.5 * order * math.log(df2 / df1)
        + math.lgamma(0.5 * (df1 + order))
        + math.lgamma(0.5 * (df2 - order))
        - math.lgamma(0.5 * df1)
        - math.lgamma(0.5 * df2)
    )


def f_moment_half(order: int, df1: int, df2: int) -> float:
    """The (order/2)-th raw moment of the F(df1, df2) distribution."""
    return math.exp(log_f_moment_half(order, df1, df2))


@lru_cache(maxsize=None)
def log_f_moments(df1: int, df2: int, max_order: int) -> np.ndarray:
    """Log moments ``log E[F^(j/2)]`` for j = 0..max_order, as one array.

    Cached because the series estimator and the bootstrap evaluate the same
    weight vector many thousands of times.  The returned array is read-only.
    """
    _check_moment_args(max_order, df1, df2)
    out = np.array([log_f_moment_half(j, df1, df2) for j in range(max_order + 1)])
    out.flags.writeable = False
    return out


# ---------------------------------------------------------------------------
# Samplers for summary statistics under normal data
# ---------------------------------------------------------------------------

def sample_normal_mean(mu, sigma, n, rng, size=None):
    """Draw a sample mean: N(mu, sigma^2 / n).

    With ``size=None`` returns a single float; otherwise an array of draws.
    """
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma!r}")
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n!r}")
    return rng.normal(mu, sigma / math.sqrt(n), size=size)


def sample_variance(sigma2, n, rng, size=None):
    """Draw a sample variance: sigma2 * chi2_{n-1} / (n-1).

    Implemented as a gamma draw with shape (n-1)/2 and scale 2*sigma2/(n-1),
    which is O(1) per draw regardless of n.
    """
    if sigma2 <= 0:
        raise ValueError(f"sigma2 must be positive, got {sigma2!r}")
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n!r}")
    return rng.gamma(0.5 * (n - 1), 2.0 * sigma2 / (n - 1), size=size)


def sample_f_ratio(df1, df2, rng, size=None):
    """Draw from F(df1, df2) as a ratio of independent mean-one chi-squares."""
    if df1 < 1 or df2 < 1:
        raise ValueError(f"degrees of freedom must be >= 1, got ({df1}, {df2})")
    num = rng.gamma(0.5 * df1, 2.0 / df1, size=size)
    den = rng.gamma(0.5 * df2, 2.0 / df2, size=size)
    return num / den


# ---------------------------------------------------------------------------
# F CDF and quantile (verification-grade, not performance-critical)
# ---------------------------------------------------------------------------

_CF_MAX_ITER = 300
_CF_EPS = 3e-16
_CF_TINY = 1e-300


def _beta_cont_frac(a: float, b: float, x: float) -> float:
    # Lentz's algorithm for the incomplete beta continued fraction.
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _CF_TINY:
        d = _CF_TINY
    d = 1.0 / d
    h = d
    for m in range(1, _CF_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = 1.0 + aa / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = 1.0 + aa / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_EPS:
            return h
    raise RuntimeError("incomplete beta continued fraction failed to converge")


def _reg_incomplete_beta(a: float, b: float, x: float) -> float:
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    log_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
        + a * math.log(x) + b * math.log1p(-x)
    )
    front = math.exp(log_front)
    # Use the faster-converging side of the symmetry I_x(a,b) = 1 - I_{1-x}(b,a).
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_cont_frac(a, b, x) / a
    return 1.0 - front * _beta_cont_frac(b, a, 1.0 - x) / b


def f_cdf(x: float, df1: int, df2: int) -> float:
    """CDF of the F(df1, df2) distribution."""
    if df1 < 1 or df2 < 1:
        raise ValueError(f"degrees of freedom must be >= 1, got ({df1}, {df2})")
    if x <= 0.0:
        return 0.0
    return _reg_incomplete_beta(0.5 * df1, 0.5 * df2, df1 * x / (df1 * x + df2))


def f_quantile(p: float, df1: int, df2: int) -> float:
    """Quantile of F(df1, df2), accurate to ~1e-8 absolute in CDF space."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie strictly in (0, 1), got {p!r}")
    lo, hi = 0.0, 1.0
    while f_cdf(hi, df1, df2) < p:
        hi *= 2.0
        if hi > 1e12:
            raise RuntimeError("failed to bracket the F quantile")
    for _ in range(120):
        mid = 0.5 * (lo + hi)
        if f_cdf(mid, df1, df2) < p:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-12 * max(1.0, hi):
            break
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# Deterministic stream derivation
# ---------------------------------------------------------------------------

def _spawn_key(key_parts) -> tuple:
    # 128-bit spawn key: four 32-bit words from the SHA-256 of the key.
    encoded = "/".join(repr(p) for p in key_parts).encode()
    digest = hashlib.sha256(encoded).digest()
    return tuple(int.from_bytes(digest[i:i + 4], "big") for i in range(0, 16, 4))


def derive_rng(seed: int, *key) -> np.random.Generator:
    """Independent generator for the stream named by ``key`` under ``seed``.

    Key parts (ints, floats, strings) are repr-encoded and hashed with
    SHA-256 into a SeedSequence spawn key.  Distinct keys give independent
    streams; the mapping is stable across runs, platforms and schedulers,
    which is what makes parallel simulation output reproducible.
    """
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=_spawn_key(key)))


def derive_seed(seed: int, *key) -> int:
    """Deterministic 64-bit root seed for a nested component (e.g. one bootstrap)."""
    encoded = (repr(seed) + "//" + "/".join(repr(p) for p in key)).encode()
    return int.from_bytes(hashlib.sha256(encoded).digest()[:8], "big")
