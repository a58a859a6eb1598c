"""KS tests, exponential run-length analysis, log-log regression."""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np


def rint(x: float) -> int:
    """floor(x + 0.5)."""
    return int(math.floor(x + 0.5))


class KSResult(NamedTuple):
    d_stat: float
    p_value: float


class Regression(NamedTuple):
    slope: float
    intercept: float
    r_squared: float


def kolmogorov_q(lam: float, terms: int = 100) -> float:
    """Q(lam) = 2 sum_{k>=1} (-1)^(k-1) exp(-2 k^2 lam^2), clipped to [0, 1]."""
    if lam < 1e-3:
        return 1.0
    s = 0.0
    for k in range(1, terms + 1):
        t = 2.0 * (-1) ** (k - 1) * math.exp(-2.0 * k * k * lam * lam)
        s += t
        if abs(t) < 1e-16:
            break
    return min(1.0, max(0.0, s))


def _p_value(d: float, ne: float) -> float:
    sq = math.sqrt(ne)
    return kolmogorov_q((sq + 0.12 + 0.11 / sq) * d)


def ks_two_sample(a, b) -> KSResult:
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    if a.size == 0 or b.size == 0:
        raise ValueError("empty sample")
    grid = np.concatenate([a, b])
    fa = np.searchsorted(a, grid, side="right") / a.size
    fb = np.searchsorted(b, grid, side="right") / b.size
    d = float(np.max(np.abs(fa - fb)))
    return KSResult(d, _p_value(d, a.size * b.size / (a.size + b.size)))


def ks_one_sample(samples, cdf) -> KSResult:
    x = np.sort(np.asarray(samples, dtype=float))
    if x.size == 0:
        raise ValueError("empty sample")
    n = x.size
    f = cdf(x)
    # ECDF jumps: compare F at each point to the ECDF just before and after
    hi = np.arange(1, n + 1) / n
    lo = np.arange(0, n) / n
    d = float(max(np.max(hi - f), np.max(f - lo)))
    return KSResult(d, _p_value(d, n))


def exp_cdf(mean: float):
    return lambda x: 1.0 - np.exp(-np.asarray(x, dtype=float) / mean)


def ks_vs_exponential(samples, mean: float, method: str = "analytic", count: int = 1_000_000,
                      rng=None) -> KSResult:
    """KS test of ``samples`` against an exponential with the given mean.

    ``analytic`` compares to the CDF directly; ``synthetic`` draws ``count``
    exponential variates and runs the two-sample test.
    """
    if not mean > 0:
        raise ValueError("mean must be positive")
    if method == "analytic":
        return ks_one_sample(samples, exp_cdf(mean))
    if method == "synthetic":
        rng = np.random.default_rng(rng)
        return ks_two_sample(samples, rng.exponential(mean, size=count))
    raise ValueError(f"unknown method {method!r}")


def left_tail_deficit(samples, mean: float, quantile: float = 0.1) -> bool:
    """True when the ECDF lies below the exponential CDF over the lowest
    ``quantile`` of the samples, i.e. fewer short runs than exponential."""
    x = np.sort(np.asarray(samples, dtype=float))
    k = max(1, int(len(x) * quantile))
    ecdf = np.searchsorted(x, x[:k], side="right") / len(x)
    return bool(np.mean(ecdf - exp_cdf(mean)(x[:k])) < 0)


def loglog_regression(xs, ys) -> Regression:
    """OLS of log10(y) on log10(x)."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape or x.size < 2:
        raise ValueError("need two equal-length samples of size >= 2")
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("log-log regression needs positive values")
    return linear_regression(np.log10(x), np.log10(y))


def linear_regression(x, y) -> Regression:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    dx = x - x.mean()
    sxx = float(dx @ dx)
    if sxx == 0:
        raise ValueError("degenerate regression: all x equal")
    dy = y - y.mean()
    sxy = float(dx @ dy)
    syy = float(dy @ dy)
    slope = sxy / sxx
    r2 = 1.0 if syy == 0 else sxy * sxy / (sxx * syy)
    return Regression(slope, float(y.mean() - slope * x.mean()), r2)


def summarize_costs(samples) -> tuple[float, float]:
    """(median, mean); even counts take the mean of the central pair."""
    a = np.asarray(samples, dtype=float)
    if a.size == 0:
        raise ValueError("empty sample")
    return float(np.median(a)), float(a.mean())
