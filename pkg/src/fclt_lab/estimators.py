"""Sample quantile and r-th absolute centred sample moment.

The quantile of order p is the ceil(n p)-th order statistic, obtained by
partial selection. The moment estimator is (1/n) sum |X_i - mean|^r with
compensated (exact) summation, so summation error is below 1e-12 relative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError

__all__ = [
    "EstimatePair",
    "sample_quantile",
    "centred_abs_moment",
    "known_mean_abs_moment",
    "empirical_cdf",
    "estimator_vector",
    "partial_sum_process",
]


@dataclass(frozen=True)
class EstimatePair:
    """Joint estimate (sample quantile, r-th absolute centred sample moment)."""

    q_hat: float
    m_hat: float
    n: int
    p: float
    r: int


def _values(path_or_values) -> np.ndarray:
    values = getattr(path_or_values, "values", path_or_values)
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 1:
        raise ParameterError(f"expected a 1-d sample, got shape {values.shape}")
    if values.shape[0] < 1:
        raise ParameterError("sample must be non-empty")
    return values


def _check_p(p: float):
    if not 0.0 < p < 1.0:
        raise ParameterError(f"quantile level p must lie in (0, 1), got {p}")


def _check_r(r: int):
    if not (isinstance(r, (int, np.integer)) and r >= 1):
        raise ParameterError(f"moment order r must be a positive integer, got {r}")


def sample_quantile(path_or_values, p: float) -> float:
    """The ceil(n p)-th order statistic, via expected-linear-time selection."""
    x = _values(path_or_values)
    _check_p(p)
    k = math.ceil(x.shape[0] * p)
    k = min(max(k, 1), x.shape[0])
    return float(np.partition(x, k - 1)[k - 1])


def sample_mean(path_or_values) -> float:
    # two-pass corrected mean: exact summation plus one refinement step, so a
    # constant sample returns its value exactly
    x = _values(path_or_values)
    n = x.shape[0]
    m = math.fsum(x) / n
    return m + math.fsum(x - m) / n


def known_mean_abs_moment(path_or_values, r: int, mu: float) -> float:
    """(1/n) sum |X_i - mu|^r with exact summation."""
    x = _values(path_or_values)
    _check_r(r)
    dev = np.abs(x - mu)
    return math.fsum(dev if r == 1 else dev**r) / x.shape[0]


def centred_abs_moment(path_or_values, r: int) -> float:
    """(1/n) sum |X_i - mean|^r with the sample mean."""
    x = _values(path_or_values)
    _check_r(r)
    return known_mean_abs_moment(x, r, sample_mean(x))


def empirical_cdf(path_or_values, x: float) -> float:
    """F_n(x) = (1/n) #{i : X_i <= x}."""
    values = _values(path_or_values)
    return float(np.count_nonzero(values <= x)) / values.shape[0]


def estimator_vector(path_or_values, p: float, r: int) -> EstimatePair:
    """The raw pair (q_n(p), m_hat(n, r)); centering by truth is the caller's."""
    x = _values(path_or_values)
    _check_p(p)
    _check_r(r)
    return EstimatePair(
        q_hat=sample_quantile(x, p),
        m_hat=centred_abs_moment(x, r),
        n=int(x.shape[0]),
        p=float(p),
        r=int(r),
    )


def partial_sum_process(path_or_values, p: float, r: int, t_grid) -> list[EstimatePair]:
    """Estimator pairs on the prefixes of length floor(n t), one per grid point.

    The grid must be strictly increasing inside (0, 1] with n*t >= 1; the
    sqrt(n)*t scaling of the partial-sum limit is applied by the caller.
    """
    x = _values(path_or_values)
    _check_p(p)
    _check_r(r)
    grid = [float(t) for t in t_grid]
    if not grid:
        raise ParameterError("t_grid must be non-empty")
    if any(not 0.0 < t <= 1.0 for t in grid):
        raise ParameterError("t_grid values must lie in (0, 1]")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ParameterError("t_grid must be strictly increasing")
    n = x.shape[0]
    out = []
    for t in grid:
        m = int(math.floor(n * t))
        if m < 1:
            raise ParameterError(f"prefix for t={t} is empty (n={n})")
        out.append(estimator_vector(x[:m], p, r))
    return out
