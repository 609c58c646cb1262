"""Extremal index estimators.

The central estimator counts exceedances of X_{n-k,n} that are followed by
``d - 1`` non-exceedances::

    theta_hat(d) = (1/k) * #{ i <= n-d+1 : X_i > u, max(X_{i+1}, ..., X_{i+d-1}) <= u }

It is computed from the gaps between successive exceedances: an exceedance
at position ``i`` contributes to ``theta_hat(d)`` iff the next exceedance is
at least ``d`` steps away and ``i`` leaves room for the ``d - 1`` followers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import (
    InsufficientExceedancesError,
    ParameterError,
    Series,
    as_series,
    exceedance_indices,
    order_statistic,
)


@dataclass(frozen=True)
class EstimateResult:
    """Point estimate of the extremal index plus the inputs that produced it.

    For the counting estimators ``theta_hat == count / k``. The intervals
    estimator stores the number of exceedances in ``count``; the sliding
    blocks estimator stores the block length in ``d`` and the number of
    sliding blocks in ``count``.
    """

    theta_hat: float
    k: int
    d: int
    threshold: float
    count: int
    warnings: tuple[str, ...] = ()
    estimator: str = "theta_hat"

    @property
    def clamped(self) -> float:
        """Estimate truncated to [0, 1]."""
        return min(1.0, max(0.0, self.theta_hat))

    def to_dict(self) -> dict:
        return {
            "estimator": self.estimator,
            "theta_hat": self.theta_hat,
            "theta_hat_clamped": self.clamped,
            "k": self.k,
            "d": self.d,
            "threshold": self.threshold,
            "count": self.count,
            "warnings": list(self.warnings),
        }


@dataclass(frozen=True)
class DSelectionResult:
    d_star_hat: int
    profile: np.ndarray  # delta_hat(h) = theta_hat(h) - theta_hat(h+1), h = 1..d_u
    rule_threshold: float
    d_u: int
    theta_profile: np.ndarray = field(default=None, repr=False)  # theta_hat(1..d_u+1)
    warnings: tuple[str, ...] = ()

    @property
    def failed(self) -> bool:
        return self.d_star_hat > self.d_u

    def to_dict(self) -> dict:
        return {
            "d_star_hat": self.d_star_hat,
            "d_u": self.d_u,
            "rule_threshold": self.rule_threshold,
            "profile": [float(v) for v in self.profile],
            "theta_profile": [float(v) for v in self.theta_profile],
            "warnings": list(self.warnings),
        }


def _check_d(d, upper: int, what: str = "d") -> int:
    if int(d) != d or not 1 <= d <= upper:
        raise ParameterError(f"{what} must be an integer in [1, {upper}], got {d}")
    return int(d)


def _run_counts(values: np.ndarray, u: float, ds, segment_length: int | None) -> np.ndarray:
    """Indicator sums of theta_hat for every d in ``ds``."""
    exc = np.flatnonzero(values > u)
    ds = np.asarray(ds)
    if exc.size == 0:
        return np.zeros(ds.size, dtype=np.int64)
    if segment_length is None:
        pos = exc
        span = values.size
        gap = np.diff(exc, append=np.iinfo(np.int64).max)
    else:
        seg = exc // segment_length
        pos = exc % segment_length
        span = segment_length
        gap = np.diff(exc, append=np.iinfo(np.int64).max)
        # the next exceedance in another segment does not count
        gap[:-1][seg[1:] != seg[:-1]] = np.iinfo(np.int64).max
    return np.array([np.count_nonzero((gap >= d) & (pos <= span - d)) for d in ds], dtype=np.int64)


def _estimate(s: Series, k: int, d: int, segmented: bool) -> EstimateResult:
    thr = order_statistic(s, k)
    L = s.segment_length if segmented else None
    (count,) = _run_counts(s.values, thr.value, [d], L)
    return EstimateResult(
        theta_hat=count / thr.k,
        k=thr.k,
        d=d,
        threshold=thr.value,
        count=int(count),
        warnings=thr.warnings,
        estimator="theta_hat_segmented" if segmented else "theta_hat",
    )


def theta_hat(series, k: int, d: int) -> EstimateResult:
    """Estimate theta with a known local-dependence order ``d``.

    ``d = 1`` counts every exceedance, so the estimate is 1 on tie-free data.
    Segment boundaries of ``series`` are ignored here; see
    :func:`theta_hat_segmented`.
    """
    s = as_series(series)
    d = _check_d(d, s.n - 1)
    return _estimate(s, k, d, segmented=False)


def theta_hat_segmented(series, k: int, d: int, segment_length: int | None = None) -> EstimateResult:
    """theta_hat with windows confined to independent equal-length segments.

    The threshold is the global X_{n-k,n}; only the windows are per segment.
    """
    s = as_series(series, segment_length)
    if s.segment_length is None:
        raise ParameterError("theta_hat_segmented needs a series with segment_length")
    if int(d) != d or d < 1:
        raise ParameterError(f"d must be a positive integer, got {d}")
    if d > s.segment_length:
        raise ParameterError(f"d={d} exceeds segment_length L={s.segment_length}")
    return _estimate(s, k, int(d), segmented=True)


def runs_estimator(series, k: int, r: int) -> EstimateResult:
    """Runs estimator with run length ``r`` (same statistic as ``theta_hat`` at d = r)."""
    res = theta_hat(series, k, r)
    return EstimateResult(**{**res.__dict__, "estimator": "runs"})


def theta_profile(series, k: int, d_max: int, segmented: bool | None = None) -> np.ndarray:
    """theta_hat(d) for d = 1..d_max, sharing one threshold."""
    s = as_series(series)
    if segmented is None:
        segmented = s.segment_length is not None
    thr = order_statistic(s, k)
    upper = s.segment_length if segmented else s.n - 1
    d_max = _check_d(d_max, upper, "d_max")
    counts = _run_counts(s.values, thr.value, np.arange(1, d_max + 1), s.segment_length if segmented else None)
    return counts / thr.k


def select_d_star(series, k: int, d_u: int = 10, segmented: bool | None = None) -> DSelectionResult:
    """Smallest h with max_{h <= i <= d_u} (theta_hat(i) - theta_hat(i+1)) < 1/sqrt(k).

    If no ``h <= d_u`` passes, ``d_u + 1`` is returned with a warning.
    For a series carrying ``segment_length`` the segmented estimator is used
    unless ``segmented=False``.
    """
    s = as_series(series)
    if int(d_u) != d_u or d_u < 1:
        raise ParameterError(f"d_u must be a positive integer, got {d_u}")
    d_u = int(d_u)
    thetas = theta_profile(s, k, d_u + 1, segmented)
    delta = thetas[:-1] - thetas[1:]
    rule = 1.0 / math.sqrt(k)
    # suffix maxima: tail_max[h-1] = max(delta[h-1:])
    tail_max = np.maximum.accumulate(delta[::-1])[::-1]
    below = np.flatnonzero(tail_max < rule)
    warnings = order_statistic(s, k).warnings
    if below.size:
        d_star = int(below[0]) + 1
    else:
        d_star = d_u + 1
        warnings = warnings + (f"selection failed within d_u={d_u}; using d={d_u + 1}",)
    return DSelectionResult(d_star, delta, rule, d_u, thetas, warnings)


def theta_hat_auto(series, k: int, d_u: int = 10, segmented: bool | None = None):
    """Select d* by :func:`select_d_star`, then estimate theta at that order."""
    s = as_series(series)
    sel = select_d_star(s, k, d_u, segmented)
    if segmented is None:
        segmented = s.segment_length is not None
    est = _estimate(s, k, sel.d_star_hat, segmented)
    extra = tuple(w for w in sel.warnings if w not in est.warnings)
    est = EstimateResult(**{**est.__dict__, "warnings": est.warnings + extra, "estimator": "auto"})
    return est, sel


def intervals_estimator(series, k: int) -> EstimateResult:
    """Intervals estimator from inter-exceedance times of X_{n-k,n}, capped at 1."""
    s = as_series(series)
    thr = order_statistic(s, k)
    times = exceedance_indices(s, thr)
    N = times.size
    if N < 2:
        raise InsufficientExceedancesError(f"intervals estimator needs >= 2 exceedances, got {N}")
    T = np.diff(times).astype(float)
    if T.max() <= 2:
        raw = 2.0 * T.sum() ** 2 / ((N - 1) * np.sum(T * T))
    else:
        raw = 2.0 * np.sum(T - 1.0) ** 2 / ((N - 1) * np.sum((T - 1.0) * (T - 2.0)))
    return EstimateResult(
        theta_hat=min(1.0, float(raw)),
        k=thr.k,
        d=0,
        threshold=thr.value,
        count=int(N),
        warnings=thr.warnings,
        estimator="intervals",
    )


def block_length_for(n: int, k: int) -> int:
    """Default sliding-block length floor(n/k)."""
    return max(2, n // k)


def sliding_blocks_mle(series, block_length: int) -> EstimateResult:
    """Sliding-blocks pseudo-MLE: inverse mean of r * (1 - F_n(block maximum)).

    ``F_n`` is the empirical CDF of the full sample. The raw estimate is
    returned; ``EstimateResult.clamped`` gives the [0, 1] version.
    """
    s = as_series(series)
    r = block_length
    if int(r) != r or not 2 <= r <= s.n:
        raise ParameterError(f"block_length must be an integer in [2, {s.n}], got {r}")
    r = int(r)
    x = s.values
    maxima = np.lib.stride_tricks.sliding_window_view(x, r).max(axis=1)
    ecdf = np.searchsorted(np.sort(x), maxima, side="right") / s.n
    z = r * (1.0 - ecdf)
    mean_z = float(z.mean())
    warnings: tuple[str, ...] = ()
    if mean_z > 0:
        theta = 1.0 / mean_z
    else:
        theta = math.nan
        warnings = ("degenerate sample: every sliding block attains the sample maximum",)
    return EstimateResult(
        theta_hat=theta,
        k=max(1, s.n // r),
        d=r,
        threshold=float(np.nan),
        count=int(maxima.size),
        warnings=warnings,
        estimator="sliding_blocks",
    )


def expected_duration(theta: float) -> float:
    """Mean cluster size 1/theta."""
    if not theta > 0:
        raise ParameterError(f"theta must be positive, got {theta}")
    if theta > 1:
        raise ParameterError(f"theta must not exceed 1, got {theta}")
    return 1.0 / theta
