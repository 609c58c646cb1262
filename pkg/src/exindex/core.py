"""Series container, tail order statistics and exceedance bookkeeping."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class ParameterError(ValueError):
    """An argument is outside the admissible range of an operation."""


class DataError(ValueError):
    """Input data is malformed or unusable."""


class InsufficientExceedancesError(DataError):
    """Too few threshold exceedances for the requested estimator."""


@dataclass(frozen=True)
class Series:
    """An ordered real sample, optionally split into equal-length segments.

    ``segment_length`` marks independent blocks (e.g. one summer per year);
    estimators that honour it never let a window cross a block boundary.
    """

    values: np.ndarray
    segment_length: int | None = None

    def __post_init__(self):
        arr = np.array(self.values, dtype=float).ravel()
        if not np.all(np.isfinite(arr)):
            raise DataError("series contains NaN or infinite values")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)
        L = self.segment_length
        if L is not None:
            if int(L) != L or L < 1:
                raise ParameterError(f"segment_length must be a positive integer, got {L}")
            if arr.size == 0 or arr.size % L:
                raise ParameterError(
                    f"series length {arr.size} is not a positive multiple of segment_length {L}"
                )
            object.__setattr__(self, "segment_length", int(L))

    @property
    def n(self) -> int:
        return int(self.values.size)

    @property
    def n_segments(self) -> int:
        return 1 if self.segment_length is None else self.n // self.segment_length

    def __len__(self):
        return self.n


def as_series(data, segment_length: int | None = None) -> Series:
    if isinstance(data, Series):
        if segment_length is None or segment_length == data.segment_length:
            return data
        return Series(data.values, segment_length)
    return Series(np.asarray(data, dtype=float), segment_length)


@dataclass(frozen=True)
class Threshold:
    """Data-driven threshold: the (k+1)-th largest observation."""

    k: int
    value: float
    ties: bool = False
    warnings: tuple[str, ...] = field(default_factory=tuple)


def _check_k(k, n: int) -> int:
    if n == 0:
        raise ParameterError("empty series")
    if int(k) != k or not 1 <= k <= n - 1:
        raise ParameterError(f"k must be an integer in [1, {n - 1}], got {k}")
    return int(k)


def order_statistic(series, k: int) -> Threshold:
    """Return X_{n-k,n}, the (n-k)-th smallest value of the sample.

    Ties at the threshold (so that fewer than ``k`` values strictly exceed it)
    are reported through ``Threshold.warnings``; comparisons stay strict.
    """
    s = as_series(series)
    k = _check_k(k, s.n)
    x = np.sort(s.values)
    value = float(x[s.n - k - 1])
    warnings: tuple[str, ...] = ()
    ties = bool(x[s.n - k] == value)
    if ties:
        above = int(np.count_nonzero(s.values > value))
        warnings = (f"ties at threshold {value!r}: {above} values exceed it instead of k={k}",)
    return Threshold(k=k, value=value, ties=ties, warnings=warnings)


def exceedance_indices(series, threshold: Threshold | float) -> np.ndarray:
    """0-based positions of observations strictly above the threshold."""
    s = as_series(series)
    u = threshold.value if isinstance(threshold, Threshold) else float(threshold)
    return np.flatnonzero(s.values > u)
