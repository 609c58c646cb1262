"""Diagonal values of the stable tail dependence function for the benchmark models.

For a stationary sequence, l_s(1, ..., 1) is the limit of
n * P(max(X_1, ..., X_s) > u_n) with n * P(X_1 > u_n) -> 1. Its increments
Delta(s) = l_s - l_{s-1} (with l_0 = 0) are non-increasing; theta is their
limit and d* is the first s at which Delta(s) reaches it.
"""
from __future__ import annotations

import functools
import math
import os
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from .core import ParameterError
from .simulate import (
    BENCHMARKS,
    CLOSED_FORM_FAMILIES,
    Family,
    ModelSpec,
    make_rng,
    marginal_quantile,
    simulate,
    stationary_windows,
)

TOLERANCE = 1e-12


def _require_closed_form(model: ModelSpec):
    if model.family not in CLOSED_FORM_FAMILIES:
        raise ParameterError(f"no closed-form stable tail dependence function for {model.family.value}")


def ell_closed_form(model: ModelSpec, s: int, exact: bool = True):
    """l_s(1_s) for MM, MAX-AR, AR-Normal and AR-Cauchy.

    With ``exact=True`` the result is a :class:`~fractions.Fraction` built
    from the (binary-exact) parameter, so equalities are decided without
    rounding; otherwise a float.
    """
    _require_closed_form(model)
    if int(s) != s or s < 1:
        raise ParameterError(f"s must be a positive integer, got {s}")
    s = int(s)
    if model.family is Family.MM:
        z = Fraction(model.param)
    else:
        z = Fraction(model.param) if exact else model.param
    one = Fraction(1) if exact else 1.0
    if s == 1:
        val = one
    elif model.family is Family.MM:
        val = (s + z - 1) / z
    elif model.family is Family.MAX_AR:
        val = s - s * z + z
    elif model.family is Family.AR_NORMAL:
        val = one * s
    elif z >= 0:
        val = s - (s - 1) * z
    else:
        # two-sided Cauchy tails: a large negative X_1 re-enters at odd lags
        val = s - (s - 2) * z * z
    return val if exact else float(val)


@dataclass(frozen=True)
class StdfProfile:
    model: ModelSpec
    ell: tuple  # l_s(1_s), s = 1..s_max
    delta_upper: tuple  # Delta(s), s = 1..s_max
    theta: Fraction | float
    d_star: int

    def rows(self):
        for s, (e, dl) in enumerate(zip(self.ell, self.delta_upper), start=1):
            yield {
                "model": self.model.label,
                "s": s,
                "ell": float(e),
                "delta": float(dl),
                "ell_exact": str(e),
                "delta_exact": str(dl),
                "theta": float(self.theta),
                "d_star": self.d_star,
            }


def theta_and_dstar(model: ModelSpec, s_max: int = 10, exact: bool = True) -> StdfProfile:
    _require_closed_form(model)
    need = model.true_d_star or 2
    if s_max < max(need, 2):
        raise ParameterError(f"s_max={s_max} is below d* = {need} for {model.label}")
    ell = [ell_closed_form(model, s, exact) for s in range(1, s_max + 1)]
    delta = [ell[0]] + [b - a for a, b in zip(ell, ell[1:])]
    theta = delta[-1]
    if exact:
        d_star = next(s for s, v in enumerate(delta, start=1) if v == theta)
    else:
        d_star = next(s for s, v in enumerate(delta, start=1) if abs(v - theta) <= TOLERANCE)
    return StdfProfile(model, tuple(ell), tuple(delta), theta, d_star)


# --------------------------------------------------------------------------
# Monte Carlo evaluation of the defining limit


def _cache_dir() -> Path:
    return Path(os.environ.get("EXINDEX_CACHE", Path.home() / ".cache" / "exindex"))


CALIBRATION_LENGTH = 10**7
_CALIBRATION_CHAINS = 1000
_CALIBRATION_TAIL = 10**5


@functools.lru_cache(maxsize=8)
def _calibration_tail(family: Family, length: int, seed: int) -> np.ndarray:
    """Largest values of a stationary calibration sample, ascending.

    The sample is ``_CALIBRATION_CHAINS`` independent chains concatenated,
    ``length`` values in total, cached to disk under the seed.
    """
    path = _cache_dir() / f"calibration_{family.value}_{length}_{seed}.npy"
    if path.exists():
        return np.load(path)
    spec = BENCHMARKS[family.value]
    rng = make_rng(seed)
    per_chain = length // _CALIBRATION_CHAINS
    keep = min(_CALIBRATION_TAIL, length)
    block = stationary_windows(spec, _CALIBRATION_CHAINS, min(100, per_chain), rng)
    tail = block.ravel()
    done = block.shape[1]
    while done < per_chain:
        block = _continue_chains(spec, block[:, -1], min(100, per_chain - done), rng)
        tail = np.concatenate([tail, block.ravel()])
        if tail.size > 4 * keep:
            tail = np.partition(tail, tail.size - keep)[-keep:]
        done += block.shape[1]
    if tail.size > keep:
        tail = np.partition(tail, tail.size - keep)[-keep:]
    tail = np.sort(tail)
    path.parent.mkdir(parents=True, exist_ok=True)
    np.save(path, tail)
    return tail


def _continue_chains(spec: ModelSpec, state: np.ndarray, steps: int, rng) -> np.ndarray:
    from .simulate import ARCH_COEF, ARCH_INTERCEPT, SARCH_COEF

    eps = rng.standard_normal((state.size, steps))
    out = np.empty((state.size, steps))
    x = state
    for j in range(steps):
        if spec.family is Family.ARCH:
            x = np.sqrt(ARCH_INTERCEPT + ARCH_COEF * x * x) * eps[:, j]
        else:
            x = (ARCH_INTERCEPT + SARCH_COEF * x) * eps[:, j] ** 2
        out[:, j] = x
    return out


def tail_quantile(model: ModelSpec, tail_prob: float, calibration_seed: int = 20240101,
                  calibration_length: int = CALIBRATION_LENGTH) -> float:
    """Marginal quantile at 1 - tail_prob; empirical for the volatility models."""
    if model.family in CLOSED_FORM_FAMILIES:
        return float(marginal_quantile(model, 1.0 - tail_prob))
    tail = _calibration_tail(model.family, calibration_length, calibration_seed)
    rank = tail_prob * calibration_length
    if rank > tail.size:
        raise ParameterError(f"tail probability {tail_prob} outside the cached calibration tail")
    # value exceeded by a fraction tail_prob of the calibration sample
    return float(tail[tail.size - max(1, int(round(rank)))])


@dataclass(frozen=True)
class MonteCarloEstimate:
    estimate: float
    std_error: float
    hits: int
    trials: int


def ell_monte_carlo(model: ModelSpec, s: int, n: int, reps: int, seed: int, x: float = 1.0,
                    **calibration) -> MonteCarloEstimate:
    """Estimate n * P(max(X_1..X_s) > u_n(x)) where P(X_1 > u_n(x)) = x / n.

    Each replicate draws ``n`` independent stationary stretches of length
    ``s``, so hits are binomial over ``reps * n`` trials. With ``x != 1``
    the target is l_s(x, ..., x) = x * l_s(1_s).
    """
    if int(s) != s or s < 1:
        raise ParameterError(f"s must be a positive integer, got {s}")
    if n < 1 or reps < 1 or not x > 0 or x >= n:
        raise ParameterError("need n >= 1, reps >= 1 and 0 < x < n")
    u = tail_quantile(model, x / n, **calibration)
    rng = make_rng(seed)
    hits = 0
    for _ in range(reps):
        win = stationary_windows(model, int(n), int(s), rng)
        hits += int(np.count_nonzero(win.max(axis=1) > u))
    trials = reps * int(n)
    p = hits / trials
    return MonteCarloEstimate(n * p, n * math.sqrt(p * (1.0 - p) / trials), hits, trials)


@dataclass(frozen=True)
class DeltaProfile:
    """Replicate-averaged Delta(s) = P(M_{2,s} <= u | X_1 > u) at a finite level.

    ``delta_upper[s-1]`` estimates Delta(s) for s = 1..s_max + 1 and
    ``decrement[s-1]`` estimates Delta(s) - Delta(s+1), each with a standard
    error over replicates.
    """

    model: ModelSpec
    k: int
    reps: int
    delta_upper: np.ndarray
    delta_se: np.ndarray
    decrement: np.ndarray
    decrement_se: np.ndarray

    @property
    def significant(self) -> np.ndarray:
        """Decrements exceeding two standard errors."""
        return self.decrement > 2.0 * self.decrement_se

    def decreases_in_every_window(self, width: int = 3) -> bool:
        sig = self.significant
        return all(sig[i:i + width].any() for i in range(sig.size - width + 1))

    def plateau_start(self) -> int | None:
        """Smallest s with no significant decrement from s onwards, if any."""
        sig = self.significant
        for s in range(1, sig.size + 1):
            if not sig[s - 1:].any():
                return s
        return None


def delta_profile_mc(model: ModelSpec, n: int = 5000, reps: int = 200, seed: int = 0,
                     k: int = 20, s_max: int = 10) -> DeltaProfile:
    """Delta(s) from the empirical conditional frequency on ``reps`` paths.

    Each path of length ``n`` is thresholded at X_{n-k,n}; only exceedances
    with at least ``s_max + 1`` followers enter, so every s uses the same
    exceedances. Small ``k`` keeps the background rate of fresh, unrelated
    exceedances (about k/n per lag) below the Monte Carlo noise.
    """
    if n <= k + s_max + 1:
        raise ParameterError("n too small for k and s_max")
    ds = np.arange(1, s_max + 2)
    rows = np.zeros((reps, ds.size))
    for r in range(reps):
        x = simulate(model, n, seed + r).series.values
        u = np.sort(x)[n - k - 1]
        exc = np.flatnonzero(x > u)
        first = exc[exc < n - s_max]
        if first.size == 0:
            rows[r] = np.nan
            continue
        nxt = np.append(exc, np.iinfo(np.int64).max)[np.searchsorted(exc, first, side="right")]
        gap = nxt - first
        counts = np.array([np.count_nonzero(gap >= d) for d in ds])
        rows[r] = counts / first.size
    rows = rows[~np.isnan(rows).any(axis=1)]
    m = rows.shape[0]
    dec = rows[:, :-1] - rows[:, 1:]
    return DeltaProfile(
        model=model,
        k=k,
        reps=m,
        delta_upper=rows.mean(axis=0),
        delta_se=rows.std(axis=0, ddof=1) / math.sqrt(m),
        decrement=dec.mean(axis=0),
        decrement_se=dec.std(axis=0, ddof=1) / math.sqrt(m),
    )


def arch_no_finite_d_check(n: int = 5000, reps: int = 200, seed: int = 0, k: int = 20,
                           s_max: int = 10) -> DeltaProfile:
    """Delta(s) profile of the ARCH benchmark; it keeps decreasing, so no finite d* exists."""
    return delta_profile_mc(BENCHMARKS["ARCH"], n, reps, seed, k, s_max)

