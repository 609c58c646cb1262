"""Seeded generators for the benchmark processes with known extremal index.

All randomness comes from numpy's ``Generator(PCG64(seed))``. Uniforms are
drawn with ``Generator.random`` and mapped through inverse CDFs; Gaussian
innovations use ``Generator.standard_normal``. Recursions run in plain
Python floats so a path is bit-identical for a given ``(spec, n, seed)``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .core import ParameterError, Series

ARCH_BURN_IN = 1000
ARCH_INTERCEPT = 2e-5
ARCH_COEF = 0.7
SARCH_COEF = 0.5


class Family(str, enum.Enum):
    MM = "MM"
    AR_CAUCHY = "AR_CAUCHY"
    AR_NORMAL = "AR_NORMAL"
    MAX_AR = "MAX_AR"
    SARCH = "SARCH"
    ARCH = "ARCH"


CLOSED_FORM_FAMILIES = frozenset({Family.MM, Family.AR_CAUCHY, Family.AR_NORMAL, Family.MAX_AR})

# Extremal indices of the two volatility models are not available in closed
# form; these are the published numerical values.
_VOLATILITY_THETA = {Family.SARCH: 0.727, Family.ARCH: 0.721}


@dataclass(frozen=True)
class ModelSpec:
    family: Family
    param: float | None = None
    true_theta: float | None = None
    true_d_star: int | None = None

    @property
    def label(self) -> str:
        if self.family in (Family.ARCH, Family.SARCH):
            return self.family.value
        return f"{self.family.value}({self.param:g})"

    @property
    def exact_param(self) -> Fraction:
        return Fraction(self.param)


def _ground_truth(family: Family, p) -> tuple[float | None, int | None]:
    if family is Family.MM:
        return 1.0 / p, 2
    if family in (Family.AR_CAUCHY, Family.MAX_AR):
        if p > 0:
            return 1.0 - p, 2
        if p == 0:
            return 1.0, 1
        return 1.0 - p * p, 3
    if family is Family.AR_NORMAL:
        return 1.0, 1
    return _VOLATILITY_THETA[family], None


def make_model(family, param=None) -> ModelSpec:
    """Validated :class:`ModelSpec` with its ground-truth (theta, d*) filled in."""
    try:
        family = Family(family.upper() if isinstance(family, str) else family)
    except ValueError:
        raise ParameterError(f"unknown model family {family!r}") from None
    if family is Family.MM:
        if param is None or int(param) != param or param < 2:
            raise ParameterError(f"MM needs an integer window m >= 2, got {param}")
        param = int(param)
    elif family in (Family.AR_CAUCHY, Family.AR_NORMAL):
        if param is None or not -1 < param < 1:
            raise ParameterError(f"{family.value} needs |z| < 1, got {param}")
        param = float(param)
    elif family is Family.MAX_AR:
        if param is None or not 0 <= param < 1:
            raise ParameterError(f"MAX_AR needs 0 <= z < 1, got {param}")
        param = float(param)
    else:
        param = None
    theta, d_star = _ground_truth(family, param)
    return ModelSpec(family, param, theta, d_star)


# parameter choices of the simulation study
BENCHMARKS: dict[str, ModelSpec] = {
    "MM": make_model("MM", 3),
    "AR_CAUCHY": make_model("AR_CAUCHY", -0.5),
    "AR_NORMAL": make_model("AR_NORMAL", 0.5),
    "MAX_AR": make_model("MAX_AR", 0.5),
    "SARCH": make_model("SARCH"),
    "ARCH": make_model("ARCH"),
}


def parse_model(text: str) -> ModelSpec:
    """Parse ``"MM"``, ``"MM:4"`` or ``"AR_CAUCHY:-0.25"``; bare names use the benchmark parameter."""
    name, _, value = text.partition(":")
    name = name.strip().upper().replace("-", "_")
    if not value:
        if name not in BENCHMARKS:
            raise ParameterError(f"unknown model {text!r}; choose from {', '.join(BENCHMARKS)}")
        return BENCHMARKS[name]
    try:
        num = float(value)
    except ValueError:
        raise ParameterError(f"bad model parameter in {text!r}") from None
    return make_model(name, num)


@dataclass(frozen=True)
class SimulatedPath:
    series: Series
    spec: ModelSpec
    seed: int
    burn_in: int = 0


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def frechet_from_uniform(u):
    """Inverse CDF of the unit Frechet law exp(-1/x)."""
    with np.errstate(divide="ignore"):
        return -1.0 / np.log(u)


def cauchy_from_uniform(u, scale=1.0):
    return scale * np.tan(np.pi * (np.asarray(u) - 0.5))


def frechet_unit_sample(rng: np.random.Generator, size=None):
    return frechet_from_uniform(rng.random(size))


def cauchy_sample(rng: np.random.Generator, scale: float = 1.0, size=None):
    return cauchy_from_uniform(rng.random(size), scale)


def _moving_maxima(rng, n, m):
    eps = frechet_unit_sample(rng, n + m - 1) / m
    windows = np.lib.stride_tricks.sliding_window_view(eps, m)
    return windows.max(axis=1)


def _linear_ar(z, x0, eps):
    out = [0.0] * len(eps)
    x = float(x0)
    for i, e in enumerate(eps.tolist()):
        x = z * x + e
        out[i] = x
    return np.array(out)


def _max_ar(z, eps):
    e = eps.tolist()
    out = [0.0] * len(e)
    x = e[0] / (1.0 - z)
    out[0] = x
    for i in range(1, len(e)):
        zx = z * x
        x = zx if zx > e[i] else e[i]
        out[i] = x
    return np.array(out)


def _arch(eps, burn_in):
    a, b = ARCH_INTERCEPT, ARCH_COEF
    sqrt = math.sqrt
    x = 0.0
    out = []
    append = out.append
    for e in eps.tolist():
        x = sqrt(a + b * x * x) * e
        append(x)
    return np.array(out[burn_in:])


def _sarch(eps, burn_in):
    a, b = ARCH_INTERCEPT, SARCH_COEF
    x = 0.0
    out = []
    append = out.append
    for e in eps.tolist():
        x = (a + b * x) * e * e
        append(x)
    return np.array(out[burn_in:])


def simulate(spec: ModelSpec, n: int, seed: int) -> SimulatedPath:
    if int(n) != n or n < 1:
        raise ParameterError(f"n must be a positive integer, got {n}")
    n = int(n)
    rng = make_rng(seed)
    fam, p = spec.family, spec.param
    burn_in = 0
    if fam is Family.MM:
        x = _moving_maxima(rng, n, p)
    elif fam is Family.AR_CAUCHY:
        x0 = cauchy_sample(rng)
        x = _linear_ar(p, x0, cauchy_sample(rng, 1.0 - abs(p), n))
    elif fam is Family.AR_NORMAL:
        x0 = rng.standard_normal() / math.sqrt(1.0 - p * p)
        x = _linear_ar(p, x0, rng.standard_normal(n))
    elif fam is Family.MAX_AR:
        x = _max_ar(p, frechet_unit_sample(rng, n))
    elif fam is Family.ARCH:
        burn_in = ARCH_BURN_IN
        x = _arch(rng.standard_normal(n + burn_in), burn_in)
    elif fam is Family.SARCH:
        burn_in = ARCH_BURN_IN
        x = _sarch(rng.standard_normal(n + burn_in), burn_in)
    else:  # pragma: no cover
        raise ParameterError(f"unsupported family {fam}")
    return SimulatedPath(Series(x), spec, int(seed), burn_in)


def marginal_cdf(spec: ModelSpec, x):
    """Closed-form stationary marginal CDF (MM, MAX-AR, AR-Cauchy, AR-Normal).

    MAX-AR is Frechet with scale 1/(1 - z): that is the law of its stationary
    start X_1 = eps_1 / (1 - z).
    """
    from scipy import stats

    x = np.asarray(x, dtype=float)
    fam = spec.family
    if fam in (Family.MM, Family.MAX_AR):
        scale = 1.0 if fam is Family.MM else 1.0 / (1.0 - spec.param)
        pos = np.where(x > 0, x, 1.0)
        return np.where(x > 0, np.exp(-scale / pos), 0.0)
    if fam is Family.AR_CAUCHY:
        return stats.cauchy.cdf(x)
    if fam is Family.AR_NORMAL:
        return stats.norm.cdf(x, scale=1.0 / math.sqrt(1.0 - spec.param**2))
    raise ParameterError(f"no closed-form marginal for {fam.value}")


def marginal_quantile(spec: ModelSpec, q):
    """Inverse of :func:`marginal_cdf`."""
    from scipy import stats

    q = np.asarray(q, dtype=float)
    fam = spec.family
    if fam in (Family.MM, Family.MAX_AR):
        scale = 1.0 if fam is Family.MM else 1.0 / (1.0 - spec.param)
        return -scale / np.log(q)
    if fam is Family.AR_CAUCHY:
        return stats.cauchy.ppf(q)
    if fam is Family.AR_NORMAL:
        return stats.norm.ppf(q, scale=1.0 / math.sqrt(1.0 - spec.param**2))
    raise ParameterError(f"no closed-form marginal for {fam.value}")


def stationary_windows(spec: ModelSpec, count: int, length: int, rng: np.random.Generator) -> np.ndarray:
    """``count`` independent stationary stretches (X_1..X_length), shape (count, length).

    Used by Monte Carlo oracles that need i.i.d. draws of a finite-dimensional
    vector rather than one long path. The volatility models start from 0 and
    discard :data:`ARCH_BURN_IN` steps per stretch.
    """
    fam, p = spec.family, spec.param
    out = np.empty((count, length))
    if fam is Family.MM:
        eps = frechet_unit_sample(rng, (count, length + p - 1)) / p
        return np.lib.stride_tricks.sliding_window_view(eps, p, axis=1).max(axis=2)
    if fam is Family.MAX_AR:
        eps = frechet_unit_sample(rng, (count, length))
        out[:, 0] = eps[:, 0] / (1.0 - p)
        for j in range(1, length):
            out[:, j] = np.maximum(p * out[:, j - 1], eps[:, j])
        return out
    if fam in (Family.AR_CAUCHY, Family.AR_NORMAL):
        if fam is Family.AR_CAUCHY:
            out[:, 0] = cauchy_sample(rng, 1.0, count)
            eps = cauchy_sample(rng, 1.0 - abs(p), (count, length))
        else:
            out[:, 0] = rng.standard_normal(count) / math.sqrt(1.0 - p * p)
            eps = rng.standard_normal((count, length))
        for j in range(1, length):
            out[:, j] = p * out[:, j - 1] + eps[:, j]
        return out
    eps = rng.standard_normal((count, ARCH_BURN_IN + length))
    x = np.zeros(count)
    for j in range(ARCH_BURN_IN + length):
        if fam is Family.ARCH:
            x = np.sqrt(ARCH_INTERCEPT + ARCH_COEF * x * x) * eps[:, j]
        else:
            x = (ARCH_INTERCEPT + SARCH_COEF * x) * eps[:, j] ** 2
        if j >= ARCH_BURN_IN:
            out[:, j - ARCH_BURN_IN] = x
    return out
