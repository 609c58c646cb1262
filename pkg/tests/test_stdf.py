from fractions import Fraction

import numpy as np
import pytest

from exindex.core import ParameterError
from exindex.simulate import BENCHMARKS, make_model
from exindex.stdf import (
    delta_profile_mc,
    ell_closed_form,
    ell_monte_carlo,
    tail_quantile,
    theta_and_dstar,
)

CLOSED = ["MM", "AR_CAUCHY", "AR_NORMAL", "MAX_AR"]


def test_spot_values():
    assert ell_closed_form(BENCHMARKS["MM"], 2) == Fraction(4, 3)
    assert ell_closed_form(BENCHMARKS["MAX_AR"], 3) == 2
    assert ell_closed_form(BENCHMARKS["AR_CAUCHY"], 2) == 2
    assert ell_closed_form(BENCHMARKS["AR_CAUCHY"], 3) == Fraction(11, 4)
    assert ell_closed_form(BENCHMARKS["AR_NORMAL"], 7) == 7
    for name in CLOSED:
        assert ell_closed_form(BENCHMARKS[name], 1) == 1


def test_positive_z_cauchy():
    spec = make_model("AR_CAUCHY", 0.25)
    assert ell_closed_form(spec, 4) == 4 - 3 * Fraction(1, 4)
    prof = theta_and_dstar(spec)
    assert prof.theta == Fraction(3, 4) and prof.d_star == 2


@pytest.mark.parametrize("name", CLOSED)
def test_shape_properties(name):
    prof = theta_and_dstar(BENCHMARKS[name], 10)
    for s, e in enumerate(prof.ell, start=1):
        assert 1 <= e <= s
    d = prof.delta_upper
    assert all(0 <= v <= 1 for v in d)
    assert all(b <= a for a, b in zip(d, d[1:]))


def test_table():
    expected = {"MM": (Fraction(1, 3), 2), "AR_CAUCHY": (Fraction(3, 4), 3),
                "AR_NORMAL": (1, 1), "MAX_AR": (Fraction(1, 2), 2)}
    for name, (theta, d_star) in expected.items():
        prof = theta_and_dstar(BENCHMARKS[name])
        assert prof.theta == theta and prof.d_star == d_star
        assert BENCHMARKS[name].true_theta == float(theta)


def test_float_path_matches_exact():
    for name in CLOSED:
        a, b = theta_and_dstar(BENCHMARKS[name]), theta_and_dstar(BENCHMARKS[name], exact=False)
        assert a.d_star == b.d_star and float(a.theta) == pytest.approx(b.theta, abs=1e-12)


def test_max_ar_increment_matches_theta():
    spec = BENCHMARKS["MAX_AR"]
    assert ell_closed_form(spec, 2) - ell_closed_form(spec, 1) == Fraction(1, 2)


def test_volatility_models_unsupported():
    with pytest.raises(ParameterError):
        ell_closed_form(BENCHMARKS["ARCH"], 2)
    with pytest.raises(ParameterError):
        theta_and_dstar(BENCHMARKS["SARCH"])


def test_s_max_below_d_star():
    with pytest.raises(ParameterError):
        theta_and_dstar(BENCHMARKS["AR_CAUCHY"], 2)


@pytest.mark.parametrize("name", CLOSED)
@pytest.mark.parametrize("s", [2, 3, 4])
def test_mc_agrees_with_closed_form(name, s):
    spec = BENCHMARKS[name]
    mc = ell_monte_carlo(spec, s, n=10**4, reps=100, seed=1000 * s + CLOSED.index(name))
    assert abs(mc.estimate - float(ell_closed_form(spec, s))) < 3 * mc.std_error


def test_homogeneity():
    spec = BENCHMARKS["MM"]
    full = ell_monte_carlo(spec, 2, n=10**4, reps=40, seed=1, x=1.0)
    half = ell_monte_carlo(spec, 2, n=10**4, reps=40, seed=2, x=0.5)
    se = np.hypot(full.std_error / 2, half.std_error)
    assert abs(half.estimate - full.estimate / 2) < 3 * se


def test_tail_quantile_closed_form():
    assert tail_quantile(BENCHMARKS["AR_CAUCHY"], 0.5) == pytest.approx(0.0, abs=1e-12)


def test_delta_profile_mm_shape():
    prof = delta_profile_mc(BENCHMARKS["MM"], n=3000, reps=30, seed=0, k=20, s_max=6)
    assert prof.delta_upper.shape == (7,) and prof.decrement.shape == (6,)
    assert prof.delta_upper[0] == 1.0
    assert abs(prof.delta_upper[1] - 1 / 3) < 0.1
