import math
import time
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from lcrenyi.bounds import (BRACKET, GENERAL, SYMMETRIC, BoundSpec, BudgetExceeded, alpha_star,
                            alpha_star_float, exact_power_sign, min_entropy_constant, theorem_slack,
                            threshold_sign)
from lcrenyi.density import (Extremal, OneSidedExponential, SamplerConfig, TwoSidedExponential,
                             Uniform, sample_logconcave)
from lcrenyi.intervals import RationalInterval, log_enclosure

fracs = st.fractions(min_value=-100, max_value=100, max_denominator=10**6)


def _iv(a, b):
    return RationalInterval(min(a, b), max(a, b))


@given(fracs, fracs, fracs, fracs)
def test_interval_arithmetic_encloses(a, b, c, d):
    x, y = _iv(a, b), _iv(c, d)
    for u in (a, b):
        for v in (c, d):
            assert (x + y).contains(u + v)
            assert (x - y).contains(u - v)
            assert (x * y).contains(u * v)
            if not y.contains(0):
                assert (x / y).contains(u / v)
    for n in (2, 3, 5):
        assert (x**n).contains(a**n) and (x**n).contains(b**n)


def test_interval_rejects_floats():
    with pytest.raises(TypeError):
        RationalInterval(1.5)


def test_interval_sign_and_rounding():
    assert RationalInterval(1, 2).sign() == 1
    assert RationalInterval(-2, -1).sign() == -1
    assert RationalInterval(0).sign() == 0
    assert RationalInterval(-1, 1).sign() is None
    x = RationalInterval(Fraction(1, 3), Fraction(2, 3))
    assert x.round_outward(20).contains(x)


@given(st.fractions(min_value=Fraction(1, 1000), max_value=1000, max_denominator=10**9))
def test_log_enclosure(x):
    mpmath.mp.dps = 60
    iv = log_enclosure(x, 150)
    ref = mpmath.log(mpmath.mpf(x.numerator) / x.denominator)
    assert mpmath.mpf(iv.lo.numerator) / iv.lo.denominator <= ref
    assert ref <= mpmath.mpf(iv.hi.numerator) / iv.hi.denominator
    assert iv.width < Fraction(1, 2**140)


def test_bracket_exact_signs():
    # (6/5)^10 vs 6 and (13/10)^20 vs 6^3
    assert Fraction(6, 5) ** 10 > 6 and Fraction(13, 10) ** 20 < 216
    assert exact_power_sign(BRACKET[0]) == 1
    assert exact_power_sign(BRACKET[1]) == -1


def test_alpha_star_coarse():
    iv = alpha_star(Fraction(1, 1000))
    assert iv.width <= Fraction(1, 1000)
    assert Fraction("1.240") <= iv.lo and iv.hi <= Fraction("1.242")
    assert not iv.contains(1)


def test_alpha_star_fine_and_fast():
    alpha_star.cache_clear()
    t0 = time.perf_counter()
    iv = alpha_star(Fraction(1, 10**12))
    assert time.perf_counter() - t0 < 1.0
    m = float(iv.mid)
    assert abs(m ** (2 / (1 - m)) - 1 / 6) <= 10 * 1e-12
    assert threshold_sign(iv.lo) == 1 and threshold_sign(iv.hi) == -1


def test_alpha_star_matches_mpmath_root():
    mpmath.mp.dps = 50
    root = mpmath.findroot(lambda a: 2 * mpmath.log(a) - (a - 1) * mpmath.log(6), 1.24)
    iv = alpha_star(Fraction(1, 10**30))
    lo = mpmath.mpf(iv.lo.numerator) / iv.lo.denominator
    hi = mpmath.mpf(iv.hi.numerator) / iv.hi.denominator
    assert lo <= root <= hi


def test_alpha_star_budget():
    with pytest.raises(BudgetExceeded):
        alpha_star(Fraction(1, 10**400), budget_bits=1000)


def test_min_entropy_constant_values():
    assert min_entropy_constant(1.0) == pytest.approx(0.5 * math.log(12))
    assert min_entropy_constant(2.0) == pytest.approx(1.5 * math.log(2))
    assert min_entropy_constant(2.0, GENERAL) == pytest.approx(math.log(2))
    with pytest.raises(ValueError):
        min_entropy_constant(1.5, GENERAL)


def test_regime_continuity_at_threshold():
    iv = alpha_star(Fraction(1, 10**30))
    for x in (iv.lo, iv.hi):
        a = float(x)
        assert 0.5 * math.log(2) + math.log(a) / (a - 1) == pytest.approx(0.5 * math.log(12), abs=1e-14)


def test_bound_spec_branch():
    assert BoundSpec.of(1.0).branch == "uniform"
    assert BoundSpec.of(3.0).branch == "two_sided_exponential"
    assert BoundSpec.of(3.0, GENERAL).branch == "one_sided_exponential"


@pytest.mark.parametrize("alpha", [0.5, 1.0, 1.2])
def test_uniform_equality(alpha):
    assert abs(theorem_slack(Uniform(2.3).to_piecewise(), alpha)) <= 1e-9


@pytest.mark.parametrize("alpha", [1.3, 2.0, 5.0])
def test_two_sided_exponential_equality(alpha):
    assert abs(theorem_slack(TwoSidedExponential(0.7).to_piecewise(), alpha)) <= 1e-9


@pytest.mark.parametrize("alpha", [2.0, 3.0])
def test_one_sided_exponential_equality(alpha):
    assert abs(theorem_slack(OneSidedExponential(1.9).to_piecewise(), alpha, GENERAL)) <= 1e-9


def test_symmetric_regime_requires_symmetry():
    with pytest.raises(ValueError):
        theorem_slack(OneSidedExponential(1.0).to_piecewise(), 2.0, SYMMETRIC)


@given(st.integers(0, 2**31 - 1), st.floats(0.1, 10.0), st.sampled_from([0.5, 1.0, 2.0, 5.0]))
def test_slack_scale_invariant(seed, lam, alpha):
    f = sample_logconcave(seed)
    assert theorem_slack(f.rescaled(lam), alpha) == pytest.approx(theorem_slack(f, alpha), abs=1e-9)


@given(st.integers(0, 2**31 - 1))
def test_slack_nonnegative_property(seed):
    f = sample_logconcave(seed)
    for a in (0.5, 1.0, alpha_star_float(), 2.0, 50.0):
        assert theorem_slack(f, a) >= -1e-8
    g = sample_logconcave(seed, SamplerConfig(symmetric=False))
    for a in (2.0, 3.0, 10.0):
        assert theorem_slack(g, a, GENERAL) >= -1e-8


def test_extremal_family_sharpness():
    a_star = alpha_star_float()
    grid = np.linspace(0.0, 10.0, 50)
    slacks = []
    for a in grid:
        for b in grid:
            if a == 0 and b == 0:
                continue
            f = Extremal(a, b, 1.0).to_piecewise()
            slacks.append(theorem_slack(f, a_star))
    assert min(slacks) >= -1e-8
    assert min(slacks) <= 1e-3
