import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from lcrenyi.bounds import GENERAL, SYMMETRIC, BudgetExceeded, alpha_star_float, min_entropy_constant
from lcrenyi.convolution import GridConfig, convolve, grid_renyi_entropy
from lcrenyi.density import (OneSidedExponential, SamplerConfig, TwoSidedExponential, Uniform,
                             sample_logconcave)
from lcrenyi.entropy import entropy_power
from lcrenyi.epi import (DivergentIntegral, cross_log_integral, difference_entropy_slack,
                         lower_constant, matched_generalized_gaussian, relative_alpha_entropy,
                         relative_bound_constant, relative_entropy_check, reverse_epi_cap,
                         reverse_epi_check, sandwich_constants, threshold_branch, upper_constant)

SMALL = GridConfig(min_cells=2**10)
seeds = st.integers(min_value=0, max_value=2**31 - 1)


def test_uniform_sum_is_triangle():
    u = Uniform(1.0).to_piecewise()
    g = convolve(u, u)
    assert g.mass == pytest.approx(1.0, abs=1e-12)
    assert g.variance() == pytest.approx(2 / 3, rel=1e-12)
    assert g.is_symmetric()
    assert grid_renyi_entropy(g, 2.0).value == pytest.approx(math.log(3), abs=1e-6)
    assert grid_renyi_entropy(g, 1.0).value == pytest.approx(0.5 + math.log(2), abs=1e-6)
    assert grid_renyi_entropy(g, math.inf).value == pytest.approx(math.log(2), abs=1e-6)


def test_triangle_order_three_closed_form():
    # int of the triangle cubed on [-2, 2]: 2 * int_0^2 ((2-x)/4)^3 dx = 1/8
    u = Uniform(1.0).to_piecewise()
    h = grid_renyi_entropy(convolve(u, u), 3.0).value
    assert h == pytest.approx(-0.5 * math.log(1 / 8), abs=1e-6)


def test_sum_of_exponentials_against_quadrature():
    x = OneSidedExponential(1.0).to_piecewise(tail_mass=1e-14)
    y = OneSidedExponential(2.0).to_piecewise(tail_mass=1e-14)
    # density of the sum: 2(e^{-t} - e^{-2t})
    ref = -math.log(quad(lambda t: (2 * (math.exp(-t) - math.exp(-2 * t))) ** 2, 0, 60,
                         epsrel=1e-13)[0])
    assert grid_renyi_entropy(convolve(x, y), 2.0).value == pytest.approx(ref, abs=1e-6)


@settings(max_examples=15)
@given(seeds)
def test_convolution_invariants(seed):
    x = sample_logconcave(seed, SamplerConfig(symmetric=False))
    y = sample_logconcave(seed + 1, SamplerConfig(symmetric=False))
    g = convolve(x, y, SMALL)
    assert g.mass == pytest.approx(1.0, abs=1e-12)
    # cell masses sit at cell centres: the moment error is about h^2 * (jump in f) / 12
    h2 = g.step**2 * (x.max_value() + y.max_value()) / 6
    assert g.mean() == pytest.approx(x.mean() + y.mean(), abs=h2)
    assert g.variance() == pytest.approx(x.variance() + y.variance(), abs=h2 * (1 + g.variance()))
    assert np.all(g.values >= 0)


@settings(max_examples=10)
@given(seeds)
def test_symmetric_inputs_give_symmetric_sum(seed):
    x = sample_logconcave(seed)
    y = sample_logconcave(seed + 7)
    assert convolve(x, y, SMALL).is_symmetric(tol=1e-9)


def test_refinement_is_cached_and_budgeted():
    u = Uniform(1.0).to_piecewise()
    g = convolve(u, u, SMALL)
    assert g.refined() is g.refined()
    with pytest.raises(BudgetExceeded):
        convolve(u, u, GridConfig(min_cells=2**12, max_points=1000))
    with pytest.raises(BudgetExceeded):
        grid_renyi_entropy(convolve(u, u, GridConfig(min_cells=16, max_levels=1)), 2.0, tol=1e-15)


@pytest.mark.parametrize("alpha", [2.0, 3.0, 5.0])
def test_one_sided_difference_equality(alpha):
    x = OneSidedExponential(1.0).to_piecewise()
    assert abs(difference_entropy_slack(x, alpha)) <= 1e-6


@settings(max_examples=8)
@given(seeds)
def test_difference_slack_nonnegative(seed):
    x = sample_logconcave(seed, SamplerConfig(symmetric=False))
    assert difference_entropy_slack(x, 2.0, SMALL) >= -1e-6


def test_difference_slack_rejects_low_order():
    with pytest.raises(ValueError):
        difference_entropy_slack(Uniform(1.0).to_piecewise(), 1.5)


def test_sandwich_constant_values():
    s = sandwich_constants(2.0)
    assert s.c_minus == pytest.approx(8.0)
    assert s.c_plus == pytest.approx(125 / 9, rel=1e-13)
    assert s.reverse_epi_cap == pytest.approx(125 / 72, rel=1e-13)
    assert lower_constant(1.1) == 12.0
    assert lower_constant(1.0) == 12.0 and upper_constant(1.0) == pytest.approx(2 * math.pi * math.e)
    assert upper_constant(1 + 1e-7) == pytest.approx(2 * math.pi * math.e, rel=1e-5)
    with pytest.raises(ValueError):
        sandwich_constants(1.0)


@given(st.floats(min_value=1.001, max_value=200.0))
def test_sandwich_ordering(alpha):
    s = sandwich_constants(alpha)
    assert s.c_minus <= s.c_plus


@pytest.mark.parametrize("alpha", [1.5, 2.0, 3.0, 10.0])
def test_generalized_gaussian_saturates_upper_constant(alpha):
    z = matched_generalized_gaussian(alpha, 2.5)
    assert z.symmetric
    assert z.variance() == pytest.approx(2.5, rel=1e-12)
    assert entropy_power(z, alpha) / z.variance() == pytest.approx(upper_constant(alpha), rel=1e-9)


@pytest.mark.parametrize("alpha", [1.2, 1.5, 2.0, 4.0])
def test_relative_constant_is_entropy_gap(alpha):
    c = relative_bound_constant(alpha)
    assert c == pytest.approx(0.5 * math.log(upper_constant(alpha))
                              - min_entropy_constant(alpha, SYMMETRIC), abs=1e-10)
    assert c - relative_bound_constant(alpha, drop_log_term=True) == pytest.approx(
        0.5 * math.log(3 * alpha - 1), abs=1e-12)
    with pytest.raises(ValueError):
        relative_bound_constant(1.0)


def test_relative_bound_saturated_by_minimizer():
    # above alpha* the two-sided exponential is the entropy minimiser, so gap == C(alpha)
    x = TwoSidedExponential(1.0).to_piecewise(tail_mass=1e-14)
    r = relative_entropy_check(x, 2.0)
    assert r.entropy_gap == pytest.approx(r.constant, abs=1e-8)
    assert r.gap_slack >= -1e-6


@settings(max_examples=10)
@given(seeds, st.sampled_from([1.5, 2.0, 3.0]))
def test_relative_entropy_bounds(seed, alpha):
    x = sample_logconcave(seed)
    r = relative_entropy_check(x, alpha)
    assert r.divergence >= -1e-9
    assert r.gap_slack >= -1e-6
    assert r.constant_slack >= -1e-4
    assert abs(relative_alpha_entropy(x, x, alpha)) <= 1e-9


def test_cross_integral_matches_quadrature():
    x = sample_logconcave(3)
    z = matched_generalized_gaussian(2.0, x.variance(), 2000)
    q = 1.0
    cuts = np.union1d(x.knots, z.knots)
    cuts = cuts[(cuts >= x.knots[0]) & (cuts <= x.knots[-1])]
    ref = sum(quad(lambda t: x.pdf(t) * z.pdf(t) ** q, a, b, epsabs=0, epsrel=1e-13)[0]
              for a, b in zip(cuts[:-1], cuts[1:]))
    assert cross_log_integral(x, z, q) == pytest.approx(math.log(ref), abs=1e-9)


def test_cross_integral_divergence():
    wide = Uniform(2.0).to_piecewise()
    narrow = Uniform(1.0).to_piecewise()
    with pytest.raises(DivergentIntegral):
        relative_alpha_entropy(wide, narrow, 0.5)
    with pytest.raises(ValueError):
        relative_alpha_entropy(wide, narrow, 1.0)


def test_reverse_epi_uniform_pair():
    u = Uniform(1.0).to_piecewise()
    rep = reverse_epi_check(u, u, 2.0)
    assert rep.ratio == pytest.approx(9 / 8, rel=1e-6)
    assert rep.cap == pytest.approx(125 / 72)
    assert rep.slack > 0


def test_reverse_epi_regime_validation():
    u = Uniform(1.0).to_piecewise()
    e = OneSidedExponential(1.0).to_piecewise()
    with pytest.raises(ValueError):
        reverse_epi_check(u, e, 2.0, SYMMETRIC)
    with pytest.raises(ValueError):
        reverse_epi_check(e, e, 1.5, GENERAL)
    with pytest.raises(ValueError):
        reverse_epi_cap(2.0, "other")
    assert reverse_epi_cap(2.0, GENERAL) == pytest.approx(2 * reverse_epi_cap(2.0, SYMMETRIC))


@settings(max_examples=25)
@given(seeds, st.sampled_from([1.1, 1.5, 2.0, 3.0, 10.0]))
def test_sandwich_holds_for_samples(seed, alpha):
    f = sample_logconcave(seed)
    n, v = entropy_power(f, alpha), f.variance()
    assert lower_constant(alpha) * v <= n * (1 + 1e-9)
    assert n <= upper_constant(alpha) * v * (1 + 1e-9)
    g = sample_logconcave(seed, SamplerConfig(symmetric=False))
    n, v = entropy_power(g, alpha), g.variance()
    assert n <= upper_constant(alpha) * v * (1 + 1e-9)
    if alpha >= 2:
        assert 0.5 * lower_constant(alpha) * v <= n * (1 + 1e-9)


def test_threshold_branch():
    a = alpha_star_float()
    assert threshold_branch(a - 1e-6) == "uniform"
    assert threshold_branch(a + 1e-6) == "two_sided_exponential"
