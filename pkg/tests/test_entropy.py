import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad

from lcrenyi.density import (OneSidedExponential, SamplerConfig, TwoSidedExponential, Uniform,
                             Extremal, sample_logconcave)
from lcrenyi.entropy import (EntropyOrder, entropy_power, log_ratio_term, lp_mass_convexity_probe,
                             renyi_entropy)

seeds = st.integers(min_value=0, max_value=2**31 - 1)


def test_entropy_order_tags():
    assert EntropyOrder.of(0).tag == "zero"
    assert EntropyOrder.of(1).tag == "one"
    assert EntropyOrder.of(math.inf).tag == "infinity"
    assert EntropyOrder.of(2.5).alpha == 2.5
    with pytest.raises(ValueError):
        EntropyOrder("finite", 1.0)
    with pytest.raises(ValueError):
        EntropyOrder.of(-1)


@pytest.mark.parametrize("alpha", [0.3, 0.5, 2.0, 7.0, 0, 1, math.inf])
def test_uniform_all_orders_equal(alpha):
    f = Uniform(1.0).to_piecewise()
    assert renyi_entropy(f, alpha) == pytest.approx(math.log(2), rel=1e-14)


def test_two_sided_exponential_order_two():
    f = TwoSidedExponential(1.0).to_piecewise()
    assert renyi_entropy(f, 2) == pytest.approx(math.log(4), abs=1e-9)


def test_one_sided_exponential_shannon():
    f = OneSidedExponential(1.0).to_piecewise()
    assert renyi_entropy(f, 1) == pytest.approx(1.0, abs=1e-9)


def test_entropy_power_values_and_scaling():
    assert entropy_power(Uniform(1.0).to_piecewise(), 2) == pytest.approx(4.0)
    assert entropy_power(TwoSidedExponential(1.0).to_piecewise(), 2) == pytest.approx(16.0, rel=1e-9)
    f = sample_logconcave(5)
    for lam in (0.5, 3.0):
        assert entropy_power(f.rescaled(lam), 1.7) == pytest.approx(entropy_power(f, 1.7) / lam**2, rel=1e-12)


@pytest.mark.parametrize("d", [Uniform(0.8), TwoSidedExponential(1.7), OneSidedExponential(0.6),
                               Extremal(0.5, 2.0, 1.5)])
@pytest.mark.parametrize("alpha", [0.4, 1.0, 1.3, 2.0, 9.0])
def test_closed_forms(d, alpha):
    # low orders weight the truncated tail by mass**alpha, so cut deeper
    f = d.to_piecewise(tail_mass=1e-40)
    assert renyi_entropy(f, alpha) == pytest.approx(d.renyi_entropy(alpha), abs=1e-9)


def test_shannon_against_quadrature():
    f = sample_logconcave(21, SamplerConfig(symmetric=False))
    ref = -sum(quad(lambda x: f.pdf(x) * math.log(f.pdf(x)), a, b, epsrel=1e-12)[0]
               for a, b in zip(f.knots[:-1], f.knots[1:]))
    assert renyi_entropy(f, 1) == pytest.approx(ref, rel=1e-10)


@pytest.mark.parametrize("seed", range(10))
def test_limit_consistency(seed):
    f = sample_logconcave(seed, SamplerConfig(symmetric=bool(seed % 2)))
    h1 = renyi_entropy(f, 1)
    for a in (1 - 1e-6, 1 + 1e-6):
        assert abs(renyi_entropy(f, a) - h1) <= 1e-4
    # alpha -> 0 and alpha -> inf approach the support and sup-norm orders
    assert renyi_entropy(f, 1e-7) == pytest.approx(renyi_entropy(f, 0), abs=1e-4)
    assert renyi_entropy(f, 1e3) == pytest.approx(renyi_entropy(f, math.inf),
                                                  abs=5e-2 * (1 + abs(renyi_entropy(f, math.inf))))


def test_infinity_is_sup_norm():
    f = sample_logconcave(4)
    assert renyi_entropy(f, math.inf) == pytest.approx(-math.log(f.max_value()))


@given(seeds)
def test_monotonicity_in_order(seed):
    f = sample_logconcave(seed, SamplerConfig(symmetric=bool(seed % 2)))
    grid = (0.3, 0.7, 1.0, 1.5, 2.0, 4.0, 16.0)
    h = [renyi_entropy(f, a) for a in grid]
    for i, q in enumerate(grid):
        for j, p in enumerate(grid):
            if p > q:
                d = h[i] - h[j]
                assert d >= -1e-9
                assert d <= log_ratio_term(q) - log_ratio_term(p) + 1e-8


def test_log_ratio_term_continuity():
    assert log_ratio_term(1.0) == 1.0
    assert log_ratio_term(1 + 1e-9) == pytest.approx(1.0, abs=1e-8)


@given(seeds)
def test_convexity_probe(seed):
    f = sample_logconcave(seed, SamplerConfig(symmetric=bool(seed % 2)))
    probe = lp_mass_convexity_probe(f, np.linspace(0.2, 6.0, 30))
    assert np.all(probe.second_differences("log_mass") >= -1e-9)
    assert np.all(probe.second_differences("log_p_mass") <= 1e-9)


def test_convexity_probe_linear_cases():
    p = np.array([0.5, 1.0, 1.5, 2.0])
    u = lp_mass_convexity_probe(Uniform(1.0).to_piecewise(), p)
    assert np.allclose(u.log_mass, (1 - p) * math.log(2))
    e = lp_mass_convexity_probe(TwoSidedExponential(1.0).to_piecewise(tail_mass=1e-14), p)
    assert np.allclose(e.log_p_mass, (1 - p) * math.log(2), atol=1e-10)


def test_convexity_probe_rejects_bad_grid():
    with pytest.raises(ValueError):
        lp_mass_convexity_probe(Uniform(1.0).to_piecewise(), [1.0, 0.5])
