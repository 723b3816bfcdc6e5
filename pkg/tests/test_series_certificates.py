import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from lcrenyi.bounds import alpha_star
from lcrenyi.certificates import (NEGATIVE, NONNEGATIVE, PATTERN_D, PATTERN_E, POSITIVE, ZERO,
                                  SignPattern, certify_series, check_sign_pattern,
                                  final_bound_holds, sign_change_conclusion, single_sign_change,
                                  tail_bound_part_d, tail_bound_part_e)
from lcrenyi.intervals import RationalInterval
from lcrenyi.series import (AlphaPolynomial, AlphaSeries, ExpPoly, coefficients_part_d,
                            coefficients_part_e, log_derivative_numerator_float,
                            slope_difference_numerator_float)

small = st.fractions(min_value=-20, max_value=20, max_denominator=1000)
polys = st.lists(small, min_size=0, max_size=5).map(AlphaPolynomial)


@given(polys, polys, small)
def test_polynomial_ring_laws(p, q, x):
    assert (p + q)(x) == p(x) + q(x)
    assert (p * q)(x) == p(x) * q(x)
    assert (p - p).is_zero()
    assert (p**2)(x) == p(x) ** 2


@given(polys, st.fractions(min_value=0, max_value=3, max_denominator=100),
       st.fractions(min_value=0, max_value=1, max_denominator=100))
def test_interval_evaluation_encloses(p, lo, w):
    iv = RationalInterval(lo, lo + w)
    out = p.eval_interval(iv)
    for x in (iv.lo, iv.hi, iv.mid):
        assert out.contains(p(x))


def test_polynomial_zero_trimmed():
    p = AlphaPolynomial([0, 0, 0])
    assert p.is_zero() and p.degree == -1
    assert AlphaPolynomial([1, 2, 0]).degree == 1


def test_exp_poly_coefficients_match_series_products():
    """Fast exp-polynomial coefficients against truncated products of exp series."""
    order = 12
    al = AlphaPolynomial.alpha()
    b = AlphaSeries.polynomial_in_b([0, 1], order)
    one = AlphaSeries.polynomial_in_b([1], order)
    eb = AlphaSeries.exp(1, 0, order)
    ea = AlphaSeries.exp(0, 1, order)
    c = lambda p: AlphaSeries.polynomial_in_b([p], order)
    quad = b * b + c(2) * b - c(2) * eb + c(2)
    slow = (c(2 * al) * quad * (eb - one) + c(1 - 3 * al) * (ea - one) * quad
            + b * b * c(1 - al) * (eb - one) * (ea - one))
    fast = coefficients_part_e(order)
    for n in range(order + 1):
        assert fast[n] == slow[n]


def test_exp_poly_term_coefficient():
    # b^2 e^{(1+alpha) b}: n-th coefficient is (1+alpha)^(n-2) / (n-2)!
    t = ExpPoly.term(j=2, k=1, m=1)
    for n in range(2, 8):
        expect = (AlphaPolynomial([1, 1]) ** (n - 2)) * Fraction(1, math.factorial(n - 2))
        assert t.coefficient(n) == expect
    assert t.coefficient(1).is_zero()


@pytest.mark.parametrize("alpha", [1.1, 1.2411, 2.0])
def test_series_matches_direct_evaluation(alpha):
    b = 0.1
    se = coefficients_part_e(40)
    sd = coefficients_part_d(40)
    assert se.eval_float(b, alpha) == pytest.approx(log_derivative_numerator_float(b, alpha),
                                                    rel=1e-9, abs=1e-12)
    assert sd.eval_float(b, alpha) == pytest.approx(slope_difference_numerator_float(b, alpha),
                                                    rel=1e-9, abs=1e-12)


def test_low_order_float_cross_validation():
    # finite-difference-free check: compare Taylor sums to the direct formula at several b
    se = coefficients_part_e(30)
    for b in (0.05, 0.2, 0.5):
        assert se.eval_float(b, 1.2411) == pytest.approx(log_derivative_numerator_float(b, 1.2411),
                                                         rel=1e-9, abs=1e-14)


def test_sign_pattern_validation():
    with pytest.raises(ValueError):
        SignPattern.of((0, 4, ZERO), (3, 7, POSITIVE))
    with pytest.raises(ValueError):
        SignPattern.of((0, 4, "sideways"))
    assert PATTERN_E.expected(6) == POSITIVE and PATTERN_E.expected(20) is None


def test_part_e_pattern_certified():
    rep = check_sign_pattern(coefficients_part_e(16), alpha_star(Fraction(1, 10**30)), PATTERN_E)
    assert rep.certified
    assert [(b["from"], b["to"], b["sign"]) for b in rep.blocks()] == [
        (0, 4, ZERO), (5, 7, POSITIVE), (8, 16, NEGATIVE)]


def test_part_d_pattern_certified():
    rep = check_sign_pattern(coefficients_part_d(30), alpha_star(Fraction(1, 10**30)), PATTERN_D)
    assert rep.certified, (rep.indeterminate, rep.violations)


def test_wide_enclosure_is_indeterminate():
    rep = check_sign_pattern(coefficients_part_e(16), RationalInterval(1, 2), PATTERN_E)
    assert not rep.certified
    assert rep.indeterminate
    assert min(rep.indeterminate) >= 5


def test_pattern_longer_than_series_rejected():
    with pytest.raises(ValueError):
        check_sign_pattern(coefficients_part_e(10), alpha_star(Fraction(1, 10**30)), PATTERN_E)


def test_tail_reports_close():
    enc = alpha_star(Fraction(1, 10**30))
    e = tail_bound_part_e((17, 80), enc)
    assert e.passed and e.closed_for_all_n
    d = tail_bound_part_d((30, 80), enc)
    assert d.passed and d.closed_for_all_n
    # the (a+3)/(2a+1) ratio does not hold at the start of the range
    assert d.failing("aux2_narrow_ratio")[:1] == [30]


def test_final_bound_threshold():
    assert not final_bound_holds(20)
    assert not final_bound_holds(29)
    assert final_bound_holds(30)


def test_single_sign_change():
    assert single_sign_change([ZERO, POSITIVE, NEGATIVE])
    assert single_sign_change([NONNEGATIVE, NEGATIVE])
    assert not single_sign_change([POSITIVE, NEGATIVE, POSITIVE])
    assert not single_sign_change([NEGATIVE, POSITIVE])
    assert not single_sign_change([POSITIVE, POSITIVE])


def test_conclusion_rejects_bad_patterns():
    enc = alpha_star(Fraction(1, 10**30))
    bad = check_sign_pattern(coefficients_part_e(16), RationalInterval(1, 2), PATTERN_E)
    with pytest.raises(ValueError):
        sign_change_conclusion(bad, {"left": 0.0, "right_limit": 0.0})
    good = check_sign_pattern(coefficients_part_e(16), enc, PATTERN_E)
    with pytest.raises(ValueError):
        sign_change_conclusion(good, {"left": 0.0})
    assert sign_change_conclusion(good, {"left": 0.0, "right_limit": 0.0})
    assert not sign_change_conclusion(good, {"left": -1.0, "right_limit": 0.0})


def test_tighter_enclosure_keeps_certificate():
    series = coefficients_part_e(16)
    for w in (30, 45, 60):
        assert check_sign_pattern(series, alpha_star(Fraction(1, 10**w)), PATTERN_E).certified


@pytest.mark.slow
@pytest.mark.parametrize("part", ["d", "e"])
def test_full_certificate(part):
    cert = certify_series(part, nmax=200)
    assert cert.passed
    assert cert.conclusion
    d = cert.to_dict(entries=False)
    assert d["pass"] and d["tail_bound"]["closed_for_all_n"]


def test_certificate_negative_control():
    cert = certify_series("e", nmax=40, alpha=RationalInterval(1, 2))
    assert not cert.passed
    with pytest.raises(ValueError):
        certify_series("a")
    with pytest.raises(ValueError):
        certify_series("d", nmax=20)
