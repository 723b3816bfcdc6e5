"""The threshold order alpha*, variance lower bounds and their slack."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .density import PiecewiseLogLinearDensity
from .entropy import log_ratio_term, renyi_entropy
from .intervals import RationalInterval, log_enclosure

SYMMETRIC = "symmetric"
GENERAL = "general"

HALF_LOG_12 = 0.5 * math.log(12.0)
HALF_LOG_2 = 0.5 * math.log(2.0)

SIZE_BUDGET_BITS = 10**6
BRACKET = (Fraction(6, 5), Fraction(13, 10))


class BudgetExceeded(RuntimeError):
    """An exact computation would need integers larger than the configured budget."""


def exact_power_sign(r: Fraction, budget_bits: int = SIZE_BUDGET_BITS) -> int:
    """Sign of ``2 log r - (r - 1) log 6`` for rational ``r = p/q > 1``.

    Raising both sides of ``r**2`` vs ``6**(r-1)`` to the power ``q`` gives
    the integer comparison ``p**(2q)`` vs ``6**(p-q) * q**(2q)``.
    """
    p, q = r.numerator, r.denominator
    if p <= q:
        raise ValueError("exact sign test needs r > 1")
    cost = 2 * q * max(p.bit_length(), 3 * (p - q).bit_length())
    if cost > budget_bits:
        raise BudgetExceeded(f"integer powers of ~{cost} bits exceed budget {budget_bits}")
    lhs = p ** (2 * q)
    rhs = 6 ** (p - q) * q ** (2 * q)
    return (lhs > rhs) - (lhs < rhs)


@lru_cache(maxsize=16)
def _log6(prec: int) -> RationalInterval:
    return log_enclosure(6, prec)


def threshold_function_enclosure(r: Fraction, prec: int) -> RationalInterval:
    """Enclosure of ``2 log r - (r - 1) log 6``."""
    return 2 * log_enclosure(r, prec) - (r - 1) * _log6(prec)


def threshold_sign(r: Fraction, budget_bits: int = SIZE_BUDGET_BITS) -> int:
    """Certified sign of ``2 log r - (r - 1) log 6``; positive below alpha*, negative above."""
    try:
        return exact_power_sign(r, budget_bits)
    except BudgetExceeded:
        pass
    prec = 64 + 2 * r.denominator.bit_length()
    while prec <= budget_bits:
        s = threshold_function_enclosure(r, prec).sign()
        if s:
            return s
        prec *= 2
    raise BudgetExceeded(f"sign of the threshold function at {r} not resolved within "
                         f"{budget_bits} bits")


@lru_cache(maxsize=32)
def alpha_star(width_bound=Fraction(1, 10**30),
               budget_bits: int = SIZE_BUDGET_BITS) -> RationalInterval:
    """Rational enclosure of alpha*, the root > 1 of ``2 log a = (a - 1) log 6``.

    Exact bisection from the bracket ``[6/5, 13/10]``; each step's sign is
    certified (exact integer powers while they are small, rigorous
    logarithm enclosures afterwards).
    """
    w = Fraction(width_bound) if not isinstance(width_bound, float) else Fraction(str(width_bound))
    if w <= 0:
        raise ValueError("width bound must be positive")
    needed = (w.denominator.bit_length() - w.numerator.bit_length()) + 8
    if needed > budget_bits:
        raise BudgetExceeded(f"width 2^-{needed - 8} needs ~{needed} bits, budget {budget_bits}")
    lo, hi = BRACKET
    if threshold_sign(lo, budget_bits) <= 0 or threshold_sign(hi, budget_bits) >= 0:
        raise AssertionError("alpha* bracket lost its sign change")
    while hi - lo > w:
        mid = (lo + hi) / 2
        if threshold_sign(mid, budget_bits) > 0:
            lo = mid
        else:
            hi = mid
    return RationalInterval(lo, hi)


def alpha_star_float() -> float:
    return float(alpha_star().mid)


def min_entropy_constant(alpha: float, regime: str = SYMMETRIC) -> float:
    """Constant ``c`` in ``h_alpha >= 0.5 log var + c``."""
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    if regime == SYMMETRIC:
        return min(HALF_LOG_12, HALF_LOG_2 + log_ratio_term(alpha))
    if regime == GENERAL:
        if alpha < 2:
            raise ValueError("the general (non-symmetric) bound is only available for alpha >= 2")
        return log_ratio_term(alpha)
    raise ValueError(f"unknown regime {regime!r}")


@dataclass(frozen=True)
class BoundSpec:
    regime: str
    alpha: float
    constant: float

    @classmethod
    def of(cls, alpha: float, regime: str = SYMMETRIC) -> "BoundSpec":
        return cls(regime, alpha, min_entropy_constant(alpha, regime))

    @property
    def branch(self) -> str:
        """Which extremizer is active: ``uniform`` or ``exponential``."""
        if self.regime == GENERAL:
            return "one_sided_exponential"
        return "uniform" if self.constant == HALF_LOG_12 else "two_sided_exponential"

    def value(self, variance: float) -> float:
        return 0.5 * math.log(variance) + self.constant


def theorem_slack(f: PiecewiseLogLinearDensity, alpha: float, regime: str = SYMMETRIC) -> float:
    """``h_alpha(f) - 0.5 log var(f) - constant``; the bound claims this is >= 0."""
    if regime == SYMMETRIC and not f.symmetric:
        raise ValueError("symmetric regime requires a symmetric density")
    c = min_entropy_constant(alpha, regime)
    return renyi_entropy(f, alpha) - 0.5 * math.log(f.variance()) - c
