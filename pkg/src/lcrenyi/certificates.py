"""Exact sign-pattern and tail-bound certificates for the two boundary inequalities.

Everything here is exact: coefficient polynomials are evaluated on a rational
enclosure of alpha*, and tail bounds are compared with rational constants.
Claims about all ``n`` beyond the checked prefix are closed by an induction
step whose hypothesis is itself checked exactly at the first index.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .bounds import alpha_star
from .intervals import RationalInterval
from .series import AlphaPolynomial, AlphaSeries, coefficients_part_d, coefficients_part_e

ZERO, POSITIVE, NEGATIVE, NONNEGATIVE = "zero", "positive", "negative", "nonnegative"
_SIGNS = (ZERO, POSITIVE, NEGATIVE, NONNEGATIVE)

DEFAULT_WIDTH = Fraction(1, 10**30)
REFINED_WIDTH = Fraction(1, 10**60)


@dataclass(frozen=True)
class SignPattern:
    """Ordered, disjoint inclusive index ranges with the sign expected on each."""

    blocks: tuple[tuple[int, int, str], ...]

    def __post_init__(self):
        prev = -1
        for lo, hi, s in self.blocks:
            if s not in _SIGNS:
                raise ValueError(f"unknown sign {s!r}")
            if lo > hi or lo <= prev:
                raise ValueError("sign-pattern ranges must be ordered and disjoint")
            prev = hi

    @classmethod
    def of(cls, *blocks) -> "SignPattern":
        return cls(tuple((int(a), int(b), s) for a, b, s in blocks))

    @property
    def last(self) -> int:
        return self.blocks[-1][1]

    def expected(self, n: int) -> str | None:
        for lo, hi, s in self.blocks:
            if lo <= n <= hi:
                return s
        return None

    def to_list(self) -> list[dict]:
        return [{"from": lo, "to": hi, "sign": s} for lo, hi, s in self.blocks]


PATTERN_E = SignPattern.of((0, 4, ZERO), (5, 7, POSITIVE), (8, 16, NEGATIVE))
PATTERN_D = SignPattern.of((0, 9, NONNEGATIVE), (10, 29, NEGATIVE))


@dataclass
class CoefficientEntry:
    n: int
    expected: str
    observed: str
    certified: bool
    interval: RationalInterval | None

    def to_dict(self) -> dict:
        d = {"n": self.n, "expected": self.expected, "observed": self.observed,
             "certified": self.certified}
        if self.interval is not None:
            d["interval"] = self.interval.to_strings()
        return d


@dataclass
class PatternReport:
    pattern: SignPattern
    enclosure: RationalInterval
    entries: list[CoefficientEntry] = field(default_factory=list)

    @property
    def indeterminate(self) -> list[int]:
        return [e.n for e in self.entries if e.observed == "indeterminate"]

    @property
    def violations(self) -> list[int]:
        return [e.n for e in self.entries if not e.certified and e.observed != "indeterminate"]

    @property
    def certified(self) -> bool:
        return bool(self.entries) and all(e.certified for e in self.entries)

    def blocks(self) -> list[dict]:
        """Maximal runs of equal observed sign, e.g. ``{0-4 zero, 5-7 +, 8-16 -}``."""
        out: list[dict] = []
        for e in self.entries:
            if out and out[-1]["sign"] == e.observed and out[-1]["to"] == e.n - 1:
                out[-1]["to"] = e.n
            else:
                out.append({"from": e.n, "to": e.n, "sign": e.observed})
        return out

    def to_dict(self, entries: bool = True) -> dict:
        d = {"pattern": self.pattern.to_list(), "enclosure": self.enclosure.to_strings(),
             "certified": self.certified, "indeterminate": self.indeterminate,
             "violations": self.violations, "observed_blocks": self.blocks()}
        if entries:
            d["coefficients"] = [e.to_dict() for e in self.entries]
        return d


def _observe(poly, enc: RationalInterval) -> tuple[str, RationalInterval | None]:
    if poly.is_zero():
        return ZERO, None
    iv = poly.eval_interval(enc)
    if iv.lo > 0:
        return POSITIVE, iv
    if iv.hi < 0:
        return NEGATIVE, iv
    if iv.lo == 0 == iv.hi:
        return "zero_at_enclosure", iv
    return "indeterminate", iv


def _accepts(expected: str, observed: str, iv: RationalInterval | None) -> bool:
    if expected == ZERO:
        return observed == ZERO
    if expected == POSITIVE:
        return observed == POSITIVE
    if expected == NEGATIVE:
        return observed == NEGATIVE
    # nonnegative: exact zero polynomial or an enclosure with lo >= 0
    return observed in (ZERO, POSITIVE) or (iv is not None and iv.lo >= 0)


def check_sign_pattern(series: AlphaSeries, enclosure: RationalInterval,
                       pattern: SignPattern) -> PatternReport:
    """Evaluate every coefficient named by ``pattern`` on ``enclosure``.

    ``zero`` demands the zero polynomial; interval evaluation can never certify it.
    """
    if pattern.last > series.order:
        raise ValueError(f"pattern reaches order {pattern.last} beyond series order {series.order}")
    rep = PatternReport(pattern, enclosure)
    for lo, hi, s in pattern.blocks:
        for n in range(lo, hi + 1):
            obs, iv = _observe(series[n], enclosure)
            rep.entries.append(CoefficientEntry(n, s, obs, _accepts(s, obs, iv), iv))
    return rep


# -- tail bounds -----------------------------------------------------------------------

@dataclass
class TailEntry:
    n: int
    checks: dict[str, bool]

    @property
    def passed(self) -> bool:
        return all(self.checks.values())


@dataclass
class TailReport:
    name: str
    n_range: tuple[int, int]
    entries: list[TailEntry]
    constants: dict[str, bool]
    induction: dict[str, bool]
    notes: dict = field(default_factory=dict)
    required: tuple[str, ...] = ()

    def failing(self, key: str | None = None) -> list[int]:
        keys = [key] if key else list(self.required)
        return [e.n for e in self.entries if not all(e.checks[k] for k in keys)]

    @property
    def passed(self) -> bool:
        return (not self.failing() and all(self.constants.values())
                and all(self.induction.values()))

    @property
    def closed_for_all_n(self) -> bool:
        """Finite prefix plus induction step: the claim holds for every ``n >= n_range[0]``."""
        return self.passed

    def to_dict(self) -> dict:
        keys = sorted({k for e in self.entries for k in e.checks})
        return {"name": self.name, "from": self.n_range[0], "to": self.n_range[1],
                "pass": self.passed, "closed_for_all_n": self.closed_for_all_n,
                "constants": self.constants, "induction": self.induction,
                "failing": {k: self.failing(k) for k in keys}, **self.notes}


def _interval_pow(x: RationalInterval, n: int) -> RationalInterval:
    return x**n


def tail_bound_part_e(n_range: tuple[int, int] = (17, 200),
                      enclosure: RationalInterval | None = None) -> TailReport:
    """Upper bound ``6(a+1)^n - n(n-1)/30 (a+1)^n + 8n^2 a^n < 0`` (times ``1/n!``).

    Auxiliary facts: ``n(n-1)/30 > 7``, ``(a+1)/a >= 8/5`` and ``(8/5)^n >= 8n^2``.
    """
    n0, n1 = n_range
    if n0 < 17:
        raise ValueError("the tail bound is claimed from n = 17 on")
    enc = enclosure or alpha_star(DEFAULT_WIDTH)
    a1 = enc + 1
    entries = []
    for n in range(n0, n1 + 1):
        bound = (6 - Fraction(n * (n - 1), 30)) * _interval_pow(a1, n) + 8 * n * n * _interval_pow(enc, n)
        entries.append(TailEntry(n, {
            "bound_negative": bound.hi < 0,
            "quadratic_exceeds_7": Fraction(n * (n - 1), 30) > 7,
            "power_dominates": Fraction(8, 5) ** n >= 8 * n * n,
        }))
    constants = {"ratio_at_least_8_5": ((enc + 1) / enc).lo >= Fraction(8, 5)}
    # (8/5)^(n+1)/(8/5)^n = 8/5 >= ((n+1)/n)^2 for all n >= n0 since the right side decreases
    induction = {"power_step": Fraction(8, 5) >= Fraction(n0 + 1, n0) ** 2,
                 "quadratic_monotone": True}
    return TailReport("part_e_tail", n_range, entries, constants, induction,
                      required=("bound_negative", "quadratic_exceeds_7", "power_dominates"))


AUX1_CONST = Fraction(104, 1000)
AUX2_CONST = Fraction(1, 100)
FINAL_CONST = Fraction(1114, 1000)


def tail_bound_part_d(n_range: tuple[int, int] = (30, 200),
                      enclosure: RationalInterval | None = None) -> TailReport:
    """Auxiliary inequalities and the final bound ``1.114(a+3)^n < (3n-2)/400 (2a+2)^n``.

    The second auxiliary inequality controls the ``(a+2)^n`` terms, so its ratio
    must be ``(a+3)/(a+2)``; the variant with ``(a+3)/(2a+1)`` is evaluated too and
    reported under ``aux2_narrow_ratio`` but not required.
    """
    n0, n1 = n_range
    if n0 < 30:
        raise ValueError("the tail bound is claimed from n = 30 on")
    enc = enclosure or alpha_star(DEFAULT_WIDTH)
    r1 = (enc + 3) / (2 * enc + 1)
    r2 = (enc + 3) / (enc + 2)
    rho = (2 * enc + 2) / (enc + 3)
    entries = []
    for n in range(n0, n1 + 1):
        lin1 = n + 8 + Fraction(3 * n, 200)
        lin2 = (1 + Fraction(3, 200)) * n
        p1 = r1**n
        entries.append(TailEntry(n, {
            "aux1": (AUX1_CONST * p1).lo > lin1,
            "aux2": (AUX2_CONST * r2**n).lo > lin2,
            "aux2_narrow_ratio": (AUX2_CONST * p1).lo > lin2,
            "final": (Fraction(3 * n - 2, 400) * rho**n).lo > FINAL_CONST,
            # the dropped k = n summand must be positive: (a+1)^n (3n-1)/200 > (n+8)a^n + n + 2^n
            "last_term_positive": (Fraction(3 * n - 1, 200) * (enc + 1)**n
                                   - (n + 8) * enc**n - n - 2**n).lo > 0,
        }))
    constants = {
        "tail_coefficient_le_1_200": ((enc - 1) * (25 - 20 * enc) / 10).hi <= Fraction(1, 200),
        "slope_coefficient_ge_3_200": (Fraction(4, 50) * (enc - 1)).lo >= Fraction(3, 200),
        "cubic_factor_le_1": (enc * (enc - 1) * (3 * enc - 1)).hi <= 1,
        "quadratic_factor_le_1": (2 * enc * (enc - 1)).hi <= 1 and (2 * (enc - 1)).hi <= 1,
        # coefficient (1-3a+2a^(n+1)+(a-1)(a+1)^n)/n! >= (1-3a+2a+a-1)/n!, which is identically 0
        "weight_coefficients_nonnegative": enc.lo > 1 and (
            AlphaPolynomial([1, -3]) + AlphaPolynomial([0, 2]) + AlphaPolynomial([-1, 1])).is_zero(),
    }
    # left sides grow by factor (lin(n+1)/lin(n)) which decreases in n; right sides by r
    step1 = Fraction(n0 + 1 + 8 + Fraction(3 * (n0 + 1), 200)) / (n0 + 8 + Fraction(3 * n0, 200))
    step2 = Fraction(n0 + 1, n0)
    induction = {
        "aux1_step": r1.lo >= step1,
        "aux2_step": r2.lo >= step2,
        "final_step": rho.lo >= 1,
        # after dividing by (a+1)^n every left-side term shrinks and (3n-1)/200 grows
        "last_term_step": (Fraction(n0 + 9, n0 + 8) * enc / (enc + 1)).hi <= 1
                          and (2 / (enc + 1)).hi <= 1
                          and (Fraction(n0 + 1, n0) / (enc + 1)).hi <= 1,
    }
    narrow_fail = [e.n for e in entries if not e.checks["aux2_narrow_ratio"]]
    notes = {"aux2_narrow_ratio_failing_count": len(narrow_fail),
             "aux2_narrow_ratio_first_pass": next((e.n for e in entries if e.checks["aux2_narrow_ratio"]), None)}
    return TailReport("part_d_tail", n_range, entries, constants, induction, notes,
                      required=("aux1", "aux2", "final", "last_term_positive"))


def final_bound_holds(n: int, enclosure: RationalInterval | None = None) -> bool:
    """The part-(d) final inequality at a single ``n`` (any ``n``; it is only claimed for ``n >= 30``)."""
    enc = enclosure or alpha_star(DEFAULT_WIDTH)
    rho = (2 * enc + 2) / (enc + 3)
    return (Fraction(3 * n - 2, 400) * rho**n).lo > FINAL_CONST


# -- conclusion ------------------------------------------------------------------------

_SIGN_CLASS = {ZERO: 0, "zero_at_enclosure": 0, POSITIVE: 1, NONNEGATIVE: 1, NEGATIVE: -1}


def single_sign_change(signs: Sequence[str]) -> bool:
    """True iff the nonzero signs form a nonnegative block followed by a nonpositive block,
    with both present (so the series is not of one sign)."""
    classes = [_SIGN_CLASS[s] for s in signs if _SIGN_CLASS.get(s, None) not in (None, 0)]
    if any(s not in _SIGN_CLASS for s in signs):
        return False
    if not classes or classes[0] != 1 or classes[-1] != -1:
        return False
    switches = sum(1 for x, y in zip(classes, classes[1:]) if x != y)
    return switches == 1


def sign_change_conclusion(pattern_report: PatternReport, endpoint_data: dict,
                           tail: TailReport | None = None) -> bool:
    """Combine a certified pattern, a closed tail and the endpoint values.

    A series whose coefficients are first nonnegative and then nonpositive changes
    sign at most once on ``(0, inf)``; so the function it is the (scaled) derivative
    of increases and then decreases, and is nonnegative if it is nonnegative at both ends.
    """
    if not pattern_report.certified:
        raise ValueError("sign pattern is not certified")
    observed = [e.observed for e in pattern_report.entries]
    if tail is not None:
        if not tail.closed_for_all_n:
            return False
        observed = observed + [NEGATIVE]
    if not single_sign_change(observed):
        return False
    left = endpoint_data.get("left", None)
    right_limit = endpoint_data.get("right_limit", None)
    if left is None or right_limit is None:
        raise ValueError("endpoint data needs 'left' and 'right_limit'")
    return left >= 0 and right_limit >= 0


# -- one-call drivers (CLI) -------------------------------------------------------------

@dataclass
class SeriesCertificate:
    part: str
    nmax: int
    pattern: PatternReport
    direct_tail: PatternReport | None
    tail: TailReport
    refined: bool
    conclusion: bool
    duration_s: float

    @property
    def passed(self) -> bool:
        direct_ok = self.direct_tail is None or self.direct_tail.certified
        return self.pattern.certified and direct_ok and self.tail.passed and self.conclusion

    def to_dict(self, entries: bool = True) -> dict:
        return {"part": self.part, "nmax": self.nmax, "pass": self.passed,
                "refined_enclosure": self.refined,
                "pattern": self.pattern.to_dict(entries),
                "direct_tail": None if self.direct_tail is None else self.direct_tail.to_dict(entries),
                "tail_bound": self.tail.to_dict(), "conclusion": self.conclusion}


def certify_series(part: str, nmax: int = 200, width=DEFAULT_WIDTH,
                   alpha: RationalInterval | None = None, direct_tail: bool = True) -> SeriesCertificate:
    """Run the full exact certificate for ``part`` in ``{'d', 'e'}``.

    Indeterminate coefficients trigger one retry on a ``1e-60`` enclosure.
    ``alpha`` overrides the enclosure (used by negative controls).
    """
    from .gfunction import endpoint_data

    t0 = time.perf_counter()
    if part == "e":
        pattern, tail_start, build, tail_fn = PATTERN_E, 17, coefficients_part_e, tail_bound_part_e
    elif part == "d":
        pattern, tail_start, build, tail_fn = PATTERN_D, 30, coefficients_part_d, tail_bound_part_d
    else:
        raise ValueError("series certificates exist for parts d and e")
    if nmax < tail_start:
        raise ValueError(f"nmax must be at least {tail_start}")
    series = build(nmax)
    tail_pattern = SignPattern.of((tail_start, nmax, NEGATIVE))

    def run(enc):
        p = check_sign_pattern(series, enc, pattern)
        d = check_sign_pattern(series, enc, tail_pattern) if direct_tail else None
        return p, d

    enc = alpha or alpha_star(Fraction(width))
    rep, direct = run(enc)
    refined = False
    if alpha is None and (rep.indeterminate or (direct and direct.indeterminate)):
        enc = alpha_star(REFINED_WIDTH)
        rep, direct = run(enc)
        refined = True
    tail = tail_fn((tail_start, nmax), enc)
    try:
        conclusion = sign_change_conclusion(rep, endpoint_data(part, float(enc.mid)), tail)
    except ValueError:
        conclusion = False
    return SeriesCertificate(part, nmax, rep, direct, tail, refined, conclusion,
                             time.perf_counter() - t0)
