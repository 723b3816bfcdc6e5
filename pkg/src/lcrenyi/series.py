"""Exact power series in ``b`` whose coefficients are rational polynomials in ``alpha``.

Two representations are provided.  ``AlphaSeries`` is a truncated list of
``AlphaPolynomial`` coefficients with ring operations and the exponential
generators.  ``ExpPoly`` holds finite sums ``c(alpha) * b**j * exp((k + m*alpha) b)``
and yields any single Taylor coefficient in closed form, which is what makes
order-200 certificates cheap.  Both agree coefficient by coefficient.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Sequence

from .intervals import RationalInterval


def _trim(c: list) -> tuple:
    while c and c[-1] == 0:
        c.pop()
    return tuple(c)


class AlphaPolynomial:
    """Polynomial ``sum q_k alpha**k`` with exact rational coefficients."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable = ()):
        object.__setattr__(self, "coeffs", _trim([Fraction(c) for c in coeffs]))

    def __setattr__(self, name, value):
        raise AttributeError("AlphaPolynomial is immutable")

    @classmethod
    def constant(cls, c) -> "AlphaPolynomial":
        return cls([c])

    @classmethod
    def alpha(cls) -> "AlphaPolynomial":
        return cls([0, 1])

    @classmethod
    def coerce(cls, x) -> "AlphaPolynomial":
        return x if isinstance(x, AlphaPolynomial) else cls([x])

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def __repr__(self) -> str:
        return f"AlphaPolynomial({[str(c) for c in self.coeffs]})"

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = AlphaPolynomial([other])
        if not isinstance(other, AlphaPolynomial):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __neg__(self):
        return AlphaPolynomial([-c for c in self.coeffs])

    def __add__(self, other):
        o = AlphaPolynomial.coerce(other).coeffs
        s = self.coeffs
        n = max(len(s), len(o))
        return AlphaPolynomial([(s[i] if i < len(s) else 0) + (o[i] if i < len(o) else 0)
                                for i in range(n)])

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-AlphaPolynomial.coerce(other))

    def __rsub__(self, other):
        return AlphaPolynomial.coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return AlphaPolynomial([c * other for c in self.coeffs])
        if not isinstance(other, AlphaPolynomial):
            return NotImplemented
        s, o = self.coeffs, other.coeffs
        if not s or not o:
            return AlphaPolynomial()
        out = [Fraction(0)] * (len(s) + len(o) - 1)
        for i, x in enumerate(s):
            if x:
                for j, y in enumerate(o):
                    out[i + j] += x * y
        return AlphaPolynomial(out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        out = AlphaPolynomial([1])
        for _ in range(n):
            out = out * self
        return out

    def __call__(self, x):
        if isinstance(x, RationalInterval):
            return self.eval_interval(x)
        if isinstance(x, float):
            return self.eval_float(x)
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def eval_float(self, x: float) -> float:
        acc = 0.0
        for c in reversed(self.coeffs):
            acc = acc * x + float(c)
        return acc

    def eval_interval(self, x: RationalInterval) -> RationalInterval:
        """Outward-exact enclosure of the range over ``x``.

        For ``x >= 0`` the positive and negative coefficient parts are each
        monotone, which gives a much tighter range than interval Horner.
        """
        if not self.coeffs:
            return RationalInterval(0)
        if x.lo >= 0:
            pos = AlphaPolynomial([c if c > 0 else 0 for c in self.coeffs])
            neg = AlphaPolynomial([-c if c < 0 else 0 for c in self.coeffs])
            return RationalInterval(pos(x.lo) - neg(x.hi), pos(x.hi) - neg(x.lo))
        acc = RationalInterval(0)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def to_strings(self) -> list[str]:
        return [f"{c.numerator}/{c.denominator}" for c in self.coeffs]


# -- integer polynomial helpers (coefficient lists, constant term first) ---------------

def _ipoly_mul(p: Sequence[int], q: Sequence[int]) -> list[int]:
    if not p or not q:
        return []
    out = [0] * (len(p) + len(q) - 1)
    for i, x in enumerate(p):
        if x:
            for j, y in enumerate(q):
                out[i + j] += x * y
    return out


def _ipoly_add_into(acc: list[int], p: Sequence[int], scale: int = 1) -> None:
    if len(acc) < len(p):
        acc.extend([0] * (len(p) - len(acc)))
    for i, x in enumerate(p):
        acc[i] += scale * x


class ExpPoly:
    """Finite sum of ``c(alpha) * b**j * exp((k + m*alpha) * b)`` with integer ``k, m``.

    Keys are ``(j, k, m)``; values are integer coefficient lists in alpha.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: dict | None = None):
        self.terms: dict[tuple[int, int, int], list[int]] = {}
        for key, c in (terms or {}).items():
            self._add(key, c)

    def _add(self, key, c) -> None:
        acc = list(self.terms.get(key, []))
        _ipoly_add_into(acc, c)
        while acc and acc[-1] == 0:
            acc.pop()
        if acc:
            self.terms[key] = acc
        else:
            self.terms.pop(key, None)

    @classmethod
    def term(cls, j=0, k=0, m=0, coeff=(1,)) -> "ExpPoly":
        return cls({(j, k, m): list(coeff)})

    @classmethod
    def const(cls, coeff=(1,)) -> "ExpPoly":
        return cls.term(0, 0, 0, coeff)

    def __add__(self, other):
        out = ExpPoly(self.terms)
        for key, c in other.terms.items():
            out._add(key, c)
        return out

    def __neg__(self):
        return ExpPoly({k: [-x for x in c] for k, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, int):
            return ExpPoly({k: [x * other for x in c] for k, c in self.terms.items()})
        out = ExpPoly()
        for (j1, k1, m1), c1 in self.terms.items():
            for (j2, k2, m2), c2 in other.terms.items():
                out._add((j1 + j2, k1 + k2, m1 + m2), _ipoly_mul(c1, c2))
        return out

    __rmul__ = __mul__

    def scaled_coefficient(self, n: int, _powers: dict | None = None) -> list[int]:
        """Integer polynomial equal to ``n!`` times the coefficient of ``b**n``.

        ``b**j exp(lam b)`` contributes ``lam**(n-j) / (n-j)!`` to that coefficient.
        """
        powers = _powers if _powers is not None else {}
        acc: list[int] = []
        for (j, k, m), c in self.terms.items():
            if j > n:
                continue
            e = n - j
            lam_pow = _lambda_power(k, m, e, powers)
            _ipoly_add_into(acc, _ipoly_mul(c, lam_pow), math.perm(n, j))
        while acc and acc[-1] == 0:
            acc.pop()
        return acc

    def coefficient(self, n: int, _powers: dict | None = None) -> AlphaPolynomial:
        f = math.factorial(n)
        return AlphaPolynomial(Fraction(x, f) for x in self.scaled_coefficient(n, _powers))

    def to_series(self, order: int) -> "AlphaSeries":
        powers: dict = {}
        return AlphaSeries([self.coefficient(n, powers) for n in range(order + 1)])

    def eval_float(self, b: float, alpha: float) -> float:
        s = 0.0
        for (j, k, m), c in self.terms.items():
            cv = sum(float(x) * alpha**i for i, x in enumerate(c))
            s += cv * b**j * math.exp((k + m * alpha) * b)
        return s


def _lambda_power(k: int, m: int, e: int, cache: dict) -> list[int]:
    """Coefficient list of ``(k + m*alpha)**e``, memoised per ``(k, m)``."""
    seq = cache.setdefault((k, m), [[1]])
    while len(seq) <= e:
        seq.append(_ipoly_mul(seq[-1], [k, m]) if (k or m) else [])
    return seq[e]


class AlphaSeries:
    """Truncated power series in ``b`` with ``AlphaPolynomial`` coefficients (orders 0..N)."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Sequence[AlphaPolynomial]):
        self.coeffs = [AlphaPolynomial.coerce(c) for c in coeffs]

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def __getitem__(self, n: int) -> AlphaPolynomial:
        return self.coeffs[n]

    def __len__(self) -> int:
        return len(self.coeffs)

    def __eq__(self, other):
        return isinstance(other, AlphaSeries) and self.coeffs == other.coeffs

    def _align(self, other: "AlphaSeries") -> int:
        return min(self.order, other.order)

    def __add__(self, other):
        n = self._align(other)
        return AlphaSeries([self[i] + other[i] for i in range(n + 1)])

    def __neg__(self):
        return AlphaSeries([-c for c in self.coeffs])

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, AlphaPolynomial)):
            return AlphaSeries([c * other for c in self.coeffs])
        n = self._align(other)
        out = []
        for k in range(n + 1):
            acc = AlphaPolynomial()
            for i in range(k + 1):
                if self[i].coeffs and other[k - i].coeffs:
                    acc = acc + self[i] * other[k - i]
            out.append(acc)
        return AlphaSeries(out)

    __rmul__ = __mul__

    # generators
    @classmethod
    def polynomial_in_b(cls, coeffs: Sequence, order: int) -> "AlphaSeries":
        c = [AlphaPolynomial.coerce(x) for x in coeffs][: order + 1]
        return cls(c + [AlphaPolynomial()] * (order + 1 - len(c)))

    @classmethod
    def exp(cls, k: int, m: int, order: int) -> "AlphaSeries":
        """``exp((k + m*alpha) b)``; e.g. ``exp(0, 1)`` has coefficients ``alpha**n / n!``."""
        lam = AlphaPolynomial([k, m])
        out, p = [], AlphaPolynomial([1])
        for n in range(order + 1):
            out.append(p * Fraction(1, math.factorial(n)))
            p = p * lam
        return cls(out)

    def eval_float(self, b: float, alpha: float) -> float:
        return sum(c.eval_float(alpha) * b**n for n, c in enumerate(self.coeffs))


# -- the two certificate expressions ---------------------------------------------------

def _building_blocks():
    one = ExpPoly.const()
    b = ExpPoly.term(j=1)
    eb = ExpPoly.term(k=1)
    ea = ExpPoly.term(m=1)
    al = ExpPoly.const((0, 1))
    return one, b, eb, ea, al


def log_derivative_numerator() -> ExpPoly:
    """Numerator of the log-derivative for the zero-b inequality, denominators cleared:

    ``2a(b^2+2b-2e^b+2)(e^b-1) + (1-3a)(e^{ab}-1)(b^2+2b-2e^b+2) + b^2(1-a)(e^b-1)(e^{ab}-1)``.
    """
    one, b, eb, ea, al = _building_blocks()
    quad = b * b + 2 * b - 2 * eb + 2 * one
    return (2 * al * quad * (eb - one)
            + (one - 3 * al) * (ea - one) * quad
            + b * b * (one - al) * (eb - one) * (ea - one))


def slope_difference_numerator() -> ExpPoly:
    """Numerator of the log-derivative difference for the slope-at-zero inequality.

    ``[-(e^b-1)(e^b-1-b)(a+1)a + 2(e^b-1-b)a(e^{ab}-1) - b(e^b-1)(a-1)(e^{ab}-1)]
    * (e^b(1-3a) + 2a e^{ab} + (a-1) e^{(a+1)b})
    + a(a-1)(e^b-1)(e^b-1-b)(e^{ab}-1)(e^b(3a-1) - 2e^{ab})``.
    """
    one, b, eb, ea, al = _building_blocks()
    em1 = eb - one
    em1b = eb - one - b
    eam1 = ea - one
    bracket = (-(em1 * em1b * (al + one) * al)
               + 2 * em1b * al * eam1
               - b * em1 * (al - one) * eam1)
    weight = eb * (one - 3 * al) + 2 * al * ea + (al - one) * eb * ea
    return (bracket * weight
            + al * (al - one) * em1 * em1b * eam1 * (eb * (3 * al - one) - 2 * ea))


def coefficients_part_e(order: int) -> AlphaSeries:
    if order < 8:
        raise ValueError("order must be at least 8")
    return log_derivative_numerator().to_series(order)


def coefficients_part_d(order: int) -> AlphaSeries:
    if order < 30:
        raise ValueError("order must be at least 30")
    return slope_difference_numerator().to_series(order)


def log_derivative_numerator_float(b: float, alpha: float) -> float:
    """Direct double-precision evaluation of the part-(e) numerator (transcription oracle)."""
    eb, ea = math.exp(b), math.exp(alpha * b)
    quad = b * b + 2 * b - 2 * eb + 2
    return (2 * alpha * quad * (eb - 1) + (1 - 3 * alpha) * (ea - 1) * quad
            + b * b * (1 - alpha) * (eb - 1) * (ea - 1))


def slope_difference_numerator_float(b: float, alpha: float) -> float:
    eb, ea = math.exp(b), math.exp(alpha * b)
    bracket = (-(eb - 1) * (eb - 1 - b) * (alpha + 1) * alpha
               + 2 * (eb - 1 - b) * alpha * (ea - 1)
               - b * (eb - 1) * (alpha - 1) * (ea - 1))
    weight = eb * (1 - 3 * alpha) + 2 * alpha * ea + (alpha - 1) * eb * ea
    return (bracket * weight
            + alpha * (alpha - 1) * (eb - 1) * (eb - 1 - b) * (ea - 1) * (eb * (3 * alpha - 1) - 2 * ea))
