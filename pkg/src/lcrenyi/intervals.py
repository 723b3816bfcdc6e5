"""Closed intervals with exact rational endpoints.

Arithmetic is exact on the endpoints (``fractions.Fraction``), so every
composed expression evaluated on intervals encloses the true value.
``round_outward`` trades exactness for size by snapping endpoints outward
onto a dyadic grid; the enclosure property is preserved.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from numbers import Rational


def _q(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"exact rational expected, got {type(x).__name__}; "
                    "floats are rejected to keep enclosures honest")


class RationalInterval:
    __slots__ = ("lo", "hi")

    def __init__(self, lo, hi=None):
        lo = _q(lo)
        hi = lo if hi is None else _q(hi)
        if lo > hi:
            raise ValueError(f"empty interval [{lo}, {hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    def __setattr__(self, name, value):
        raise AttributeError("RationalInterval is immutable")

    @staticmethod
    def coerce(x) -> "RationalInterval":
        return x if isinstance(x, RationalInterval) else RationalInterval(x)

    def __repr__(self) -> str:
        return f"RationalInterval({self.lo}, {self.hi})"

    def __eq__(self, other):
        if not isinstance(other, RationalInterval):
            return NotImplemented
        return self.lo == other.lo and self.hi == other.hi

    def __hash__(self):
        return hash((self.lo, self.hi))

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def contains(self, x) -> bool:
        if isinstance(x, RationalInterval):
            return self.lo <= x.lo and x.hi <= self.hi
        x = _q(x)
        return self.lo <= x <= self.hi

    def sign(self) -> int | None:
        """+1 / -1 if the interval excludes zero, 0 for the point zero, None otherwise."""
        if self.lo > 0:
            return 1
        if self.hi < 0:
            return -1
        if self.lo == 0 == self.hi:
            return 0
        return None

    def __neg__(self):
        return RationalInterval(-self.hi, -self.lo)

    def __add__(self, other):
        o = RationalInterval.coerce(other)
        return RationalInterval(self.lo + o.lo, self.hi + o.hi)

    __radd__ = __add__

    def __sub__(self, other):
        o = RationalInterval.coerce(other)
        return RationalInterval(self.lo - o.hi, self.hi - o.lo)

    def __rsub__(self, other):
        return RationalInterval.coerce(other) - self

    def __mul__(self, other):
        o = RationalInterval.coerce(other)
        if o.lo == o.hi:
            c = o.lo
            return RationalInterval(self.lo * c, self.hi * c) if c >= 0 else \
                RationalInterval(self.hi * c, self.lo * c)
        if self.lo >= 0 and o.lo >= 0:
            return RationalInterval(self.lo * o.lo, self.hi * o.hi)
        p = (self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi)
        return RationalInterval(min(p), max(p))

    __rmul__ = __mul__

    def reciprocal(self):
        if self.lo <= 0 <= self.hi:
            raise ZeroDivisionError("interval contains zero")
        return RationalInterval(1 / self.hi, 1 / self.lo)

    def __truediv__(self, other):
        return self * RationalInterval.coerce(other).reciprocal()

    def __rtruediv__(self, other):
        return RationalInterval.coerce(other) * self.reciprocal()

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValueError("only nonnegative integer powers are supported")
        if n == 0:
            return RationalInterval(1)
        if self.lo >= 0:
            return RationalInterval(self.lo**n, self.hi**n)
        if self.hi <= 0:
            a, b = self.hi**n, self.lo**n
            return RationalInterval(a, b) if n % 2 == 0 else RationalInterval(-(-self.lo)**n, -(-self.hi)**n)
        m = max(-self.lo, self.hi) ** n
        return RationalInterval(0, m) if n % 2 == 0 else RationalInterval(self.lo**n, self.hi**n)

    def hull(self, other):
        o = RationalInterval.coerce(other)
        return RationalInterval(min(self.lo, o.lo), max(self.hi, o.hi))

    def round_outward(self, bits: int) -> "RationalInterval":
        """Snap endpoints outward to multiples of ``2**-bits``."""
        s = 1 << bits
        lo = Fraction((self.lo.numerator * s) // self.lo.denominator, s)
        hi = Fraction(-((-self.hi.numerator * s) // self.hi.denominator), s)
        return RationalInterval(lo, hi)

    def to_strings(self) -> dict:
        return {"lo": _frac_str(self.lo), "hi": _frac_str(self.hi)}

    def __float__(self):
        return float(self.mid)


def _frac_str(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


def frac_from_str(s: str) -> Fraction:
    return Fraction(s)


# -- certified logarithms --------------------------------------------------------------

def _atanh2_fixed(z: Fraction, prec: int) -> tuple[int, int]:
    """Integers ``lo, hi`` with ``lo <= 2**prec * 2*atanh(z) <= hi`` for ``|z| <= 1/3``."""
    scale = 1 << prec
    z2 = z * z
    term = z
    lo = hi = 0
    j = 0
    while True:
        t = term / (2 * j + 1)
        num = t.numerator * scale
        lo += num // t.denominator
        hi += -((-num) // t.denominator)
        j += 1
        term = term * z2
        tail = abs(term) / ((2 * j + 1) * (1 - z2))
        if tail * scale < 1:
            break
    # tail of the series is bounded by ``tail`` in absolute value
    lo -= 1
    hi += 1
    return 2 * lo, 2 * hi


@lru_cache(maxsize=64)
def _log2_fixed(prec: int) -> tuple[int, int]:
    return _atanh2_fixed(Fraction(1, 3), prec)


def log_enclosure(x, prec: int = 128) -> RationalInterval:
    """Rational interval of width about ``2**-prec`` containing ``log(x)``."""
    x = _q(x)
    if x <= 0:
        raise ValueError("log of a nonpositive number")
    k = x.numerator.bit_length() - x.denominator.bit_length()
    y = x / (Fraction(2) ** k) if k >= 0 else x * (1 << -k)
    z = (y - 1) / (y + 1)
    zl, zh = _atanh2_fixed(z, prec)
    l2l, l2h = _log2_fixed(prec)
    if k >= 0:
        lo, hi = zl + k * l2l, zh + k * l2h
    else:
        lo, hi = zl + k * l2h, zh + k * l2l
    s = 1 << prec
    return RationalInterval(Fraction(lo, s), Fraction(hi, s))
