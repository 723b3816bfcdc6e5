"""The two-parameter function G(a, b, alpha) and its a-derivatives.

For the extremal density ``c`` on ``[-a, a]`` with unit-rate exponential
shoulders of length ``b``, the variance lower bound at ``alpha*`` is
equivalent to ``G(a, b, alpha*) >= 0``, with

    G = 2 B**(2/(1-alpha)) A**((1-3alpha)/(1-alpha)) - (a**3/3 + J(a, b)),
    A = 1 + a - exp(-b),  B = 1 + a*alpha - exp(-alpha*b),
    J = int_0^b (x + a)**2 exp(-x) dx.

The derivative expressions for k = 2, 3, 4 are the standard closed forms,
rewritten only by cancelling common exponential factors (ratios of
``A`` and ``B``) so that they stay finite for large ``a`` and ``b``.
Finite differences of ``g_eval`` cross-check every one of them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bounds import alpha_star, alpha_star_float
from .density import segment_moments
from .report import Check, VerificationReport


@dataclass(frozen=True)
class GPoint:
    a: float
    b: float
    alpha: float | None = None

    def __post_init__(self):
        if not (self.a >= 0 and self.b >= 0 and math.isfinite(self.a) and math.isfinite(self.b)):
            raise ValueError("a and b must be finite and nonnegative")
        if self.alpha is not None and (self.alpha <= 1):
            raise ValueError("alpha must exceed 1")

    @property
    def order(self) -> float:
        return alpha_star_float() if self.alpha is None else self.alpha


def _alpha(alpha):
    return alpha_star_float() if alpha is None else float(alpha)


def _AB(a, b, alpha):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    A = a - np.expm1(-b)
    B = a * alpha - np.expm1(-alpha * b)
    return a, b, A, B


def _J(a, b, k=0):
    """``int_0^b (x + a)**2 exp(-x) dx`` (k=0) and its a-derivative (k=1)."""
    i0 = segment_moments(1.0, b, 0)
    i1 = segment_moments(1.0, b, 1)
    if k == 1:
        return 2 * (a * i0 + i1)
    return a * a * i0 + 2 * a * i1 + segment_moments(1.0, b, 2)


def _power_term(A, B, alpha):
    """``2 B**(2/(1-alpha)) A**((1-3alpha)/(1-alpha))``."""
    p = 2.0 / (1.0 - alpha)
    q = (1.0 - 3.0 * alpha) / (1.0 - alpha)
    with np.errstate(divide="ignore", invalid="ignore"):
        return 2.0 * np.exp(p * np.log(B) + q * np.log(A))


def G(a, b, alpha=None):
    alpha = _alpha(alpha)
    a, b, A, B = _AB(a, b, alpha)
    return _power_term(A, B, alpha) - (a**3 / 3.0 + _J(a, b))


def dG(a, b, alpha=None, k: int = 1):
    """``d^k G / d a^k`` for k = 1..4 (vectorized over ``a``, ``b``)."""
    alpha = _alpha(alpha)
    a, b, A, B = _AB(a, b, alpha)
    al = alpha
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        if k == 1:
            p = 2.0 / (1.0 - al)
            q = (1.0 - 3.0 * al) / (1.0 - al)
            return _power_term(A, B, al) * (p * al / B + q / A) - a * a - _J(a, b, 1)
        if k == 2:
            rho = A / B
            s = (4 * al**2 * (al + 1) * rho ** (2 * al / (al - 1))
                 + 4 * al * (3 * al - 1) * rho ** (2 / (al - 1))
                 + 8 * al * (1 - 3 * al) * rho ** ((al + 1) / (al - 1)))
            return A * s / (al - 1) ** 2 - 2 * A
        if k == 3:
            r = B / A
            poly = ((al + 1) * (3 * al - 1) * r**3 - 2 * al**3 * (al + 1)
                    + 3 * al * (al + 1) * (3 * al - 1) * r
                    + 6 * al * (1 - 3 * al) * r**2)
            return -2.0 - 4 * al / (1 - al) ** 3 * r ** (-(3 * al - 1) / (al - 1)) * poly
        if k == 4:
            num = np.expm1(-al * b) - al * np.expm1(-b)
            ratio = num / ((al - 1) * A * B)
            return (8 * al * (al + 1) * (3 * al - 1)
                    * np.exp((3 * al - 1) / (al - 1) * np.log(A) + 2 / (1 - al) * np.log(B))
                    * ratio**4)
    raise ValueError("derivative order must be 1, 2, 3 or 4")


def g_eval(p: GPoint) -> float:
    return float(G(p.a, p.b, p.order))


def g_partial_a(p: GPoint, order: int) -> float:
    return float(dG(p.a, p.b, p.order, order))


def third_derivative_limit(alpha: float) -> float:
    """``lim_{a -> inf} d^3 G / d a^3 = -2 + 12 alpha^3 alpha^((1-3alpha)/(alpha-1))``."""
    return -2.0 + 12.0 * alpha**3 * alpha ** ((1 - 3 * alpha) / (alpha - 1))


def h_limit_functions(alpha=None, b=0.0) -> dict:
    """``h1(alpha)``, ``h2(b, alpha)`` and the simplified form of ``h2`` valid at alpha*.

    As ``a -> inf``: ``d^2 G/da^2 = h1/a + h2 + o(1/a)``.
    """
    al = _alpha(alpha)
    b = np.asarray(b, dtype=float)
    h1 = 12.0 * al ** (-2.0 / (al - 1)) - 2.0
    em_b = -np.expm1(-b)           # 1 - e^{-b}
    em_ab = -np.expm1(-al * b)     # 1 - e^{-alpha b}
    coef = 4 * al * (al ** (1 / (1 - al)) - al ** (al / (1 - al))) ** 2 / (al - 1) ** 3
    h2 = -2 * em_b + coef * (2 * (al * em_b - em_ab) + 3 * em_b * al * (al - 1))
    simplified = 4.0 / (3 * al * (al - 1)) * (em_b * al - em_ab)
    return {"h1": h1, "h2": h2, "h2_simplified": simplified}


# -- boundary inequalities at a = 0 ----------------------------------------------------

_SERIES_B = 1e-8


def zero_b_difference(b, alpha=None):
    """LHS - RHS of the ``a = 0`` inequality, equal to ``G(0, b) / 2``."""
    al = _alpha(alpha)
    b = np.asarray(b, dtype=float)
    p = 2.0 / (1.0 - al)
    q = (1.0 - 3.0 * al) / (1.0 - al)
    with np.errstate(divide="ignore", invalid="ignore"):
        lhs = np.exp(p * np.log(-np.expm1(-al * b)) + q * np.log(-np.expm1(-b)))
    rhs = 0.5 * segment_moments(1.0, b, 2)
    out = lhs - rhs
    if _at_threshold(al):
        out = np.where(b < _SERIES_B, b**4 / 24.0, out)
    return out


def zero_b_log_difference(b, alpha=None):
    """The logarithmic form of the same inequality (zero at both ends)."""
    al = _alpha(alpha)
    b = np.asarray(b, dtype=float)
    return (2 / (1 - al) * np.log(-np.expm1(-al * b))
            + (1 - 3 * al) / (1 - al) * np.log(-np.expm1(-b))
            - np.log(0.5 * segment_moments(1.0, b, 2)))


def slope_at_zero_sides(b, alpha=None):
    """The two sides ``(phi1, phi2)`` of the ``dG/da (0, b) >= 0`` inequality."""
    al = _alpha(alpha)
    b = np.asarray(b, dtype=float)
    em_b = -np.expm1(-b)
    em_ab = -np.expm1(-al * b)
    with np.errstate(divide="ignore", invalid="ignore"):
        phi1 = (np.exp(2 * al / (al - 1) * np.log(em_b) - (1 + al) / (al - 1) * np.log(em_ab))
                / (al - 1) * ((3 * al - 1) * em_ab - 2 * al * em_b))
    phi2 = segment_moments(1.0, b, 1)
    return phi1, phi2


def slope_at_zero_difference(b, alpha=None):
    """``phi1 - phi2``, equal to ``dG/da (0, b) / 2``."""
    al = _alpha(alpha)
    b = np.asarray(b, dtype=float)
    phi1, phi2 = slope_at_zero_sides(b, al)
    out = phi1 - phi2
    if _at_threshold(al):
        out = np.where(b < _SERIES_B, b**3 / 6.0, out)
    return out


def _at_threshold(al: float) -> bool:
    return abs(al - alpha_star_float()) < 1e-12


@dataclass
class BoundaryReport:
    b: np.ndarray
    zero_b: np.ndarray
    slope_at_zero: np.ndarray

    @property
    def min_zero_b(self) -> float:
        return float(np.min(self.zero_b))

    @property
    def min_slope_at_zero(self) -> float:
        return float(np.min(self.slope_at_zero))

    def argmin(self, which: str) -> float:
        return float(self.b[int(np.argmin(getattr(self, which)))])


def boundary_inequalities(b_grid, alpha=None) -> BoundaryReport:
    b = np.asarray(b_grid, dtype=float)
    if np.any(b <= 0):
        raise ValueError("b grid must be strictly positive")
    return BoundaryReport(b=b, zero_b=zero_b_difference(b, alpha),
                          slope_at_zero=slope_at_zero_difference(b, alpha))


# -- grid verification ----------------------------------------------------------------------

@dataclass(frozen=True)
class GGridConfig:
    a_max: float = 10.0
    b_max: float = 10.0
    step: float = 0.1
    large_a: float = 1e4
    decay_a: float = 1e5
    alpha: float | None = None
    # tolerances (absolute unless stated)
    tol_fourth: float = 0.0
    tol_third_limit: float = 1e-3
    tol_second_limit: float = 1e-6
    tol_boundary: float = 1e-9
    tol_chain_rel: float = 1e-9
    boundary_b: tuple = field(default=(1e-3, 1e2, 400))

    def grid(self):
        na = int(round(self.a_max / self.step)) + 1
        nb = int(round(self.b_max / self.step)) + 1
        a = np.linspace(0.0, self.a_max, na)
        b = np.linspace(0.0, self.b_max, nb)
        A, B = np.meshgrid(a, b, indexing="ij")
        keep = ~((A == 0) & (B == 0))  # no density at a = b = 0
        return A[keep], B[keep]

    def b_axis(self):
        nb = int(round(self.b_max / self.step)) + 1
        return np.linspace(0.0, self.b_max, nb)

    def boundary_grid(self):
        lo, hi, n = self.boundary_b
        return np.unique(np.concatenate([np.geomspace(lo, hi, int(n)),
                                         self.b_axis()[1:]]))

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["boundary_b"] = list(self.boundary_b)
        return d


PARTS = ("a", "b", "c", "d", "e", "chain")


def _worst(values, points, sense: str):
    """Index of the worst value: the minimum for '>=' checks, the max |.| for '~0'."""
    v = np.asarray(values)
    if sense == "abs":
        i = int(np.nanargmax(np.abs(v)))
    elif sense == "max":
        i = int(np.nanargmax(v))
    else:
        i = int(np.nanargmin(v))
    return i, float(v[i]), {k: float(np.asarray(p)[i]) for k, p in points.items()}


def g_grid_checks(config: GGridConfig, part: str) -> list[Check]:
    al = _alpha(config.alpha)
    a, b = config.grid()
    bax = config.b_axis()
    checks: list[Check] = []

    if part == "a":
        v = dG(a, b, al, 4)
        i, val, pt = _worst(v, {"a": a, "b": b}, "min")
        checks.append(Check("fourth_derivative_nonnegative", val >= -config.tol_fourth
                            and not np.any(np.isnan(v)), val, -config.tol_fourth, pt,
                            "d^4G/da^4 >= 0 on the grid"))
    elif part == "b":
        v = dG(config.large_a, bax, al, 3)
        i, val, pt = _worst(v, {"b": bax}, "abs")
        pt["a"] = config.large_a
        checks.append(Check("third_derivative_vanishes_at_large_a",
                            abs(val) <= config.tol_third_limit, val, config.tol_third_limit, pt,
                            "|d^3G/da^3| at the large-a proxy"))
        v2 = dG(config.decay_a, bax, al, 3)
        shrink = np.abs(v2) <= np.abs(v) + 1e-12
        j = int(np.argmin(shrink))
        checks.append(Check("third_derivative_decays", bool(np.all(shrink)),
                            float(abs(v2[j]) - abs(v[j])), 1e-12,
                            {"a": config.decay_a, "b": float(bax[j])},
                            "|d^3G/da^3| shrinks from the large-a proxy to the decay proxy"))
        lim = third_derivative_limit(al)
        checks.append(Check("third_derivative_limit_expression", abs(lim) <= config.tol_third_limit,
                            lim, config.tol_third_limit, {"alpha": al},
                            "-2 + 12 a^3 a^((1-3a)/(a-1)) at the evaluation order"))
    elif part == "c":
        h = h_limit_functions(al, bax)
        v = dG(config.large_a, bax, al, 2) - h["h2"]
        i, val, pt = _worst(v, {"b": bax}, "abs")
        pt["a"] = config.large_a
        checks.append(Check("second_derivative_tends_to_h2", abs(val) <= config.tol_second_limit,
                            val, config.tol_second_limit, pt,
                            "d^2G/da^2 at the large-a proxy minus h2(b)"))
        bb = config.boundary_grid()
        h2 = h_limit_functions(al, bb)["h2"]
        i, val, pt = _worst(h2, {"b": bb}, "min")
        checks.append(Check("h2_nonnegative", val >= -config.tol_boundary, val,
                            -config.tol_boundary, pt, "h2(b) >= 0 on a log grid"))
        checks.append(Check("h1_vanishes", abs(h["h1"]) <= 1e-12, float(h["h1"]), 1e-12,
                            {"alpha": al}, "h1 at the evaluation order"))
    elif part in ("d", "e"):
        bb = config.boundary_grid()
        rep = boundary_inequalities(bb, al)
        if part == "d":
            v = rep.slope_at_zero
            name, what = "slope_at_zero_nonnegative", "phi1(b) - phi2(b) >= 0"
        else:
            v = rep.zero_b
            name, what = "zero_b_inequality", "G(0, b)/2 >= 0"
        i, val, pt = _worst(v, {"b": bb}, "min")
        checks.append(Check(name, val >= -config.tol_boundary, val, -config.tol_boundary,
                            pt, what))
    elif part == "chain":
        for k, sense, label in ((3, "max", "d^3G/da^3 <= 0"), (2, "min", "d^2G/da^2 >= 0"),
                                (1, "min", "dG/da >= 0"), (0, "min", "G >= 0")):
            v = G(a, b, al) if k == 0 else dG(a, b, al, k)
            scale = 1.0 + a**3 + b**3
            w = v / scale
            i, val, pt = _worst(w, {"a": a, "b": b}, sense)
            ok = (val <= config.tol_chain_rel) if sense == "max" else (val >= -config.tol_chain_rel)
            checks.append(Check(f"chain_order_{k}", bool(ok) and not np.any(np.isnan(v)),
                                float(v[i]), config.tol_chain_rel, pt,
                                label + " (tolerance relative to 1 + a^3 + b^3)"))
    else:
        raise ValueError(f"unknown part {part!r}")
    return checks


def verify_lemma_tech(config: GGridConfig = GGridConfig(),
                      parts=PARTS) -> VerificationReport:
    report = VerificationReport(command="certify-grid", config=config.to_dict())
    for part in parts:
        for c in g_grid_checks(config, part):
            report.add(c.with_prefix(f"part_{part}"))
    return report.finish()


def endpoint_data(part: str, alpha=None) -> dict:
    """Endpoint behaviour of the log-difference functions at ``b -> 0+`` and ``b -> inf``.

    ``left`` is the exact limit at 0 (both are 0 at alpha*), ``left_slope_sign`` the
    sign of the leading series term, ``right`` the value at a large ``b``.
    """
    al = _alpha(alpha)
    if part == "e":
        right = float(zero_b_log_difference(60.0, al))
        return {"left": 0.0, "left_slope_sign": 1, "right": right, "right_limit": 0.0}
    if part == "d":
        phi1, phi2 = slope_at_zero_sides(np.array([60.0]), al)
        right = float(np.log(phi1[0]) - np.log(phi2[0]))
        return {"left": 0.0, "left_slope_sign": 1, "right": right, "right_limit": 0.0}
    raise ValueError("endpoint data exists for parts d and e only")


__all__ = ["GPoint", "G", "dG", "g_eval", "g_partial_a", "h_limit_functions",
           "boundary_inequalities", "verify_lemma_tech", "GGridConfig", "alpha_star"]
