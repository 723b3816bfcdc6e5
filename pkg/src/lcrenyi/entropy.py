"""Rényi entropies of piecewise log-linear densities."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .density import PiecewiseLogLinearDensity


@dataclass(frozen=True)
class EntropyOrder:
    """Order of a Rényi entropy: ``zero``, ``finite`` (alpha), ``one`` or ``infinity``."""

    tag: str
    alpha: float | None = None

    def __post_init__(self):
        if self.tag == "finite":
            a = self.alpha
            if a is None or not (a > 0) or a == 1 or math.isinf(a):
                raise ValueError("finite order requires 0 < alpha < inf, alpha != 1")
        elif self.tag not in ("zero", "one", "infinity"):
            raise ValueError(f"unknown entropy order tag {self.tag!r}")

    @classmethod
    def of(cls, alpha: "float | EntropyOrder") -> "EntropyOrder":
        if isinstance(alpha, EntropyOrder):
            return alpha
        alpha = float(alpha)
        if alpha < 0 or math.isnan(alpha):
            raise ValueError("entropy order must be nonnegative")
        if alpha == 0:
            return cls("zero")
        if alpha == 1:
            return cls("one")
        if math.isinf(alpha):
            return cls("infinity")
        return cls("finite", alpha)

    @property
    def value(self) -> float:
        return {"zero": 0.0, "one": 1.0, "infinity": math.inf}.get(self.tag, self.alpha)


def renyi_entropy(f: PiecewiseLogLinearDensity, order) -> float:
    """``h_alpha(f) = log(int f**alpha) / (1 - alpha)`` with the 0, 1, inf limits."""
    o = EntropyOrder.of(order)
    if o.tag == "zero":
        return math.log(f.support_length)
    if o.tag == "one":
        return f.shannon_entropy()
    if o.tag == "infinity":
        return float(np.min(f.potential))
    return f.log_mass(o.alpha) / (1.0 - o.alpha)


def entropy_power(f: PiecewiseLogLinearDensity, order) -> float:
    return math.exp(2.0 * renyi_entropy(f, order))


def log_ratio_term(p: float) -> float:
    """``log(p)/(p-1)``, equal to 1 at ``p = 1``."""
    if p == 1:
        return 1.0
    return math.log(p) / (p - 1.0)


@dataclass(frozen=True)
class ConvexityProbe:
    p: np.ndarray
    log_mass: np.ndarray     # log int f^p, convex in p
    log_p_mass: np.ndarray   # log(p int f^p), concave in p

    def second_differences(self, which: str = "log_mass") -> np.ndarray:
        """Second divided differences (scaled to unit spacing for equal grids)."""
        y = getattr(self, which)
        x = self.p
        h0, h1 = np.diff(x)[:-1], np.diff(x)[1:]
        d = ((y[2:] - y[1:-1]) / h1 - (y[1:-1] - y[:-2]) / h0) * 2.0 / (h0 + h1)
        return d * (h0 * h1)


def lp_mass_convexity_probe(f: PiecewiseLogLinearDensity, p_grid) -> ConvexityProbe:
    p = np.asarray(p_grid, dtype=float)
    if p.ndim != 1 or np.any(p <= 0) or np.any(np.diff(p) <= 0):
        raise ValueError("p_grid must be strictly increasing and positive")
    lm = np.array([f.log_mass(pi) for pi in p])
    return ConvexityProbe(p=p, log_mass=lm, log_p_mass=lm + np.log(p))
