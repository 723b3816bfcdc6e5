"""Entropy-power sandwich constants, reverse EPI checks and relative alpha-entropy."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import betaln

from .bounds import GENERAL, SYMMETRIC, alpha_star_float, min_entropy_constant
from .convolution import GridConfig, convolve, grid_renyi_entropy
from .density import PiecewiseLogLinearDensity, segment_moments
from .entropy import entropy_power, renyi_entropy

GG_RESOLUTION = 10_000


class DivergentIntegral(ArithmeticError):
    """The cross integral is infinite (support mismatch with a negative exponent)."""


# -- sandwich constants ---------------------------------------------------------------

def lower_constant(alpha: float) -> float:
    """``min(12, 2 alpha^(2/(alpha-1)))``: 12 up to alpha*, the exponential branch beyond."""
    if alpha == 1:
        return 12.0
    return min(12.0, 2.0 * alpha ** (2.0 / (alpha - 1.0)))


def upper_constant(alpha: float) -> float:
    """Entropy power over variance of the generalized Gaussian of order ``alpha > 1``."""
    if alpha == 1:
        return 2.0 * math.pi * math.e
    log_c = (math.log((3 * alpha - 1) / (alpha - 1))
             + 2.0 / (1.0 - alpha) * math.log(2 * alpha / (3 * alpha - 1))
             + 2.0 * betaln(0.5, alpha / (alpha - 1)))
    return math.exp(log_c)


@dataclass(frozen=True)
class SandwichConstants:
    alpha: float
    c_minus: float
    c_plus: float

    def __post_init__(self):
        if not self.c_minus <= self.c_plus:
            raise AssertionError("lower sandwich constant exceeds the upper one")

    @property
    def reverse_epi_cap(self) -> float:
        return self.c_plus / self.c_minus

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "c_minus": self.c_minus, "c_plus": self.c_plus}


def sandwich_constants(alpha: float) -> SandwichConstants:
    if not alpha > 1:
        raise ValueError("sandwich constants are defined for alpha > 1")
    return SandwichConstants(alpha, lower_constant(alpha), upper_constant(alpha))


def relative_bound_constant(alpha: float, drop_log_term: bool = False) -> float:
    """Upper bound on ``I_alpha(X || Z)`` for symmetric log-concave ``X`` and the matched
    generalized Gaussian ``Z``: the entropy gap ``h_alpha(Z) - min h_alpha`` at unit variance.

    ``drop_log_term=True`` omits the ``0.5*log(3 alpha - 1)`` term, which gives a
    smaller value than the entropy gap (kept only for comparison).
    """
    if not alpha > 1:
        raise ValueError("alpha must exceed 1")
    head = (math.log(2 * alpha) / (1 - alpha) - math.log(3 * alpha - 1) / (1 - alpha)
            - 0.5 * math.log(alpha - 1) + betaln(0.5, alpha / (alpha - 1)))
    if not drop_log_term:
        head += 0.5 * math.log(3 * alpha - 1)
    return head - min_entropy_constant(alpha, SYMMETRIC)


# -- generalized Gaussian ---------------------------------------------------------------

def _gg_half_knots(n: int, edge_gap: float) -> tuple[np.ndarray, np.ndarray]:
    """Half-line knots ``u`` in units of the support radius, and ``1 - u``.

    ``1 - u`` is taken from the rounded knot itself (exact for ``u >= 1/2``), so the
    potential sampled at the knots stays convex even when the edge gap is near 1e-12.
    """
    n_flat = max(2, int(0.3 * n))
    flat = np.linspace(0.0, 0.5, n_flat + 1)
    gaps = np.geomspace(0.5, edge_gap, n - n_flat + 1)[1:]
    u = np.concatenate([flat, 1.0 - gaps])
    return u, 1.0 - u


def default_edge_gap(alpha: float) -> float:
    """Relative distance from the support edge beyond which the mass is below ~1e-13."""
    return float(np.clip(1e-13 ** ((alpha - 1.0) / alpha), 1e-12, 1e-4))


def matched_generalized_gaussian(alpha: float, target_variance: float = 1.0,
                                 resolution: int = GG_RESOLUTION,
                                 edge_gap: float | None = None) -> PiecewiseLogLinearDensity:
    """Piecewise log-linear generalized Gaussian ``(1 + (1-alpha) x^2)_+^(1/(alpha-1))``
    rescaled to the target variance.

    Knots are uniform on the inner half of the support and geometric towards
    the edge, where the potential blows up; the density is cut at relative
    distance ``edge_gap`` from the edge (the mass beyond is negligible).
    """
    if not alpha > 1:
        raise ValueError("the generalized Gaussian is compactly supported only for alpha > 1")
    if not target_variance > 0:
        raise ValueError("target variance must be positive")
    return _unit_generalized_gaussian(float(alpha), int(resolution),
                                      default_edge_gap(alpha) if edge_gap is None else edge_gap
                                      ).rescaled(1.0 / math.sqrt(target_variance))


@lru_cache(maxsize=32)
def _unit_generalized_gaussian(alpha: float, resolution: int, edge_gap: float) -> PiecewiseLogLinearDensity:
    radius = 1.0 / math.sqrt(alpha - 1.0)
    u, one_minus_u = _gg_half_knots(max(4, resolution // 2), edge_gap)
    # 1 - (alpha-1) x^2 = (1-u)(1+u) with u = x / radius
    v_half = -np.log(one_minus_u * (2.0 - one_minus_u)) / (alpha - 1.0)
    half = radius * u
    knots = np.concatenate([-half[:0:-1], half])
    pot = np.concatenate([v_half[:0:-1], v_half])
    f = PiecewiseLogLinearDensity(knots, pot, symmetric=True)
    return f.rescaled(math.sqrt(f.variance()))


# -- relative alpha-entropy ---------------------------------------------------------------

def cross_log_integral(f: PiecewiseLogLinearDensity, g: PiecewiseLogLinearDensity, q: float) -> float:
    """``log int f * g**q`` in closed form on the merged knot set."""
    flo, fhi = f.support
    glo, ghi = g.support
    if q < 0 and (flo < glo or fhi > ghi):
        raise DivergentIntegral("f puts mass where g vanishes and the exponent is negative")
    lo, hi = max(flo, glo), min(fhi, ghi)
    if lo >= hi:
        if q > 0:
            return -math.inf
        raise DivergentIntegral("disjoint supports")
    pts = np.union1d(f.knots, g.knots)
    pts = np.unique(np.concatenate([[lo, hi], pts[(pts > lo) & (pts < hi)]]))
    w = np.interp(pts, f.knots, f.potential) + q * np.interp(pts, g.knots, g.potential)
    wl, wr = w[:-1], w[1:]
    width = np.diff(pts)
    slope = (wr - wl) / width
    base = np.minimum(wl, wr)
    logs = -base + np.log(segment_moments(np.abs(slope), width, 0))
    m = float(np.max(logs))
    return m + math.log(float(np.sum(np.exp(logs - m))))


def relative_alpha_entropy(x: PiecewiseLogLinearDensity, z: PiecewiseLogLinearDensity,
                           alpha: float) -> float:
    """``alpha/(1-alpha) log int (f/||f||_alpha)(g/||g||_alpha)^(alpha-1)``."""
    if not alpha > 0 or alpha == 1:
        raise ValueError("alpha must be positive and different from 1")
    cross = cross_log_integral(x, z, alpha - 1.0)
    log_norm_x = x.log_mass(alpha) / alpha
    log_norm_z = z.log_mass(alpha) / alpha
    return alpha / (1.0 - alpha) * (cross - log_norm_x - (alpha - 1.0) * log_norm_z)


@dataclass(frozen=True)
class RelativeCheck:
    alpha: float
    divergence: float
    entropy_gap: float
    constant: float

    @property
    def gap_slack(self) -> float:
        return self.entropy_gap - self.divergence

    @property
    def constant_slack(self) -> float:
        return self.constant - self.divergence


def relative_entropy_check(x: PiecewiseLogLinearDensity, alpha: float,
                           resolution: int = GG_RESOLUTION, z: PiecewiseLogLinearDensity | None = None
                           ) -> RelativeCheck:
    """Divergence of ``x`` from its variance-matched generalized Gaussian against both bounds."""
    if z is None:
        z = matched_generalized_gaussian(alpha, x.variance(), resolution)
    d = relative_alpha_entropy(x, z, alpha)
    gap = renyi_entropy(z, alpha) - renyi_entropy(x, alpha)
    return RelativeCheck(alpha, d, gap, relative_bound_constant(alpha))


# -- reverse entropy power inequalities ------------------------------------------------------

@dataclass(frozen=True)
class ReverseEPIReport:
    alpha: float
    regime: str
    ratio: float
    cap: float
    n_sum: float
    n_x: float
    n_y: float
    levels: int

    @property
    def slack(self) -> float:
        return self.cap - self.ratio

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "regime": self.regime, "ratio": self.ratio, "cap": self.cap,
                "slack": self.slack, "n_sum": self.n_sum, "n_x": self.n_x, "n_y": self.n_y,
                "refinement_levels": self.levels}


def reverse_epi_cap(alpha: float, regime: str) -> float:
    c_minus = lower_constant(alpha)
    c_plus = upper_constant(alpha)
    if regime == SYMMETRIC:
        return c_plus / c_minus
    if regime == GENERAL:
        return 2.0 * c_plus / c_minus
    raise ValueError(f"unknown regime {regime!r}")


def reverse_epi_check(x: PiecewiseLogLinearDensity, y: PiecewiseLogLinearDensity, alpha: float,
                      regime: str = SYMMETRIC, grid: GridConfig = GridConfig()) -> ReverseEPIReport:
    """``N_alpha(X+Y) / (N_alpha(X) + N_alpha(Y))`` for independent ``X, Y`` and its cap."""
    if regime == SYMMETRIC:
        if not (x.symmetric and y.symmetric):
            raise ValueError("symmetric regime requires symmetric densities")
        if alpha < 1:
            raise ValueError("symmetric reverse EPI needs alpha >= 1")
    elif regime == GENERAL:
        if alpha < 2:
            raise ValueError("general reverse EPI needs alpha >= 2")
    else:
        raise ValueError(f"unknown regime {regime!r}")
    h = grid_renyi_entropy(convolve(x, y, grid), alpha)
    n_sum = math.exp(2.0 * h.value)
    n_x, n_y = entropy_power(x, alpha), entropy_power(y, alpha)
    return ReverseEPIReport(alpha, regime, n_sum / (n_x + n_y), reverse_epi_cap(alpha, regime),
                            n_sum, n_x, n_y, h.levels)


def difference_entropy_slack(x: PiecewiseLogLinearDensity, alpha: float,
                             grid: GridConfig = GridConfig()) -> float:
    """``h_alpha(X) + log 2 - h_alpha(X - Y)`` for iid ``X, Y``; claimed nonnegative for alpha >= 2."""
    if alpha < 2:
        raise ValueError("the difference bound is used for alpha >= 2")
    h = grid_renyi_entropy(convolve(x, x.reflected(), grid), alpha)
    return renyi_entropy(x, alpha) + math.log(2.0) - h.value


def threshold_branch(alpha: float) -> str:
    return "uniform" if alpha <= alpha_star_float() else "two_sided_exponential"
