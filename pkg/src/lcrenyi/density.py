"""One-dimensional log-concave densities with piecewise linear potential.

A density is stored as ``f = exp(-V)`` on ``[x_0, x_m]`` where ``V`` is
the linear interpolant of ``potential`` at ``knots``.  Every integral used
downstream (mass, moments, ``int f**p``, Shannon entropy) is a sum of
elementary per-segment closed forms, so no quadrature is involved.

Segment integrals are anchored at the end of the segment where ``V`` is
smallest, which turns each of them into ``exp(-V_min) * int_0^D u**k
exp(-lam*u) du`` with ``lam >= 0``.  That form never overflows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

NORMALIZATION_TOL = 1e-10
TAIL_MASS = 1e-12

_SERIES_CUTOFF = 1.0
_SERIES_TERMS = 24


def _unit_moments(z: np.ndarray, k: int) -> np.ndarray:
    """``int_0^1 t**k exp(-z t) dt`` for ``z >= 0``, ``k`` in 0..2."""
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    small = z < _SERIES_CUTOFF
    if np.any(small):
        zs = z[small]
        term = np.ones_like(zs)
        acc = term / (k + 1)
        for j in range(1, _SERIES_TERMS):
            term = term * (-zs) / j
            acc = acc + term / (k + j + 1)
        out[small] = acc
    big = ~small
    if np.any(big):
        zb = z[big]
        e = np.exp(-zb)
        if k == 0:
            out[big] = (1.0 - e) / zb
        elif k == 1:
            out[big] = (1.0 - e * (1.0 + zb)) / zb**2
        else:
            out[big] = (2.0 - e * (zb * zb + 2.0 * zb + 2.0)) / zb**3
    return out


def segment_moments(lam, width, k: int) -> np.ndarray:
    """``int_0^width u**k exp(-lam*u) du`` for ``lam >= 0`` (vectorized)."""
    lam = np.asarray(lam, dtype=float)
    width = np.asarray(width, dtype=float)
    return width ** (k + 1) * _unit_moments(lam * width, k)


@dataclass(frozen=True, eq=False)
class _Segments:
    anchor: np.ndarray     # abscissa of the minimal-potential end
    direction: np.ndarray  # +1 if the segment extends right of the anchor
    vmin: np.ndarray
    lam: np.ndarray        # |slope|
    width: np.ndarray


class PiecewiseLogLinearDensity:
    """Log-concave density ``exp(-V)`` with ``V`` convex and piecewise linear.

    The constructor merges consecutive segments with equal slope, checks
    convexity (and the mirror symmetry if ``symmetric`` is set) and, unless
    ``normalize=False``, shifts ``V`` by the exact log-mass so that the
    density integrates to one.
    """

    __slots__ = ("knots", "potential", "symmetric", "_seg")

    def __init__(self, knots: Sequence[float], potential: Sequence[float],
                 symmetric: bool = False, normalize: bool = True):
        x = np.array(knots, dtype=float)
        v = np.array(potential, dtype=float)
        if x.ndim != 1 or x.shape != v.shape or x.size < 2:
            raise ValueError("knots and potential must be 1-d of equal length >= 2")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(v))):
            raise ValueError("knots and potential must be finite")
        if np.any(np.diff(x) <= 0):
            raise ValueError("knots must be strictly increasing")
        x, v = _merge_ties(x, v)
        slopes = np.diff(v) / np.diff(x)
        if np.any(np.diff(slopes) < -(1e-9 * _pair_scale(slopes) + _rounding_slack(x, v, slopes))):
            raise ValueError("potential is not convex (density not log-concave)")
        if symmetric:
            span = max(abs(x[0]), abs(x[-1]))
            vspan = 1.0 + np.max(np.abs(v))
            if (np.max(np.abs(x + x[::-1])) > 1e-12 * span
                    or np.max(np.abs(v - v[::-1])) > 1e-12 * vspan):
                raise ValueError("symmetric flag set but density is not even")
        object.__setattr__(self, "knots", x)
        object.__setattr__(self, "potential", v)
        object.__setattr__(self, "symmetric", bool(symmetric))
        object.__setattr__(self, "_seg", _segments(x, v))
        if normalize:
            v = v + self.log_mass()
            object.__setattr__(self, "potential", v)
            object.__setattr__(self, "_seg", _segments(x, v))
        x.setflags(write=False)
        v.setflags(write=False)

    def __setattr__(self, name, value):
        raise AttributeError("PiecewiseLogLinearDensity is immutable")

    def __repr__(self) -> str:
        return (f"PiecewiseLogLinearDensity(segments={self.n_segments}, "
                f"support=[{self.knots[0]:.6g}, {self.knots[-1]:.6g}], "
                f"symmetric={self.symmetric})")

    def __eq__(self, other) -> bool:
        if not isinstance(other, PiecewiseLogLinearDensity):
            return NotImplemented
        return (self.symmetric == other.symmetric
                and np.array_equal(self.knots, other.knots)
                and np.array_equal(self.potential, other.potential))

    __hash__ = None

    @property
    def n_segments(self) -> int:
        return self.knots.size - 1

    @property
    def slopes(self) -> np.ndarray:
        return np.diff(self.potential) / np.diff(self.knots)

    @property
    def support(self) -> tuple[float, float]:
        return float(self.knots[0]), float(self.knots[-1])

    @property
    def support_length(self) -> float:
        return float(self.knots[-1] - self.knots[0])

    def log_mass(self, p: float = 1.0) -> float:
        """``log int f**p`` evaluated in the log domain."""
        s = self._seg
        terms = -p * s.vmin + np.log(segment_moments(p * s.lam, s.width, 0))
        top = np.max(terms)
        return float(top + np.log(np.sum(np.exp(terms - top))))

    def mass(self) -> float:
        return math.exp(self.log_mass())

    def max_value(self) -> float:
        return math.exp(-float(np.min(self.potential)))

    def mean(self) -> float:
        s = self._seg
        w0 = segment_moments(s.lam, s.width, 0)
        w1 = segment_moments(s.lam, s.width, 1)
        scale = np.exp(-s.vmin)
        return float(np.sum(scale * (s.anchor * w0 + s.direction * w1)))

    def central_moment2(self, center: float | None = None) -> float:
        c = self.mean() if center is None else center
        s = self._seg
        a = s.anchor - c
        w0 = segment_moments(s.lam, s.width, 0)
        w1 = segment_moments(s.lam, s.width, 1)
        w2 = segment_moments(s.lam, s.width, 2)
        return float(np.sum(np.exp(-s.vmin)
                            * (a * a * w0 + 2 * a * s.direction * w1 + w2)))

    def variance(self) -> float:
        return self.central_moment2()

    def shannon_entropy(self) -> float:
        """``-int f log f = int V exp(-V)`` in closed form per segment."""
        s = self._seg
        w0 = segment_moments(s.lam, s.width, 0)
        w1 = segment_moments(s.lam, s.width, 1)
        return float(np.sum(np.exp(-s.vmin) * (s.vmin * w0 + s.lam * w1)))

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        v = np.interp(x, self.knots, self.potential)
        inside = (x >= self.knots[0]) & (x <= self.knots[-1])
        out = np.where(inside, np.exp(-v), 0.0)
        return out if out.ndim else float(out)

    def cell_masses(self, edges: np.ndarray) -> np.ndarray:
        """Exact mass of ``f`` in each cell ``[edges[i], edges[i+1]]``.

        Every cell is split at the knots it contains and each piece is
        integrated locally, so tail cells keep full relative accuracy.
        """
        edges = np.asarray(edges, dtype=float)
        pts = np.union1d(edges, self.knots)
        lo, hi = pts[:-1], pts[1:]
        mid = 0.5 * (lo + hi)
        inside = (mid > self.knots[0]) & (mid < self.knots[-1])
        idx = np.clip(np.searchsorted(self.knots, mid) - 1, 0, self.n_segments - 1)
        slope = self.slopes[idx]
        vl = np.interp(lo, self.knots, self.potential)
        vr = np.interp(hi, self.knots, self.potential)
        piece = np.exp(-np.minimum(vl, vr)) * segment_moments(np.abs(slope), hi - lo, 0)
        piece = np.where(inside, piece, 0.0)
        owner = np.searchsorted(edges, mid) - 1
        out = np.zeros(edges.size - 1)
        ok = (owner >= 0) & (owner < out.size)
        np.add.at(out, owner[ok], piece[ok])
        return out

    def rescaled(self, lam: float) -> "PiecewiseLogLinearDensity":
        """The density ``lam * f(lam * x)``; variance is divided by ``lam**2``."""
        if lam <= 0:
            raise ValueError("scale must be positive")
        return PiecewiseLogLinearDensity(self.knots / lam, self.potential - math.log(lam),
                                         symmetric=self.symmetric, normalize=False)

    def reflected(self) -> "PiecewiseLogLinearDensity":
        """The density of ``-X``."""
        return PiecewiseLogLinearDensity(-self.knots[::-1], self.potential[::-1],
                                         symmetric=self.symmetric, normalize=False)

    def shifted(self, t: float) -> "PiecewiseLogLinearDensity":
        return PiecewiseLogLinearDensity(self.knots + t, self.potential,
                                         symmetric=self.symmetric and t == 0, normalize=False)

    def to_dict(self) -> dict:
        return {"type": "piecewise", "knots": self.knots.tolist(),
                "potential": self.potential.tolist(), "symmetric": self.symmetric}


def _merge_ties(x: np.ndarray, v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    if x.size <= 2:
        return x, v
    slopes = np.diff(v) / np.diff(x)
    keep = np.ones(x.size, dtype=bool)
    keep[1:-1] = np.abs(np.diff(slopes)) > 1e-12 * _pair_scale(slopes)
    return x[keep], v[keep]


def _pair_scale(slopes: np.ndarray) -> np.ndarray:
    """Tolerance scale for comparing neighbouring slopes."""
    return 1.0 + np.abs(slopes[:-1]) + np.abs(slopes[1:])


def _rounding_slack(x: np.ndarray, v: np.ndarray, slopes: np.ndarray) -> np.ndarray:
    """Slope noise from representing the knots and potential in doubles.

    Knots a few ulps apart (steep edges of compact densities) make the sampled
    slopes uncertain by far more than a relative 1e-9; this bounds that noise.
    """
    eps = np.finfo(float).eps
    err = 4 * eps * (np.max(np.abs(x)) * np.abs(slopes) + np.max(np.abs(v))) / np.diff(x)
    return err[:-1] + err[1:]


def _segments(x: np.ndarray, v: np.ndarray) -> _Segments:
    vl, vr = v[:-1], v[1:]
    rising = vr >= vl
    return _Segments(
        anchor=np.where(rising, x[:-1], x[1:]),
        direction=np.where(rising, 1.0, -1.0),
        vmin=np.minimum(vl, vr),
        lam=np.abs(vr - vl) / np.diff(x),
        width=np.diff(x),
    )


# -- operations named by the density contract ----------------------------------

def pdf_at(f: PiecewiseLogLinearDensity, x):
    return f.pdf(x)


def moment(f: PiecewiseLogLinearDensity, k: int) -> float:
    """Raw moment of order 0 (mass), 1 (mean) or 2 (second moment about 0)."""
    if k == 0:
        return f.mass()
    if k == 1:
        return f.mean()
    if k == 2:
        return f.central_moment2(center=0.0)
    raise ValueError("moment order must be 0, 1 or 2")


def lp_mass(f: PiecewiseLogLinearDensity, p: float) -> float:
    """``int f**p``."""
    if p <= 0:
        raise ValueError("p must be positive")
    return math.exp(f.log_mass(p))


# -- named families -------------------------------------------------------------

@dataclass(frozen=True)
class Uniform:
    halfwidth: float = 1.0
    symmetric = True

    def __post_init__(self):
        _positive(halfwidth=self.halfwidth)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(np.abs(x) <= self.halfwidth, 0.5 / self.halfwidth, 0.0)

    def variance(self) -> float:
        return self.halfwidth**2 / 3.0

    def renyi_entropy(self, alpha: float) -> float:
        return math.log(2.0 * self.halfwidth)

    def to_piecewise(self, resolution: int | None = None,
                     tail_mass: float | None = None) -> PiecewiseLogLinearDensity:
        L = self.halfwidth
        return PiecewiseLogLinearDensity([-L, L], [0.0, 0.0], symmetric=True)


@dataclass(frozen=True)
class TwoSidedExponential:
    rate: float = 1.0
    symmetric = True

    def __post_init__(self):
        _positive(rate=self.rate)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        return 0.5 * self.rate * np.exp(-self.rate * np.abs(x))

    def variance(self) -> float:
        return 2.0 / self.rate**2

    def renyi_entropy(self, alpha: float) -> float:
        lam = self.rate
        if alpha == 0:
            return math.inf
        if alpha == 1:
            return 1.0 + math.log(2.0 / lam)
        if math.isinf(alpha):
            return -math.log(lam / 2.0)
        # int f^a = (lam/2)^a * 2/(a*lam)
        return (alpha * math.log(lam / 2) + math.log(2 / (alpha * lam))) / (1 - alpha)

    def to_piecewise(self, resolution: int | None = None,
                     tail_mass: float | None = TAIL_MASS) -> PiecewiseLogLinearDensity:
        if tail_mass is None:
            raise ValueError("two-sided exponential has unbounded support; "
                             "a truncation tail mass is required")
        T = -math.log(tail_mass) / self.rate
        return PiecewiseLogLinearDensity([-T, 0.0, T], [self.rate * T, 0.0, self.rate * T],
                                         symmetric=True)


@dataclass(frozen=True)
class OneSidedExponential:
    rate: float = 1.0
    symmetric = False

    def __post_init__(self):
        _positive(rate=self.rate)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x >= 0, self.rate * np.exp(-self.rate * np.maximum(x, 0.0)), 0.0)

    def variance(self) -> float:
        return 1.0 / self.rate**2

    def renyi_entropy(self, alpha: float) -> float:
        lam = self.rate
        if alpha == 0:
            return math.inf
        if alpha == 1:
            return 1.0 - math.log(lam)
        if math.isinf(alpha):
            return -math.log(lam)
        # int f^a = lam^(a-1) / a
        return ((alpha - 1) * math.log(lam) - math.log(alpha)) / (1 - alpha)

    def to_piecewise(self, resolution: int | None = None,
                     tail_mass: float | None = TAIL_MASS) -> PiecewiseLogLinearDensity:
        if tail_mass is None:
            raise ValueError("one-sided exponential has unbounded support; "
                             "a truncation tail mass is required")
        T = -math.log(tail_mass) / self.rate
        return PiecewiseLogLinearDensity([0.0, T], [0.0, self.rate * T])


@dataclass(frozen=True)
class Extremal:
    """Flat on ``[-a, a]`` with exponential shoulders of rate ``gamma`` out to ``a + b``."""

    a: float
    b: float
    gamma: float = 1.0
    symmetric = True

    def __post_init__(self):
        if min(self.a, self.b, self.gamma) < 0:
            raise ValueError("a, b, gamma must be nonnegative")
        if self.a + self.b <= 0:
            raise ValueError("a + b must be positive")

    @property
    def height(self) -> float:
        return 0.5 / (self.a + self._tail_length(1.0))

    def _tail_length(self, p: float) -> float:
        # int_0^b exp(-p*gamma*u) du
        return float(segment_moments(p * self.gamma, self.b, 0))

    def pdf(self, x):
        x = np.abs(np.asarray(x, dtype=float))
        c = self.height
        tail = c * np.exp(-self.gamma * (x - self.a))
        return np.where(x <= self.a, c, np.where(x <= self.a + self.b, tail, 0.0))

    def variance(self) -> float:
        a, b, g = self.a, self.b, self.gamma
        shoulder = (a * a * segment_moments(g, b, 0) + 2 * a * segment_moments(g, b, 1)
                    + segment_moments(g, b, 2))
        return float(2 * self.height * (a**3 / 3 + shoulder))

    def renyi_entropy(self, alpha: float) -> float:
        c = self.height
        if alpha == 0:
            return math.log(2 * (self.a + self.b))
        if alpha == 1:
            shoulder = float(segment_moments(self.gamma, self.b, 1))
            return -math.log(c) + 2 * c * self.gamma * shoulder
        if math.isinf(alpha):
            return -math.log(c)
        mass = 2 * c**alpha * (self.a + self._tail_length(alpha))
        return math.log(mass) / (1 - alpha)

    def to_piecewise(self, resolution: int | None = None,
                     tail_mass: float | None = None) -> PiecewiseLogLinearDensity:
        a, b, g = self.a, self.b, self.gamma
        if b == 0:
            return PiecewiseLogLinearDensity([-a, a], [0.0, 0.0], symmetric=True)
        if a == 0:
            return PiecewiseLogLinearDensity([-b, 0.0, b], [g * b, 0.0, g * b], symmetric=True)
        return PiecewiseLogLinearDensity([-a - b, -a, a, a + b], [g * b, 0.0, 0.0, g * b],
                                         symmetric=True)


@dataclass(frozen=True)
class GeneralizedGaussian:
    """``c0 * (1 + (1 - order) * (c1 x)**2)_+ ** (1/(order-1))`` at a given variance.

    Only ``order > 1`` (compact support, log-concave) can be represented.
    """

    order: float
    target_variance: float = 1.0
    symmetric = True

    def __post_init__(self):
        _positive(variance=self.target_variance)
        if self.order <= 1:
            raise ValueError("generalized Gaussian is log-concave only for order > 1")

    def variance(self) -> float:
        return self.target_variance

    def to_piecewise(self, resolution: int | None = 10_000,
                     tail_mass: float | None = None) -> PiecewiseLogLinearDensity:
        from .epi import matched_generalized_gaussian
        return matched_generalized_gaussian(self.order, self.target_variance,
                                            resolution=resolution or 10_000)


NamedDensity = Uniform | TwoSidedExponential | OneSidedExponential | Extremal | GeneralizedGaussian


def to_piecewise(d, resolution: int | None = None,
                 tail_mass: float | None = TAIL_MASS) -> PiecewiseLogLinearDensity:
    if isinstance(d, PiecewiseLogLinearDensity):
        return d
    return d.to_piecewise(resolution=resolution, tail_mass=tail_mass)


def _positive(**kw):
    for k, val in kw.items():
        if not (val > 0 and math.isfinite(val)):
            raise ValueError(f"{k} must be a positive finite number, got {val!r}")


# -- JSON density specs ------------------------------------------------------------

def named_from_spec(spec: dict):
    """Parse a density JSON object into a named family or a piecewise density."""
    kind = spec.get("type")
    try:
        if kind == "uniform":
            return Uniform(float(spec["halfwidth"]))
        if kind == "two_sided_exp":
            return TwoSidedExponential(float(spec["rate"]))
        if kind == "one_sided_exp":
            return OneSidedExponential(float(spec["rate"]))
        if kind == "generalized_gaussian":
            return GeneralizedGaussian(float(spec["order"]), float(spec.get("variance", 1.0)))
        if kind == "extremal":
            return Extremal(float(spec["a"]), float(spec["b"]), float(spec.get("gamma", 1.0)))
        if kind == "piecewise":
            return PiecewiseLogLinearDensity(spec["knots"], spec["potential"],
                                             symmetric=bool(spec.get("symmetric", False)))
    except KeyError as exc:
        raise ValueError(f"density spec of type {kind!r} is missing field {exc}") from None
    raise ValueError(f"unknown density type {kind!r}")


def density_from_spec(spec: dict, resolution: int | None = None,
                      tail_mass: float = TAIL_MASS) -> PiecewiseLogLinearDensity:
    return to_piecewise(named_from_spec(spec), resolution=resolution, tail_mass=tail_mass)


# -- random log-concave densities ------------------------------------------------------

@dataclass(frozen=True)
class SamplerConfig:
    symmetric: bool = True
    max_knots: int = 8
    support_scale: float = 1.0


def sample_logconcave(seed: int, config: SamplerConfig = SamplerConfig()) -> PiecewiseLogLinearDensity:
    """Draw a random log-concave density, deterministically in ``seed``.

    Slopes are cumulative sums of nonnegative increments, so ``V`` is
    convex by construction.  A random fraction of the increments is zero
    and the slope scale is log-uniform, which covers near-uniform,
    near-exponential and flat-top-with-shoulders shapes.  In the symmetric
    case the half-line potential (first slope >= 0) is mirrored.
    """
    if config.max_knots < 1 or config.support_scale <= 0:
        raise ValueError("invalid sampler config")
    rng = np.random.default_rng(seed)
    L = config.support_scale
    m = int(rng.integers(1, config.max_knots + 1))
    inner = np.sort(rng.uniform(0.0, L, size=m - 1))
    x = np.concatenate([[0.0], inner, [L]])
    if np.any(np.diff(x) <= 0):
        x = np.linspace(0.0, L, m + 1)

    slope_scale = 10.0 ** rng.uniform(-1.5, 1.5) / L
    p_zero = rng.uniform(0.0, 0.8)
    incr = rng.exponential(slope_scale, size=m)
    incr[rng.uniform(size=m) < p_zero] = 0.0
    if config.symmetric:
        if rng.uniform() < 0.3:
            incr[0] = 0.0
        slopes = np.cumsum(incr)
    else:
        start = -rng.exponential(slope_scale) if rng.uniform() < 0.7 else 0.0
        slopes = start + np.cumsum(incr)

    v = np.concatenate([[0.0], np.cumsum(slopes * np.diff(x))])
    if config.symmetric:
        knots = np.concatenate([-x[::-1], x[1:]])
        pot = np.concatenate([v[::-1], v[1:]])
        return PiecewiseLogLinearDensity(knots, pot, symmetric=True)
    return PiecewiseLogLinearDensity(x, v)
