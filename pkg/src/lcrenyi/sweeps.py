"""Seeded falsification sweeps; each returns a ``VerificationReport``.

Case ``i`` of a sweep with seed ``s`` draws its density from the integer seed
``s * CASE_STRIDE + i`` so any single case can be replayed on its own.
Parallel runs split the case indices into ordered chunks and aggregate in
index order, so reports do not depend on ``jobs``.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .bounds import GENERAL, SYMMETRIC, alpha_star, alpha_star_float, theorem_slack
from .convolution import GridConfig, convolve, grid_renyi_entropy
from .density import SamplerConfig, Uniform, sample_logconcave
from .entropy import log_ratio_term, renyi_entropy
from .epi import (relative_alpha_entropy, relative_bound_constant, relative_entropy_check,
                  sandwich_constants, upper_constant, lower_constant)
from .report import Check, VerificationReport

CASE_STRIDE = 1_000_003

THEOREM_ALPHAS_SYMMETRIC = (0.5, 1.0, 1.2, "a*-0.01", "a*+0.01", 1.5, 2.0, 5.0, 50.0)
THEOREM_ALPHAS_GENERAL = (2.0, 3.0, 10.0)
MONOTONICITY_ALPHAS = (0.3, 0.7, 1.0, 1.5, 2.0, 4.0, 16.0)


def case_seed(seed: int, i: int) -> int:
    return seed * CASE_STRIDE + i


def resolve_alpha(a) -> float:
    """Accept floats and the tokens ``a*``, ``a*+d`` and ``a*-d``."""
    if isinstance(a, str):
        s = a.strip().replace(" ", "")
        if s.startswith("a*") or s.startswith("alpha*"):
            rest = s.split("*", 1)[1]
            return alpha_star_float() + (float(rest) if rest else 0.0)
        return float(s)
    return float(a)


def _chunks(n: int, jobs: int) -> list[range]:
    k = max(1, min(jobs * 4, n))
    edges = np.linspace(0, n, k + 1).astype(int)
    return [range(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def run_cases(fn: Callable, n: int, args: tuple, jobs: int = 1) -> list:
    """``[fn(i, *args) for i in range(n)]``, optionally on a process pool, in index order."""
    if jobs <= 1 or n < 2:
        return [fn(i, *args) for i in range(n)]
    chunks = _chunks(n, jobs)
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        parts = pool.map(_run_chunk, [(fn, c.start, c.stop, args) for c in chunks])
        return [r for part in parts for r in part]


def _run_chunk(task):
    fn, lo, hi, args = task
    return [fn(i, *args) for i in range(lo, hi)]


@dataclass(frozen=True)
class Worst:
    value: float
    case: int
    alpha: float

    @staticmethod
    def of(rows: Sequence[dict], key: str = "slack") -> "Worst":
        r = min(rows, key=lambda row: row[key])
        return Worst(r[key], r["case"], r["alpha"])


# -- Theorem sweeps --------------------------------------------------------------------

def _theorem_case(i: int, seed: int, alphas: tuple, regime: str, support_scale: float) -> list[dict]:
    s = case_seed(seed, i)
    cfg = SamplerConfig(symmetric=(regime == SYMMETRIC), support_scale=support_scale)
    f = sample_logconcave(s, cfg)
    return [{"case": i, "seed": s, "alpha": a, "slack": theorem_slack(f, a, regime)} for a in alphas]


def theorem_sweep(regime: str = SYMMETRIC, samples: int = 1000, alphas=None, seed: int = 1,
                  jobs: int = 1, tol: float = 1e-8, keep_cases: bool = False) -> VerificationReport:
    """Minimum slack of the variance lower bound over sampled densities and orders."""
    if alphas is None:
        alphas = THEOREM_ALPHAS_SYMMETRIC if regime == SYMMETRIC else THEOREM_ALPHAS_GENERAL
    resolved = tuple(resolve_alpha(a) for a in alphas)
    rep = VerificationReport("verify-theorem", {"regime": regime, "samples": samples,
                                                "alphas": list(resolved), "seed": seed,
                                                "tolerance": tol})
    rows = [r for case in run_cases(_theorem_case, samples, (seed, resolved, regime, 1.0), jobs)
            for r in case]
    for a in resolved:
        sub = [r for r in rows if r["alpha"] == a]
        w = Worst.of(sub)
        rep.add(Check(f"min_slack[alpha={a:.6g}]", w.value >= -tol, w.value, -tol,
                      {"case": w.case, "seed": case_seed(seed, w.case), "alpha": a},
                      "h_alpha - 0.5 log var - constant >= 0"))
    if keep_cases:
        rep.cases = rows
    return rep.finish()


# -- Order monotonicity ----------------------------------------------------------------

def _monotonicity_case(i: int, seed: int, alphas: tuple) -> dict:
    s = case_seed(seed, i)
    f = sample_logconcave(s, SamplerConfig(symmetric=(i % 2 == 0)))
    h = [renyi_entropy(f, a) for a in alphas]
    lower, upper = math.inf, math.inf
    for j, q in enumerate(alphas):
        for k, p in enumerate(alphas):
            if p <= q:
                continue
            d = h[j] - h[k]
            lower = min(lower, d)
            upper = min(upper, log_ratio_term(q) - log_ratio_term(p) - d)
    return {"case": i, "seed": s, "alpha": float("nan"), "lower": lower, "upper": upper}


def monotonicity_sweep(samples: int = 200, alphas=MONOTONICITY_ALPHAS, seed: int = 1, jobs: int = 1,
                       tol_lower: float = 1e-9, tol_upper: float = 1e-8) -> VerificationReport:
    """For ``p > q``: ``0 <= h_q - h_p <= log q/(q-1) - log p/(p-1)``."""
    alphas = tuple(float(a) for a in alphas)
    rep = VerificationReport("monotonicity", {"samples": samples, "alphas": list(alphas), "seed": seed})
    rows = run_cases(_monotonicity_case, samples, (seed, alphas), jobs)
    for key, tol, text in (("lower", tol_lower, "h_q - h_p >= 0 for p > q"),
                           ("upper", tol_upper, "h_q - h_p <= log q/(q-1) - log p/(p-1)")):
        r = min(rows, key=lambda row: row[key])
        rep.add(Check(f"{key}_slack", r[key] >= -tol, r[key], -tol,
                      {"case": r["case"], "seed": r["seed"]}, text))
    return rep.finish()


# -- Reverse EPI -----------------------------------------------------------------------

def _epi_case(i: int, seed: int, alphas: tuple, regime: str, grid: GridConfig) -> list[dict]:
    s = case_seed(seed, i)
    sym = regime == SYMMETRIC
    rng = np.random.default_rng([seed, i, 7])
    x = sample_logconcave(s, SamplerConfig(symmetric=sym))
    y = sample_logconcave(s + CASE_STRIDE // 2, SamplerConfig(symmetric=sym)).rescaled(
        float(np.exp(rng.uniform(-math.log(2), math.log(2)))))
    g = convolve(x, y, grid)
    rows = []
    for a in alphas:
        h = grid_renyi_entropy(g, a)
        n_sum = math.exp(2 * h.value)
        n_x, n_y = math.exp(2 * renyi_entropy(x, a)), math.exp(2 * renyi_entropy(y, a))
        cap = upper_constant(a) / lower_constant(a) * (1 if sym else 2)
        ratio = n_sum / (n_x + n_y)
        rows.append({"case": i, "seed": s, "alpha": a, "ratio": ratio, "cap": cap,
                     "slack": cap - ratio, "variance_error": g.variance() - x.variance() - y.variance()})
    return rows


def reverse_epi_sweep(regime: str = SYMMETRIC, pairs: int = 500, alphas=None, seed: int = 1,
                      jobs: int = 1, tol: float = 1e-6, grid: GridConfig = GridConfig(),
                      include_oracle: bool = True) -> VerificationReport:
    if alphas is None:
        alphas = (1.5, 2.0) if regime == SYMMETRIC else (2.0,)
    alphas = tuple(resolve_alpha(a) for a in alphas)
    for a in alphas:
        if (regime == SYMMETRIC and a < 1) or (regime == GENERAL and a < 2):
            raise ValueError(f"alpha={a} outside the {regime} regime")
    rep = VerificationReport("epi-check", {"regime": regime, "pairs": pairs, "alphas": list(alphas),
                                           "seed": seed, "tolerance": tol, "grid": grid.to_dict()})
    rows = [r for case in run_cases(_epi_case, pairs, (seed, alphas, regime, grid), jobs) for r in case]
    for a in alphas:
        sub = [r for r in rows if r["alpha"] == a]
        w = Worst.of(sub)
        top = max(r["ratio"] for r in sub)
        rep.add(Check(f"ratio_below_cap[alpha={a:.6g}]", w.value >= -tol, w.value, -tol,
                      {"case": w.case, "seed": case_seed(seed, w.case), "alpha": a,
                       "max_ratio": top, "cap": sub[0]["cap"]},
                      "N(X+Y) <= cap * (N(X) + N(Y))"))
    if include_oracle:
        rep.add(uniform_sum_oracle_check(grid))
    return rep.finish()


def uniform_sum_oracle_check(grid: GridConfig = GridConfig(), tol: float = 1e-6) -> Check:
    """Uniform(1) * Uniform(1) is the triangle on [-2, 2]; its order-2 entropy is log 3."""
    u = Uniform(1.0).to_piecewise()
    h = grid_renyi_entropy(convolve(u, u, grid), 2.0).value
    err = abs(h - math.log(3.0))
    return Check("uniform_sum_oracle", err <= tol, err, tol, {"alpha": 2.0},
                 "grid h_2 of the triangle density vs log 3")


# -- Relative alpha-entropy -------------------------------------------------------------

def _relative_case(i: int, seed: int, alphas: tuple) -> list[dict]:
    s = case_seed(seed, i)
    x = sample_logconcave(s, SamplerConfig(symmetric=True))
    rows = []
    for a in alphas:
        r = relative_entropy_check(x, a)
        rows.append({"case": i, "seed": s, "alpha": a, "divergence": r.divergence,
                     "gap_slack": r.gap_slack, "constant_slack": r.constant_slack,
                     "self": relative_alpha_entropy(x, x, a)})
    return rows


def relative_sweep(samples: int = 200, alphas=(1.5, 2.0, 3.0), seed: int = 1, jobs: int = 1,
                   tol_gap: float = 1e-6, tol_constant: float = 1e-4,
                   tol_self: float = 1e-9) -> VerificationReport:
    alphas = tuple(resolve_alpha(a) for a in alphas)
    rep = VerificationReport("relative-check", {"samples": samples, "alphas": list(alphas), "seed": seed})
    rows = [r for case in run_cases(_relative_case, samples, (seed, alphas), jobs) for r in case]
    for a in alphas:
        sub = [r for r in rows if r["alpha"] == a]
        for key, tol, text in (("gap_slack", tol_gap, "I(X||Z) <= h(Z) - h(X)"),
                               ("constant_slack", tol_constant, "I(X||Z) <= C(alpha)")):
            r = min(sub, key=lambda row: row[key])
            rep.add(Check(f"{key}[alpha={a:.6g}]", r[key] >= -tol, r[key], -tol,
                          {"case": r["case"], "seed": r["seed"], "alpha": a}, text))
        r = max(sub, key=lambda row: abs(row["self"]))
        rep.add(Check(f"self_divergence[alpha={a:.6g}]", abs(r["self"]) <= tol_self, abs(r["self"]),
                      tol_self, {"case": r["case"], "seed": r["seed"], "alpha": a}, "I(X||X) = 0"))
    return rep.finish()


# -- constants table ----------------------------------------------------------------------

def constants_table(alphas: Sequence[float]) -> list[dict]:
    rows = []
    for a in alphas:
        a = resolve_alpha(a)
        s = sandwich_constants(a)
        rows.append({"alpha": a, "c_minus": s.c_minus, "c_plus": s.c_plus,
                     "c_alpha": relative_bound_constant(a)})
    return rows


def alpha_grid(spec: str) -> list[float]:
    """``lo:hi:n`` (inclusive, linear) or a comma list."""
    if ":" in spec:
        lo, hi, n = spec.split(":")
        return [float(v) for v in np.linspace(float(lo), float(hi), int(n))]
    return [resolve_alpha(t) for t in spec.split(",") if t.strip()]


def c_minus_branch_gap(width) -> float:
    """``|2 a^(2/(a-1)) - 12|`` maximised over the alpha* enclosure endpoints, in doubles."""
    enc = alpha_star(width)
    return max(abs(2.0 * float(x) ** (2.0 / (float(x) - 1.0)) - 12.0) for x in (enc.lo, enc.hi))
