"""Command-line entry point ``lc-renyi``.

Exit codes: 0 pass, 1 a check failed, 2 bad arguments or input, 3 a size
or grid budget was exceeded.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from fractions import Fraction

from . import bounds, certificates, gfunction, sweeps
from .bounds import GENERAL, SYMMETRIC, BudgetExceeded
from .convolution import GridConfig
from .density import density_from_spec, named_from_spec
from .entropy import entropy_power, renyi_entropy
from .epi import relative_bound_constant, sandwich_constants
from .report import Check, VerificationReport

EXIT_PASS, EXIT_FAIL, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2, 3


class UsageError(ValueError):
    pass


def _fraction(text: str) -> Fraction:
    try:
        q = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational or decimal number: {text!r}")
    if q <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return q


def _alphas(text: str) -> list[float]:
    try:
        return sweeps.alpha_grid(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad alpha list {text!r}")


def _load_density(args, flag: str = "density"):
    inline = getattr(args, flag, None)
    path = getattr(args, f"{flag}_file", None)
    if inline and path:
        raise UsageError(f"give either --{flag.replace('_', '-')} or --{flag.replace('_', '-')}-file")
    try:
        if path:
            with open(path) as fh:
                spec = json.load(fh)
        elif inline:
            spec = json.loads(inline)
        else:
            return None
        return spec
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read density: {exc}") from None


# -- command handlers -------------------------------------------------------------------

def cmd_alpha_star(args) -> VerificationReport:
    enc = bounds.alpha_star(args.width)
    rep = VerificationReport("alpha-star", {"width": str(args.width)})
    lo, hi = enc.to_strings()["lo"], enc.to_strings()["hi"]
    residual = bounds.threshold_function_enclosure(enc.mid, 256)
    res = float(max(abs(residual.lo), abs(residual.hi)))
    rep.add(Check("width_within_bound", enc.width <= args.width, float(enc.width), float(args.width)))
    rep.add(Check("midpoint_residual", res <= 10 * float(args.width) + 1e-300, res, 10 * float(args.width),
                  description="|2 log m - (m-1) log 6| at the midpoint"))
    rep.extra.update({"lo": lo, "hi": hi, "mid_decimal": f"{float(enc.mid):.17g}",
                      "width": float(enc.width)})
    return rep.finish()


def cmd_bound(args) -> VerificationReport:
    rep = VerificationReport("bound", {"alpha": args.alpha, "regime": args.regime,
                                       "variance": args.variance})
    spec = bounds.BoundSpec.of(args.alpha, args.regime)
    rep.extra.update({"constant": spec.constant, "branch": spec.branch,
                      "bound": spec.value(args.variance),
                      "alpha_star": bounds.alpha_star_float()})
    return rep.finish()


def cmd_constants(args) -> VerificationReport:
    alphas = args.alphas or [args.alpha]
    rep = VerificationReport("constants", {"alphas": alphas})
    rows = []
    for a in alphas:
        s = sandwich_constants(a)
        rows.append({**s.to_dict(), "c_alpha": relative_bound_constant(a),
                     "c_alpha_without_log_term": relative_bound_constant(a, drop_log_term=True),
                     "symmetric_cap": s.c_plus / s.c_minus, "general_cap": 2 * s.c_plus / s.c_minus})
        rep.add(Check(f"ordered[alpha={a:.6g}]", s.c_minus <= s.c_plus, s.c_plus - s.c_minus, 0.0))
    rep.cases = rows
    return rep.finish()


def cmd_entropy(args) -> VerificationReport:
    spec = _load_density(args)
    if spec is None:
        raise UsageError("entropy needs --density or --density-file")
    try:
        f = density_from_spec(spec, resolution=args.resolution)
        named = named_from_spec(spec)
    except (ValueError, TypeError) as exc:
        raise UsageError(str(exc)) from None
    rep = VerificationReport("entropy", {"density": spec, "alphas": args.alphas})
    var = f.variance()
    rows = []
    for a in args.alphas:
        row = {"alpha": a, "renyi_entropy": renyi_entropy(f, a), "entropy_power": entropy_power(f, a)}
        if hasattr(named, "renyi_entropy") and not hasattr(named, "knots"):
            try:
                row["closed_form"] = named.renyi_entropy(a)
            except (ValueError, NotImplementedError):
                pass
        regime = SYMMETRIC if f.symmetric else (GENERAL if a >= 2 else None)
        if regime:
            row["slack"] = bounds.theorem_slack(f, a, regime)
            row["regime"] = regime
        rows.append(row)
    rep.extra.update({"variance": var, "mean": f.mean(), "symmetric": f.symmetric,
                      "support": list(f.support), "segments": f.n_segments})
    rep.cases = rows
    return rep.finish()


def cmd_verify_theorem(args) -> VerificationReport:
    alphas = args.alphas
    if args.regime == GENERAL and alphas and min(alphas) < 2:
        raise UsageError("the general regime is only stated for alpha >= 2")
    return sweeps.theorem_sweep(args.regime, args.samples, alphas, args.seed, args.jobs, args.tolerance)


def cmd_certify(args) -> VerificationReport:
    part = args.part
    if part in ("d", "e") and args.mode != "grid":
        alpha = None
        if args.alpha is not None:
            alpha = certificates.RationalInterval(Fraction(str(args.alpha)))
        cert = certificates.certify_series(part, args.nmax, args.enclosure_width, alpha=alpha)
        rep = VerificationReport("certify", {"part": part, "mode": "series", "nmax": args.nmax,
                                             "enclosure_width": str(args.enclosure_width),
                                             "alpha": args.alpha})
        rep.add(Check("sign_pattern", cert.pattern.certified, float(len(cert.pattern.indeterminate)), 0.0,
                      description="coefficient signs on the alpha* enclosure"))
        if cert.direct_tail is not None:
            rep.add(Check("direct_tail_signs", cert.direct_tail.certified,
                          float(len(cert.direct_tail.violations) + len(cert.direct_tail.indeterminate)), 0.0))
        rep.add(Check("tail_bound", cert.tail.passed, float(len(cert.tail.failing())), 0.0,
                      description="analytic tail bound, prefix plus induction step"))
        rep.add(Check("single_sign_change", cert.conclusion, float(cert.conclusion), 1.0))
        grid_rep = gfunction.verify_lemma_tech(_grid_config(args), (part,))
        for c in grid_rep.checks:
            rep.add(c.with_prefix("grid"))
        rep.extra["certificate"] = cert.to_dict(entries=not args.brief)
        return rep.finish()
    rep = gfunction.verify_lemma_tech(_grid_config(args), (part,))
    rep.command = "certify"
    rep.config = {"part": part, "mode": "grid", **rep.config}
    return rep


def _grid_config(args) -> gfunction.GGridConfig:
    return gfunction.GGridConfig(a_max=args.a_max, b_max=args.b_max, step=args.step,
                                     large_a=args.large_a, alpha=args.alpha)


def cmd_epi_check(args) -> VerificationReport:
    grid = GridConfig(min_cells=args.min_cells)
    spec_x, spec_y = _load_density(args), _load_density(args, "density2")
    if spec_x is not None:
        from .epi import reverse_epi_check
        try:
            x = density_from_spec(spec_x)
            y = density_from_spec(spec_y) if spec_y is not None else x
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        rep = VerificationReport("epi-check", {"regime": args.regime, "alphas": args.alphas,
                                               "density": spec_x, "density2": spec_y})
        for a in args.alphas:
            try:
                r = reverse_epi_check(x, y, a, args.regime, grid)
            except ValueError as exc:
                raise UsageError(str(exc)) from None
            rep.add(Check(f"ratio_below_cap[alpha={a:.6g}]", r.slack >= -1e-6, r.slack, -1e-6, r.to_dict()))
        return rep.finish()
    return sweeps.reverse_epi_sweep(args.regime, args.pairs, args.alphas, args.seed, args.jobs, grid=grid)


def cmd_relative_check(args) -> VerificationReport:
    return sweeps.relative_sweep(args.samples, args.alphas, args.seed, args.jobs)


def cmd_sweep(args) -> VerificationReport:
    rep = VerificationReport("sweep", {"alphas": args.alphas})
    rows = sweeps.constants_table(args.alphas)
    for r in rows:
        rep.add(Check(f"ordered[alpha={r['alpha']:.6g}]", r["c_minus"] <= r["c_plus"],
                      r["c_plus"] - r["c_minus"], 0.0))
    rep.cases = rows
    return rep.finish()


def _csv(rep: VerificationReport, command: str) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if command == "sweep":
        w.writerow(["alpha", "c_minus", "c_plus", "c_alpha"])
        for r in rep.cases:
            w.writerow([f"{r[k]:.12g}" for k in ("alpha", "c_minus", "c_plus", "c_alpha")])
    else:
        w.writerow(["name", "pass", "value", "tolerance"])
        for c in rep.checks:
            w.writerow([c.name, int(c.passed), f"{c.value:.12g}", f"{c.tolerance:.12g}"])
    return buf.getvalue()


# -- parser ---------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="lc-renyi",
        description="Variance vs Renyi entropy bounds for one-dimensional log-concave densities: "
                    "closed-form evaluation, seeded falsification sweeps and exact certificates.")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def common(sp, seed=True, jobs=True):
        sp.add_argument("--out", help="write the report here instead of stdout")
        sp.add_argument("--format", choices=("json", "csv"), default="json")
        sp.add_argument("--no-timing", action="store_true", help="omit wall-clock fields (replay diffs)")
        if seed:
            sp.add_argument("--seed", type=int, default=1)
        if jobs:
            sp.add_argument("--jobs", type=int, default=1, help="worker processes")

    sp = sub.add_parser("alpha-star", help="rational enclosure of the threshold order: the root > 1 of "
                                           "2 log a = (a-1) log 6")
    sp.add_argument("--width", type=_fraction, default=Fraction(1, 10**12),
                    help="maximal enclosure width (decimal or p/q)")
    common(sp, seed=False, jobs=False)
    sp.set_defaults(handler=cmd_alpha_star)

    sp = sub.add_parser("bound", help="minimal h_alpha at fixed variance: 0.5 log var + constant "
                                      "(uniform branch below the threshold, exponential above)")
    sp.add_argument("--alpha", type=float, required=True)
    sp.add_argument("--regime", choices=(SYMMETRIC, GENERAL), default=SYMMETRIC)
    sp.add_argument("--variance", type=float, default=1.0)
    common(sp, seed=False, jobs=False)
    sp.set_defaults(handler=cmd_bound)

    sp = sub.add_parser("constants", help="entropy-power sandwich constants C-, C+ and the relative "
                                          "entropy bound C(alpha)")
    sp.add_argument("--alpha", type=float, default=2.0)
    sp.add_argument("--alphas", type=_alphas)
    common(sp, seed=False, jobs=False)
    sp.set_defaults(handler=cmd_constants)

    sp = sub.add_parser("entropy", help="plumbing: Renyi entropies, entropy powers and bound slack "
                                        "of one density")
    sp.add_argument("--density", help="density JSON")
    sp.add_argument("--density-file")
    sp.add_argument("--alphas", type=_alphas, default=[0.5, 1.0, 2.0])
    sp.add_argument("--resolution", type=int, default=None)
    common(sp, seed=False, jobs=False)
    sp.set_defaults(handler=cmd_entropy)

    sp = sub.add_parser("verify-theorem", help="sampled sweep of h_alpha >= 0.5 log var + constant "
                                               "(symmetric regime, or general regime for alpha >= 2)")
    sp.add_argument("--regime", choices=(SYMMETRIC, GENERAL), default=SYMMETRIC)
    sp.add_argument("--samples", type=int, default=1000)
    sp.add_argument("--alphas", type=_alphas, default=None)
    sp.add_argument("--tolerance", type=float, default=1e-8)
    common(sp)
    sp.set_defaults(handler=cmd_verify_theorem)

    sp = sub.add_parser("certify", help="G(a,b) >= 0 ingredients: grid checks of the a-derivatives "
                                        "(parts a-c, chain) and exact series certificates for the "
                                        "two boundary inequalities (parts d, e)")
    sp.add_argument("--part", choices=gfunction.PARTS, required=True)
    sp.add_argument("--mode", choices=("series", "grid"), default="series",
                    help="parts d, e: exact series certificate plus grid check (series) or grid only")
    sp.add_argument("--alpha", type=float, default=None, help="override alpha (negative controls)")
    sp.add_argument("--nmax", type=int, default=200)
    sp.add_argument("--enclosure-width", type=_fraction, default=certificates.DEFAULT_WIDTH)
    sp.add_argument("--a-max", type=float, default=10.0)
    sp.add_argument("--b-max", type=float, default=10.0)
    sp.add_argument("--step", type=float, default=0.1)
    sp.add_argument("--large-a", type=float, default=1e4)
    sp.add_argument("--brief", action="store_true", help="omit per-coefficient entries")
    common(sp, seed=False, jobs=False)
    sp.set_defaults(handler=cmd_certify)

    sp = sub.add_parser("epi-check", help="reverse entropy power inequality N(X+Y) <= cap (N(X)+N(Y)) "
                                          "for independent pairs")
    sp.add_argument("--regime", choices=(SYMMETRIC, GENERAL), default=SYMMETRIC)
    sp.add_argument("--pairs", type=int, default=500)
    sp.add_argument("--alphas", type=_alphas, default=None)
    sp.add_argument("--density")
    sp.add_argument("--density-file")
    sp.add_argument("--density2")
    sp.add_argument("--density2-file")
    sp.add_argument("--min-cells", type=int, default=GridConfig.min_cells)
    common(sp)
    sp.set_defaults(handler=cmd_epi_check)

    sp = sub.add_parser("relative-check", help="relative alpha-entropy to the matched generalized "
                                               "Gaussian: entropy-gap bound and constant bound")
    sp.add_argument("--samples", type=int, default=200)
    sp.add_argument("--alphas", type=_alphas, default=[1.5, 2.0, 3.0])
    common(sp)
    sp.set_defaults(handler=cmd_relative_check)

    sp = sub.add_parser("sweep", help="plumbing: table of C-, C+, C(alpha) over an alpha grid")
    sp.add_argument("--alphas", type=_alphas, default=sweeps.alpha_grid("1.05:10:100"),
                    help="lo:hi:n or a comma list")
    common(sp, seed=False, jobs=False)
    sp.set_defaults(handler=cmd_sweep)
    return p


def _validate(args) -> None:
    if getattr(args, "jobs", 1) < 1:
        raise UsageError("--jobs must be >= 1")
    alphas = getattr(args, "alphas", None) or []
    for a in alphas:
        if not a > 0 or math.isnan(a):
            raise UsageError("alphas must be positive")
    if args.command in ("constants", "sweep", "relative-check"):
        for a in alphas or [getattr(args, "alpha", 2.0)]:
            if not a > 1:
                raise UsageError("this command needs alpha > 1")


def run(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and EXIT_USAGE
    try:
        _validate(args)
        rep = args.handler(args)
    except UsageError as exc:
        print(f"lc-renyi: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BudgetExceeded as exc:
        print(f"lc-renyi: budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except ValueError as exc:
        print(f"lc-renyi: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    text = _csv(rep, args.command) if args.format == "csv" else rep.to_json(timing=not args.no_timing) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    return EXIT_PASS if rep.passed else EXIT_FAIL


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
