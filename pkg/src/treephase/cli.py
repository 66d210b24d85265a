"""Command-line front door.

Every subcommand validates its inputs, runs the corresponding library
operation and writes JSON (or CSV where documented) to stdout or --out.
Exit codes: 0 success, 2 invalid input, 3 no-result outcomes, 4 budget
errors.  Threshold verdicts are labeled theorem-certified, Monte Carlo
verdicts evidence.
"""

from __future__ import annotations

import argparse
import sys
from typing import Optional

import numpy as np

from . import classify as _classify
from . import simulate as _simulate
from .errors import BudgetError, NoResult, TreePhaseError, ValidationError
from .measures import (
    DiscreteMeasure,
    chernoff_min,
    essential_range_group,
    hellinger_sq,
    make_measure,
    make_pair,
    mix,
)
from .serialize import fmt_float, load_measure, render_csv, render_json
from .trees import TreeSpec, poincare_exponent

DEFAULT_SEED = 0


def _add_measure_arg(parser: argparse.ArgumentParser, name: str, help_text: str) -> None:
    parser.add_argument(f"--{name}", help=f"{help_text} (inline comma-separated weights)")
    parser.add_argument(f"--{name}-file", help=f"{help_text} (JSON file with weights)")


def _measure(args: argparse.Namespace, name: str) -> DiscreteMeasure:
    inline = getattr(args, name.replace("-", "_"))
    path = getattr(args, name.replace("-", "_") + "_file")
    if inline is not None and path is not None:
        print(
            f"warning: both --{name} and --{name}-file given; inline wins",
            file=sys.stderr,
        )
    if inline is not None:
        try:
            weights = [float(part) for part in inline.split(",")]
        except ValueError:
            raise ValidationError(f"--{name} expects comma-separated reals, got {inline!r}")
        return make_measure(weights)
    if path is not None:
        return load_measure(path)
    raise ValidationError(f"one of --{name} or --{name}-file is required")


def _pair(args: argparse.Namespace):
    return make_pair(_measure(args, "mu0"), _measure(args, "mu1"))


def _delta(args: argparse.Namespace) -> float:
    if getattr(args, "tree", None) is not None:
        if getattr(args, "delta", None) is not None:
            raise ValidationError("give either --tree or --delta, not both")
        return poincare_exponent(TreeSpec.parse(args.tree))
    if getattr(args, "delta", None) is None:
        raise ValidationError("one of --tree or --delta is required")
    return args.delta


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="treephase",
        description="Phase thresholds and Monte Carlo diagnostics for "
        "tree-indexed product measures",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, seed=False, threads=False, fmt=False):
        p.add_argument("--out", help="write output to this path instead of stdout")
        if fmt:
            p.add_argument("--format", choices=("json", "csv"), default="json")
        if seed:
            p.add_argument("--seed", type=int, default=DEFAULT_SEED)
        if threads:
            p.add_argument(
                "--threads",
                type=int,
                default=None,
                help="worker count (output is independent of it); "
                "defaults to $TREEPHASE_THREADS or 1",
            )

    p = sub.add_parser("hellinger", help="squared Hellinger distance and affinity")
    _add_measure_arg(p, "mu", "first measure")
    _add_measure_arg(p, "nu", "second measure")
    common(p)

    p = sub.add_parser("mix", help="convex interpolation (1-t)*nu + t*mu")
    _add_measure_arg(p, "nu", "anchor measure")
    _add_measure_arg(p, "mu", "target measure")
    p.add_argument("--t", type=float, required=True)
    common(p)

    p = sub.add_parser("chernoff", help="minimize the block-sum MGF over [0,1]")
    _add_measure_arg(p, "mu0", "toward-root measure")
    _add_measure_arg(p, "mu1", "away-from-root measure")
    common(p)

    p = sub.add_parser("range-group", help="essential-range subgroup detection")
    _add_measure_arg(p, "mu0", "toward-root measure")
    _add_measure_arg(p, "mu1", "away-from-root measure")
    p.add_argument("--generators", help="extra comma-separated log generators")
    common(p)

    p = sub.add_parser("poincare", help="Poincare exponent of a tree spec")
    p.add_argument("--tree", required=True, help="regular:q or cayley:d")
    common(p)

    p = sub.add_parser("classify", help="theorem-certified phase verdict")
    p.add_argument("--tree", help="regular:q or cayley:d (sets delta)")
    p.add_argument("--delta", type=float, help="explicit Poincare exponent")
    p.add_argument("--regular-full-orbit", action="store_true")
    _add_measure_arg(p, "mu0", "toward-root measure")
    _add_measure_arg(p, "mu1", "away-from-root measure")
    common(p)

    p = sub.add_parser("krieger", help="Krieger flow from the essential range")
    _add_measure_arg(p, "mu0", "toward-root measure")
    _add_measure_arg(p, "mu1", "away-from-root measure")
    p.add_argument("--generators", help="extra comma-separated log generators")
    common(p)

    p = sub.add_parser("spectral", help="free-group spectral radius report")
    p.add_argument("--d", type=int, required=True, help="free group rank")
    _add_measure_arg(p, "mu0", "toward-root measure")
    _add_measure_arg(p, "mu1", "away-from-root measure")
    common(p)

    p = sub.add_parser("phase-scan", help="threshold crossing of the interpolated family")
    p.add_argument("--delta", type=float, required=True)
    _add_measure_arg(p, "nu", "anchor measure")
    _add_measure_arg(p, "mu0", "toward-root measure")
    _add_measure_arg(p, "mu1", "away-from-root measure")
    p.add_argument("--grid", type=int, default=129)
    p.add_argument("--bisect-tol", type=float, default=1e-10)
    common(p, fmt=True)

    sim = sub.add_parser("simulate", help="Monte Carlo diagnostics")
    simsub = sim.add_subparsers(dest="sim_command", required=True)

    p = simsub.add_parser("martingale", help="sphere martingale sample means")
    p.add_argument("--tree", required=True)
    _add_measure_arg(p, "mu0", "toward-root measure")
    _add_measure_arg(p, "mu1", "away-from-root measure")
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--trials", type=int, required=True)
    common(p, seed=True, threads=True)

    p = simsub.add_parser("recurrence", help="orbital growth diagnostic")
    p.add_argument("--tree", required=True)
    _add_measure_arg(p, "mu0", "toward-root measure")
    _add_measure_arg(p, "mu1", "away-from-root measure")
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--epsilon", type=float, default=_simulate.DEFAULT_EPSILON)
    p.add_argument("--slope-floor", type=float, default=_simulate.DEFAULT_SLOPE_FLOOR)
    common(p, seed=True, threads=True, fmt=True)

    p = simsub.add_parser("coupling", help="chi-square test of the coin coupling")
    _add_measure_arg(p, "nu", "anchor measure")
    _add_measure_arg(p, "mu", "target measure")
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--samples", type=int, required=True)
    common(p, seed=True, threads=True)

    p = simsub.add_parser("shift", help="integer-shift growth diagnostic")
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--window", type=int, required=True)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument(
        "--epsilon",
        type=float,
        default=None,
        help="Cauchy threshold; defaults to 1/(8*window)",
    )
    common(p, seed=True, threads=True, fmt=True)

    p = sub.add_parser("percolation", help="block percolation report")
    p.add_argument("--tree", required=True)
    _add_measure_arg(p, "mu0", "toward-root measure")
    _add_measure_arg(p, "mu1", "away-from-root measure")
    p.add_argument("--M", type=int, required=True, help="block length")
    p.add_argument("--mc-trials", type=int, default=None)
    p.add_argument("--mc-depth", type=int, default=14)
    common(p, seed=True, threads=True)

    p = sub.add_parser("block-length", help="smallest admissible block length")
    _add_measure_arg(p, "mu0", "toward-root measure")
    _add_measure_arg(p, "mu1", "away-from-root measure")
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--mmax", type=int, required=True)
    common(p)

    return parser


def _generators(args: argparse.Namespace):
    if getattr(args, "generators", None):
        return [float(part) for part in args.generators.split(",")]
    return None


def _diag_payload(diag: _simulate.RecurrenceDiagnostic, seed: int) -> dict:
    mean_log_t = diag.log_T.mean(axis=0)
    return {
        "verdict": diag.verdict,
        "label": "evidence",
        "slope": diag.slope,
        "ci": [diag.slope_ci[0], diag.slope_ci[1]],
        "slope_floor": diag.slope_floor,
        "epsilon": diag.epsilon,
        "converged_fraction": diag.converged_fraction,
        "truncation_bias": diag.truncation_bias,
        "depths": list(diag.depths),
        "mean_log_T": [float(v) for v in mean_log_t],
        "trials": int(diag.log_T.shape[0]),
        "seed": seed,
    }


def _diag_csv(diag: _simulate.RecurrenceDiagnostic) -> str:
    rows = []
    for trial in range(diag.log_T.shape[0]):
        for j, depth in enumerate(diag.depths):
            rows.append((trial, depth, float(diag.log_T[trial, j])))
    return render_csv(("trial", "depth", "log_T"), rows)


def _dispatch(args: argparse.Namespace):
    """Returns (text, exit_code)."""
    cmd = args.command

    if cmd == "hellinger":
        mu = _measure(args, "mu")
        nu = _measure(args, "nu")
        h2 = hellinger_sq(mu, nu)
        return render_json({"h2": h2, "affinity": 1.0 - h2}), 0

    if cmd == "mix":
        out = mix(_measure(args, "nu"), _measure(args, "mu"), args.t)
        return render_json({"weights": list(out.weights)}), 0

    if cmd == "chernoff":
        pair = _pair(args)
        t_star, value = chernoff_min(pair)
        return render_json({"t_star": t_star, "value": value}), 0

    if cmd == "range-group":
        report = essential_range_group(_pair(args), _generators(args))
        return (
            render_json(
                {
                    "kind": report.kind,
                    "generator": report.generator,
                    "witnesses": list(report.witnesses),
                    "heuristic": report.heuristic,
                }
            ),
            0,
        )

    if cmd == "poincare":
        spec = TreeSpec.parse(args.tree)
        return render_json({"tree": spec.encode(), "delta": poincare_exponent(spec)}), 0

    if cmd == "classify":
        delta = _delta(args)
        result = _classify.classify_tree_action(
            delta, _pair(args), regular_full_orbit=args.regular_full_orbit
        )
        return (
            render_json(
                {
                    "phase": result.phase,
                    "affinity": result.affinity,
                    "threshold": result.threshold,
                    "delta": result.delta,
                    "label": "theorem-certified",
                }
            ),
            0,
        )

    if cmd == "krieger":
        report = _classify.krieger_type(_pair(args), _generators(args))

        def flow(f):
            doc = {"kind": f.kind}
            if f.lam is not None:
                doc["lambda"] = f.lam
            return doc

        return (
            render_json(
                {
                    "lambda_group": {
                        "kind": report.lambda_group.kind,
                        "generator": report.lambda_group.generator,
                        "heuristic": report.lambda_group.heuristic,
                    },
                    "krieger": flow(report.krieger),
                    "flow_of_weights": flow(report.flow_of_weights),
                    "caveat": report.caveat,
                }
            ),
            0,
        )

    if cmd == "spectral":
        report = _classify.spectral_radius_free(args.d, _pair(args))
        return (
            render_json(
                {
                    "rho_action": report.rho_action,
                    "rho_group": report.rho_group,
                    "regime": report.regime,
                    "affinity": report.affinity,
                    "d": report.d,
                }
            ),
            0,
        )

    if cmd == "phase-scan":
        pair = _pair(args)
        nu = _measure(args, "nu")
        result = _classify.phase_scan(
            args.delta, nu, pair, grid_points=args.grid, bisect_tol=args.bisect_tol
        )
        code = 0 if result.t1 is not None else 3
        if args.format == "csv":
            rows = []
            for t, aff in result.grid:
                if abs(aff - result.threshold) <= _classify.CRITICAL_TOL:
                    phase = _classify.Phase.CRITICAL_UNKNOWN
                elif aff > result.threshold:
                    phase = _classify.Phase.WEAKLY_MIXING
                else:
                    phase = _classify.Phase.DISSIPATIVE
                rows.append((t, aff, result.threshold, phase))
            return render_csv(("t", "affinity", "threshold", "phase"), rows), code
        return (
            render_json(
                {
                    "threshold": result.threshold,
                    "t1": result.t1,
                    "crossings": result.crossings,
                    "monotone": result.monotone,
                    "delta": result.delta,
                    "grid": [[t, a] for t, a in result.grid],
                }
            ),
            code,
        )

    if cmd == "simulate":
        return _dispatch_simulate(args)

    if cmd == "percolation":
        spec = TreeSpec.parse(args.tree)
        report = _simulate.percolation_report(
            spec,
            _pair(args),
            args.M,
            mc_trials=args.mc_trials,
            seed=args.seed,
            mc_depth=args.mc_depth,
            threads=args.threads,
        )
        return (
            render_json(
                {
                    "M": report.M,
                    "p": report.p,
                    "criterion": report.criterion,
                    "supercritical": report.supercritical,
                    "survival": report.survival,
                    "mc_survival": report.mc_survival,
                    "mc_reach": report.mc_reach,
                    "mc_trials": report.mc_trials,
                    "mc_depth": report.mc_depth,
                    "seed": args.seed,
                }
            ),
            0,
        )

    if cmd == "block-length":
        pair = _pair(args)
        m = _simulate.find_block_length(pair, args.delta, args.mmax)
        r_m = _simulate.block_sum_distribution(pair, m)
        return (
            render_json(
                {
                    "M": m,
                    "p": r_m.tail_prob(0.0),
                    "bound": float(np.exp(-m * args.delta)),
                }
            ),
            0,
        )

    raise ValidationError(f"unknown command {cmd!r}")


def _dispatch_simulate(args: argparse.Namespace):
    sim = args.sim_command

    if sim == "martingale":
        spec = TreeSpec.parse(args.tree)
        w = _simulate.martingale_mc(
            spec, _pair(args), args.depth, args.trials, seed=args.seed, threads=args.threads
        )
        mean = w.mean(axis=0)
        if args.trials > 1:
            stderr = w.std(axis=0, ddof=1) / np.sqrt(args.trials)
        else:
            stderr = np.zeros_like(mean)
        return (
            render_json(
                {
                    "depths": list(range(args.depth + 1)),
                    "mean": [float(v) for v in mean],
                    "stderr": [float(v) for v in stderr],
                    "trials": args.trials,
                    "seed": args.seed,
                    "label": "evidence",
                }
            ),
            0,
        )

    if sim == "recurrence":
        spec = TreeSpec.parse(args.tree)
        diag = _simulate.recurrence_diagnostic(
            spec,
            _pair(args),
            args.depth,
            args.trials,
            seed=args.seed,
            epsilon=args.epsilon,
            slope_floor=args.slope_floor,
            threads=args.threads,
        )
        if args.format == "csv":
            return _diag_csv(diag), 0
        return render_json(_diag_payload(diag, args.seed)), 0

    if sim == "coupling":
        result = _simulate.coupling_pushforward_test(
            _measure(args, "nu"), _measure(args, "mu"), args.t, args.samples, seed=args.seed
        )
        return (
            render_json(
                {
                    "statistic": result.statistic,
                    "p_value": result.p_value,
                    "observed": list(result.observed),
                    "expected": list(result.expected),
                    "samples": result.samples,
                    "t": result.t,
                    "seed": args.seed,
                }
            ),
            0,
        )

    if sim == "shift":
        diag = _simulate.shift_recurrence_diagnostic(
            args.t, args.window, args.trials, seed=args.seed, epsilon=args.epsilon
        )
        if args.format == "csv":
            return _diag_csv(diag), 0
        return render_json(_diag_payload(diag, args.seed)), 0

    raise ValidationError(f"unknown simulate subcommand {sim!r}")


def run(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        text, code = _dispatch(args)
    except NoResult as exc:
        text = render_json({"error": type(exc).__name__, "reason": getattr(exc, "reason", str(exc))})
        code = 3
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except BudgetError as exc:
        print(f"budget error: {exc}", file=sys.stderr)
        return 4

    if not text.endswith("\n"):
        text += "\n"
    out = getattr(args, "out", None)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
