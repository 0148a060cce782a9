"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from collections.abc import Sequence

import numpy as np

from .cv import CvPlan, cv_select
from .errors import DataError, NumericError, UndefinedMeanError
from .estimators import BANDABLE_METHODS, METHODS, EstimatorOptions, fit, normalize_method
from .experiment import ExperimentConfig, format_report, run_experiment
from .io import read_data_csv, write_edges_csv, write_matrix_csv
from .masked import MaskedMatrix, generalized_moments, pairwise_counts
from .models import effective_sample_sizes
from .sparse import ThresholdRule, mcc, recovery_condition_holds, support

EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse would exit with status 2
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _rule(text: str) -> ThresholdRule:
    try:
        return ThresholdRule.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _add_tuning(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--rule", type=_rule, default=ThresholdRule("soft"),
                    help="thresholding rule: soft, hard or alasso:ETA (default soft)")
    sp.add_argument("--cv", action="store_true", help="choose k or delta by cross-validation")
    sp.add_argument("--K", type=int, default=5, help="CV: 1/K of the samples form the validation group")
    sp.add_argument("--H", type=int, default=5, help="CV: number of random splits")
    sp.add_argument("--N", type=int, default=20, help="CV: grid resolution")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--strict-bullet", action="store_true",
                    help="bullet baseline with the printed 1 - rho normalization")
    sp.add_argument("--threshold-diagonal", action="store_true",
                    help="also threshold diagonal entries")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="misscov", description="Covariance estimation from incomplete data.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    est = sub.add_parser("estimate", help="estimate a covariance matrix from a CSV")
    est.add_argument("input")
    est.add_argument("--method", default="at", help=f"one of {', '.join(METHODS)}")
    est.add_argument("--k", type=int, help="block size / bandwidth")
    est.add_argument("--delta", type=float, help="threshold constant (default 2 without --cv)")
    est.add_argument("--pd", action="store_true", help="positive-definite correction (at methods)")
    est.add_argument("--output", "-o", help="estimate CSV (p x p)")
    _add_tuning(est)

    sup = sub.add_parser("support", help="export the support of the adaptive thresholding estimate")
    sup.add_argument("input")
    sup.add_argument("--delta", type=float, help="threshold constant (default 2 without --cv)")
    sup.add_argument("--gamma-check", type=float, metavar="GAMMA",
                     help="flag edges whose plug-in size exceeds (4+GAMMA) times their noise level")
    sup.add_argument("--output", "-o", help="edges CSV (i, j, value)")
    sup.add_argument("--degrees", help="per-variable degree CSV")
    sup.add_argument("--compare", metavar="CSV", help="second data set; prints the MCC of the two supports")
    _add_tuning(sup)

    sim = sub.add_parser("simulate", help="run a Monte-Carlo experiment from a JSON config")
    sim.add_argument("config")
    sim.add_argument("--output", "-o", help="report TSV (overrides the config's output)")
    sim.add_argument("--seed", type=int, help="override the config seed")
    sim.add_argument("--jobs", type=int, default=1, help="parallel worker processes")

    eff = sub.add_parser("effective-n", help="print n, n_pair, n_single and n_min for a CSV")
    eff.add_argument("input")
    eff.add_argument("--seed", type=int, default=0, help="accepted for uniformity; unused")
    return parser


def _load(path: str) -> tuple[MaskedMatrix, list[str]]:
    M, names = read_data_csv(path)
    missing = pairwise_counts(M).unobserved_variables()
    if missing:
        raise UndefinedMeanError(missing, names)
    return M, names


def _options(args: argparse.Namespace) -> EstimatorOptions:
    return EstimatorOptions(
        rule=args.rule,
        threshold_diagonal=args.threshold_diagonal,
        strict_bullet=args.strict_bullet,
    )


def _tune(args: argparse.Namespace, M: MaskedMatrix, method: str, opts: EstimatorOptions) -> tuple[float, str]:
    bandable = method in BANDABLE_METHODS
    fixed = getattr(args, "k", None) if bandable else args.delta
    if args.cv:
        if fixed is not None:
            raise UsageError(f"--cv cannot be combined with --{'k' if bandable else 'delta'}")
        if method == "tp":
            raise UsageError("tp needs an even k and is not cross-validated; pass --k")
        try:
            plan = CvPlan(args.K, args.H, args.N, seed=args.seed)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        return cv_select(M, method, plan, opts).t_star, "cv"
    if bandable:
        if fixed is None:
            raise UsageError(f"method {method} needs --k or --cv")
        if fixed < 1:
            raise UsageError("--k must be at least 1")
        return min(fixed, M.p), "fixed"
    if getattr(args, "k", None) is not None:
        raise UsageError(f"--k does not apply to method {method}")
    return (2.0 if fixed is None else fixed), "fixed"


def _summary(M: MaskedMatrix) -> list[str]:
    counts = pairwise_counts(M)
    n_pair, n_single = effective_sample_sizes(counts)
    return [f"n\t{M.n}", f"p\t{M.p}", f"n_min\t{counts.n_min}",
            f"n_pair\t{n_pair:.6g}", f"n_single\t{n_single:.6g}"]


def cmd_estimate(args: argparse.Namespace) -> int:
    try:
        method = normalize_method(args.method)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if args.pd:
        if method not in ("at", "at+"):
            raise UsageError("--pd applies to the at method only")
        method = "at+"
    M, names = _load(args.input)
    opts = _options(args)
    t, how = _tune(args, M, method, opts)
    est = fit(M, method, t, opts)
    if args.output:
        write_matrix_csv(args.output, est.matrix, names)
    print("\n".join(_summary(M)))
    print(f"method\t{est.method}")
    print(f"tuning\t{t:g}\t{how}")
    return 0


def _support_of(args: argparse.Namespace, M: MaskedMatrix):
    opts = _options(args)
    t, how = _tune(args, M, "at", opts)
    return fit(M, "at", t, opts), t, how


def cmd_support(args: argparse.Namespace) -> int:
    M, names = _load(args.input)
    est, t, how = _support_of(args, M)
    supp = support(est.matrix)
    strong = None
    if args.gamma_check is not None:
        counts = pairwise_counts(M)
        mom = generalized_moments(M, counts)
        strong = recovery_condition_holds(mom.cov, mom.theta, counts, args.gamma_check)
    edges = []
    for i, j in sorted(supp.edges):
        row = [names[i], names[j], float(est.matrix[i, j])]
        if strong is not None:
            row.append(int(strong[i, j]))
        edges.append(row)
    if args.output:
        header = ["i", "j", "value"] + (["strong"] if strong is not None else [])
        write_edges_csv(args.output, edges, header)
    deg = supp.degrees()
    order = sorted(range(M.p), key=lambda v: (-deg[v], v))
    if args.degrees:
        write_edges_csv(args.degrees, [[names[v], int(deg[v])] for v in order], ["variable", "count"])
    print("\n".join(_summary(M)))
    print(f"tuning\t{t:g}\t{how}")
    print(f"edges\t{len(supp)}")
    if strong is not None:
        print(f"strong_edges\t{sum(e[-1] for e in edges)}")
    for v in order[:10]:
        if deg[v] == 0:
            break
        print(f"degree\t{names[v]}\t{deg[v]}")
    if args.compare:
        M2, _ = _load(args.compare)
        if M2.p != M.p:
            raise DataError(f"--compare data has p={M2.p}, expected {M.p}")
        est2, _, _ = _support_of(args, M2)
        print(f"mcc\t{mcc(supp, support(est2.matrix), M.p):.6f}")
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    cfg = ExperimentConfig.from_json(args.config)
    if args.seed is not None:
        cfg = ExperimentConfig.from_dict({**cfg.__dict__, "seed": args.seed})
    if args.jobs < 1:
        raise UsageError("--jobs must be at least 1")
    report = format_report(cfg, run_experiment(cfg, jobs=args.jobs))
    out = args.output or cfg.output
    if out:
        with open(out, "w") as fh:
            fh.write(report)
    else:
        sys.stdout.write(report)
    return 0


def cmd_effective_n(args: argparse.Namespace) -> int:
    M, _ = read_data_csv(args.input)
    print("\n".join(_summary(M)))
    return 0


_COMMANDS = {
    "estimate": cmd_estimate,
    "support": cmd_support,
    "simulate": cmd_simulate,
    "effective-n": cmd_effective_n,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # usage errors and --help
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"misscov: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"misscov: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (NumericError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"misscov: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
