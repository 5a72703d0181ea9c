import argparse
import os
import sys
import time
import warnings

import numpy as np

from .couplings import Coupling, marginals_of, validate_distribution
from .entropy import evaluate
from .errors import BudgetExceeded, MecError, NotATree, Rejection, TooLarge
from .exact import as_rational, format_fraction
from .extreme_enumeration import candidate_from_subset
from .local_optimization import verify_local_optimal
from .preprocessing import ResultSaver, coupling_record, marginals_record, read_couplings
from .problems import Problem
from .subset_logic import CandidateSubset
from .support_graph import SupportSet, classify, extend_to_basis, has_circuit
from .tree_oracle import peel_coupling, peel_forest

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_BUDGET = 3
INPUT_EXTENSIONS = (".json", ".csv", ".tsv", ".txt")


def setup_parser():
    """Set up the argument parser for the mec command."""
    parser = argparse.ArgumentParser(
        prog="mec",
        description="Exact minimum-entropy couplings by extreme-point enumeration",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("file", help="Problem file (.json, .csv, .tsv or .txt)")
    common.add_argument("-o", "--out", default=None, help="Write the JSON result here instead of stdout")
    common.add_argument("--timings", action="store_true", help="Add wall-clock timings to the result")
    common.add_argument("--progress", action="store_true", help="Show a progress bar on stderr")

    search = argparse.ArgumentParser(add_help=False)
    search.add_argument(
        "--entropy", choices=["shannon", "renyi", "tsallis"], default=None,
        help="Entropy functional (default: the problem file's, else shannon)",
    )
    search.add_argument("--alpha", type=float, default=None, help="Order of the Renyi or Tsallis entropy")
    search.add_argument("--base", type=float, default=None, help="Logarithm base (default 2)")
    search.add_argument("--tie-tol", type=float, default=None, help="Absolute tolerance for tied minima (default 1e-9)")
    search.add_argument(
        "--no-prefilter", action="store_true",
        help="Solve every candidate subset instead of skipping obvious non-trees",
    )
    search.add_argument("--threads", type=int, default=None, help="Worker processes for the enumeration")
    search.add_argument("--budget", type=int, default=None, help="Largest number of candidate subsets to scan")
    search.add_argument(
        "--save-config", action="store_true",
        help="Write the effective configuration to {prefix}_config.json",
    )

    subparsers.add_parser(
        "solve", parents=[common, search],
        help="Minimum-entropy coupling(s) of the marginals",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    subparsers.add_parser(
        "extremes", parents=[common, search],
        help="Every extreme point with its entropy",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    subparsers.add_parser(
        "verify", parents=[common],
        help="Check a coupling file or a solve result",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    subparsers.add_parser(
        "kappa", parents=[common],
        help="Structure constant of a two-marginal problem",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    return parser


def validate_args(args):
    """Validate the parsed arguments; returns an error message or None."""
    if not os.path.exists(args.file):
        return f"Error: Input file '{args.file}' does not exist"
    if not args.file.endswith(INPUT_EXTENSIONS):
        return f"Error: Input file must be one of: {', '.join(INPUT_EXTENSIONS)}"
    if getattr(args, "threads", None) is not None and args.threads < 1:
        return "Error: --threads must be at least 1"
    if getattr(args, "budget", None) is not None and args.budget < 1:
        return "Error: --budget must be positive"
    if getattr(args, "tie_tol", None) is not None and args.tie_tol < 0:
        return "Error: --tie-tol must be nonnegative"
    return None


def get_output_prefix(args):
    if args.out:
        return os.path.splitext(args.out)[0]
    return os.path.join(os.getcwd(), os.path.splitext(os.path.basename(args.file))[0])


def build_problem(args):
    return Problem.from_file(
        args.file,
        entropy=args.entropy,
        alpha=args.alpha,
        base=args.base,
        tie_tol=args.tie_tol,
        prefilter=False if args.no_prefilter else None,
        threads=args.threads,
        budget=args.budget,
        output_prefix=get_output_prefix(args),
    )


def _problem_header(problem):
    return {
        "dims": list(problem.dims),
        "marginals": marginals_record(problem.marginals),
    }


def _subset_counts(extremes):
    return {
        "extreme_point_count": len(extremes),
        "subsets_scanned": extremes.scanned,
        "subsets_prefiltered": extremes.prefiltered,
        "subsets_nonsingular": extremes.nonsingular,
        "subsets_feasible": extremes.feasible,
    }


def _kappa_or_none(problem):
    if len(problem.marginals) != 2:
        return None
    try:
        return problem.kappa().kappa
    except TooLarge as err:
        warnings.warn(f"kappa skipped: {err}", UserWarning)
        return None


def cmd_solve(args, timings):
    problem = build_problem(args)
    problem.load_data()
    if args.save_config:
        print(f"Configuration saved to {problem.save_config()}", file=sys.stderr)

    start = time.perf_counter()
    results = problem.solve(progress=args.progress)
    timings["solve"] = time.perf_counter() - start
    report = results.report

    document = _problem_header(problem)
    document.update(
        {
            "entropy": problem.functional.params(),
            "tie_tol": problem.tie_tol,
            "min_entropy": report.minimum,
            "minimizers": [
                coupling_record(m, report.values[k])
                for m, k in zip(report.minimizers, report.minimizer_indices)
            ],
            "exact_profile_tie": report.exact_profile_tie,
            "marginal_entropies": results.marginal_entropies,
        }
    )
    document.update(_subset_counts(results.extremes))
    kappa = _kappa_or_none(problem)
    if kappa is not None:
        document["kappa"] = kappa
    print(
        f"Minimum {problem.functional.label}: {report.minimum:.6f} "
        f"({len(report.minimizers)} minimizer(s) among {len(results.extremes)} extreme points)",
        file=sys.stderr,
    )
    return document


def cmd_extremes(args, timings):
    problem = build_problem(args)
    problem.load_data()
    if args.save_config:
        print(f"Configuration saved to {problem.save_config()}", file=sys.stderr)

    start = time.perf_counter()
    extremes = problem.extremes(progress=args.progress)
    timings["enumerate"] = time.perf_counter() - start

    document = _problem_header(problem)
    document["entropy"] = problem.functional.params()
    document.update(_subset_counts(extremes))
    document["extreme_points"] = [
        coupling_record(point, evaluate(problem.functional, point)) for point in extremes
    ]
    print(f"{len(extremes)} extreme points", file=sys.stderr)
    return document


def _marginal_check(values, marginals):
    observed = marginals_of(values)
    mismatches = []
    for axis, (sums, dist) in enumerate(zip(observed, marginals), start=1):
        if len(sums) != len(dist):
            mismatches.append({"axis": axis, "expected_length": len(dist), "observed_length": len(sums)})
            continue
        for z, (s, w) in enumerate(zip(sums, dist), start=1):
            if s != w:
                mismatches.append(
                    {
                        "axis": axis,
                        "coordinate": z,
                        "expected": format_fraction(w),
                        "observed": format_fraction(s),
                        "deficit": format_fraction(w - s),
                    }
                )
    if len(observed) != len(marginals):
        mismatches.append({"expected_axes": len(marginals), "observed_axes": len(observed)})
    return {"passed": not mismatches, "mismatches": mismatches}


def _peeling_check(coupling):
    """Rebuild the coupling from its support by an independent route and compare."""
    support = SupportSet.of(coupling)
    if has_circuit(support):
        return {"checked": False, "reason": "support contains a circuit"}
    if coupling.ndim == 2:
        masses = [list(w) for w in coupling.marginals]
        rebuilt = peel_forest(support, masses)
        agrees = rebuilt is not Rejection.INFEASIBLE and np.array_equal(rebuilt, coupling.values)
        return {"checked": True, "passed": bool(agrees)}

    basis = extend_to_basis(support)
    cells = tuple(sorted(basis.cells))
    solved = candidate_from_subset(CandidateSubset(0, (), cells), coupling.marginals)
    result = {"checked": True, "passed": solved == coupling}
    if classify(basis).is_tree:
        try:
            result["passed"] = result["passed"] and peel_coupling(basis, coupling.marginals) == coupling
        except NotATree as err:
            warnings.warn(f"peeling cross-check skipped: {err}", UserWarning)
    return result


def _verify_one(label, raw_values, raw_marginals):
    values = np.empty(raw_values.shape, dtype=object)
    for index, v in np.ndenumerate(raw_values):
        values[index] = as_rational(v)
    entry = {"label": label, "dims": list(values.shape)}

    negative = [
        [i + 1 for i in index] for index, v in np.ndenumerate(values) if v < 0
    ]
    entry["nonnegative"] = {"passed": not negative, "negative_cells": negative}

    if raw_marginals is None:
        marginals = tuple(
            validate_distribution(w, name=t) for t, w in enumerate(marginals_of(values), start=1)
        )
    else:
        marginals = tuple(
            validate_distribution(w, name=t) for t, w in enumerate(raw_marginals, start=1)
        )
    entry["marginals"] = _marginal_check(values, marginals)

    support = SupportSet.from_values(values)
    c = classify(support)
    entry["classification"] = {
        "is_forest": c.is_forest,
        "is_tree": c.is_tree,
        "is_complete": c.is_complete,
        "component_count": c.component_count,
        "support_size": len(support),
    }
    checks = [entry["nonnegative"]["passed"], entry["marginals"]["passed"]]

    if all(checks):
        coupling = Coupling(values, marginals)
        if coupling.ndim == 2:
            report = verify_local_optimal(coupling)
            entry["local_optimality"] = {
                "complete_forest": report.complete_forest,
                "tree_required": report.tree_required,
                "row_dichotomy": report.row_dichotomy,
                "row_witnesses": [
                    {"rows": list(w["rows"]), "columns": list(w["columns"])} for w in report.row_witnesses
                ],
                "column_dichotomy": report.column_dichotomy,
                "column_witnesses": [
                    {"rows": list(w["rows"]), "columns": list(w["columns"])} for w in report.column_witnesses
                ],
                "kappa": report.kappa,
                "support_bounds": list(report.support_bounds) if report.support_bounds else None,
                "support_size_ok": report.support_size_ok,
                "passed": report.passed,
            }
            checks.append(report.passed)
        else:
            checks.append(c.is_forest and c.is_complete)
        entry["peeling"] = _peeling_check(coupling)
        if entry["peeling"]["checked"]:
            checks.append(entry["peeling"]["passed"])
    else:
        checks.append(c.is_forest and c.is_complete)

    entry["all_passed"] = all(checks)
    return entry


def cmd_verify(args, timings):
    start = time.perf_counter()
    entries = [_verify_one(*item) for item in read_couplings(args.file)]
    timings["verify"] = time.perf_counter() - start
    passed = all(entry["all_passed"] for entry in entries)
    print(f"{len(entries)} coupling(s) checked: {'all passed' if passed else 'FAILED'}", file=sys.stderr)
    return {"couplings": entries, "all_passed": passed}


def cmd_kappa(args, timings):
    problem = Problem.from_file(args.file)
    problem.load_data()
    start = time.perf_counter()
    witness = problem.kappa()
    timings["kappa"] = time.perf_counter() - start
    document = _problem_header(problem)
    document.update(
        {
            "kappa": witness.kappa,
            "sigma": list(witness.sigma),
            "pi": list(witness.pi),
            "common_prefix_sums": [format_fraction(v) for v in witness.common],
        }
    )
    print(f"kappa = {witness.kappa}", file=sys.stderr)
    return document


COMMANDS = {
    "solve": cmd_solve,
    "extremes": cmd_extremes,
    "verify": cmd_verify,
    "kappa": cmd_kappa,
}


def main(argv=None):
    parser = setup_parser()
    args = parser.parse_args(argv)
    message = validate_args(args)
    if message:
        print(message, file=sys.stderr)
        return EXIT_INVALID

    print("MEC - exact minimum-entropy coupling", file=sys.stderr)
    print("====================================", file=sys.stderr)
    print(f"Command: {args.command}", file=sys.stderr)
    print(f"Input file: {args.file}", file=sys.stderr)

    timings = {}
    try:
        document = COMMANDS[args.command](args, timings)
    except BudgetExceeded as err:
        print(f"{type(err).__name__}: {err}", file=sys.stderr)
        return EXIT_BUDGET
    except MecError as err:
        print(f"{type(err).__name__}: {err}", file=sys.stderr)
        return EXIT_INVALID

    if args.timings:
        document["timings"] = timings
    saved = ResultSaver(args.out).save_results(document)
    if saved:
        print(f"Results saved to {saved}", file=sys.stderr)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
