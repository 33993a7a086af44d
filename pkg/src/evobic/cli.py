"""Command-line entry point: ``evobic run|generate|eval|bench``.

Exit codes: 0 success, 1 I/O or parse failure, 2 invalid flags,
3 metric undefined (both bicluster sets empty).
"""
from __future__ import annotations

import argparse
import logging
import sys

from .core import ValidationError
from .datagen import SCENARIOS, PlacementError
from .evolution import DEFAULT_OPERATOR_WEIGHTS, EvolutionParams, run
from .io import (
    ParseError,
    parse_biclusters,
    parse_matrix_tsv,
    report_path,
    summarize,
    write_biclusters,
    write_json,
    write_results_csv,
    write_summary_csv,
)
from .metrics import UndefinedMetric, clustering_error, recovery, relevance
from .trend import TrendParams, default_workers

EXIT_OK, EXIT_IO, EXIT_USAGE, EXIT_UNDEFINED = 0, 1, 2, 3

log = logging.getLogger("evobic")


def _add_search_flags(p: argparse.ArgumentParser, bench: bool = False) -> None:
    d = EvolutionParams()
    t = TrendParams()
    p.add_argument("-n", "--max-iterations", type=int, default=d.max_iterations,
                   help="generation budget (default %(default)s)")
    p.add_argument("-b", "--biclusters", type=int, default=None if bench else d.num_biclusters,
                   help="number of biclusters to report"
                   + (" (default: as many as the ground truth holds)" if bench else " (default %(default)s)"))
    p.add_argument("--approx", type=float, default=t.approx,
                   help="relative tolerance for approximate trends (default %(default)s)")
    p.add_argument("--negative-trends", action="store_true", help="also accept decreasing rows")
    p.add_argument("--overlap", type=float, default=d.overlap_threshold,
                   help="max cell Jaccard between reported biclusters (default %(default)s)")
    p.add_argument("--seed", type=int, default=d.seed)
    p.add_argument("--threads", type=int, default=None,
                   help="fitness evaluation threads (default: all cores)")
    p.add_argument("--pop-size", type=int, default=d.population_size)
    p.add_argument("--elite", type=int, default=d.elite_count)
    p.add_argument("--tournament", type=int, default=d.tournament_size)
    p.add_argument("--tabu-hits", type=int, default=None,
                   help="tabu hits without progress before stopping (default: population size)")
    p.add_argument("--penalty-base", type=float, default=d.penalty_base)
    p.add_argument("--init-len-min", type=int, default=d.init_len_min)
    p.add_argument("--init-len-max", type=int, default=d.init_len_max)
    p.add_argument("--min-cols", type=int, default=d.min_cols)
    p.add_argument("--min-rows", type=int, default=t.min_rows)
    p.add_argument("--col-cap", type=int, default=t.col_cap)
    p.add_argument("--retry-budget", type=int, default=d.retry_budget)
    p.add_argument("--weights", type=float, nargs=5, default=list(DEFAULT_OPERATOR_WEIGHTS),
                   metavar=("INS", "DEL", "SUB", "SWAP", "CROSS"),
                   help="operator weights (default %(default)s)")


def _search_params(args) -> EvolutionParams:
    trend = TrendParams(
        approx=args.approx,
        negative_trends=args.negative_trends,
        min_rows=args.min_rows,
        col_cap=args.col_cap,
    )
    return EvolutionParams(
        population_size=args.pop_size,
        elite_count=args.elite,
        max_iterations=args.max_iterations,
        num_biclusters=args.biclusters or 1,
        tabu_hits_threshold=args.tabu_hits,
        tournament_size=args.tournament,
        operator_weights=tuple(args.weights),
        penalty_base=args.penalty_base,
        overlap_threshold=args.overlap,
        init_len_min=args.init_len_min,
        init_len_max=args.init_len_max,
        min_cols=args.min_cols,
        seed=args.seed,
        trend=trend,
        retry_budget=args.retry_budget,
    )


class _UsageError(Exception):
    pass


def _params_or_usage(args) -> EvolutionParams:
    try:
        return _search_params(args)
    except ValidationError as exc:
        raise _UsageError(str(exc)) from None


def cmd_run(args) -> int:
    params = _params_or_usage(args)
    workers = args.threads or default_workers()
    m = parse_matrix_tsv(args.input)
    found, report = run(m, params, workers)
    write_biclusters(args.output, found)
    write_json(report_path(args.output), report.to_dict())
    log.info("%d biclusters written to %s", len(found), args.output)
    return EXIT_OK


def cmd_generate(args) -> int:
    from .bench import generate_tree

    overrides = {
        key: value
        for key, value in (
            ("matrix_rows", args.rows),
            ("matrix_cols", args.cols),
            ("bic_rows", args.bic_rows),
            ("bic_cols", args.bic_cols),
            ("noise_sigma", args.noise),
            ("mean_shift", args.mean_shift),
            ("pattern", args.pattern),
            ("num_biclusters", args.num_biclusters),
        )
        if value is not None
    }
    try:
        manifest = generate_tree(args.scenario, args.out, args.replicates, args.seed, **overrides)
    except (ValidationError, PlacementError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    log.info("%d datasets under %s", len(manifest["datasets"]), args.out)
    return EXIT_OK


def cmd_eval(args) -> int:
    found = parse_biclusters(args.found)
    truth = parse_biclusters(args.truth)
    metrics = ("ce", "recovery", "relevance") if args.metric == "all" else (args.metric,)
    funcs = {"ce": clustering_error, "recovery": recovery, "relevance": relevance}
    out = {}
    try:
        for name in metrics:
            out[name] = round(funcs[name](found, truth), 6)
    except UndefinedMetric as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNDEFINED
    print("{" + ", ".join(f'"{k}": {v:.6f}' for k, v in out.items()) + "}")
    return EXIT_OK


def cmd_bench(args) -> int:
    from .bench import run_bench

    params = _params_or_usage(args)
    workers = args.threads or 1
    records = run_bench(
        args.dir, params, workers, args.jobs, match_truth_count=args.biclusters is None
    )
    if not records:
        print(f"error: no datasets found under {args.dir}", file=sys.stderr)
        return EXIT_IO
    write_results_csv(args.out, records)
    if args.summary:
        write_summary_csv(args.summary, summarize(records))
    log.info("%d datasets benchmarked", len(records))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="evobic", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="search a matrix for biclusters")
    p.add_argument("-i", "--input", required=True, help="matrix TSV")
    p.add_argument("-o", "--output", required=True, help="bicluster JSON to write")
    _add_search_flags(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("generate", help="write a synthetic benchmark scenario")
    p.add_argument("--scenario", required=True, choices=SCENARIOS)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--rows", type=int)
    p.add_argument("--cols", type=int)
    p.add_argument("--bic-rows", type=int)
    p.add_argument("--bic-cols", type=int)
    p.add_argument("--noise", type=float)
    p.add_argument("--mean-shift", type=float)
    p.add_argument("--pattern")
    p.add_argument("--num-biclusters", type=int)
    p.add_argument("--replicates", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("eval", help="compare found biclusters with ground truth")
    p.add_argument("--found", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--metric", choices=("ce", "recovery", "relevance", "all"), default="ce")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("bench", help="run and score every dataset of a generated tree")
    p.add_argument("--dir", required=True, help="root of generated scenarios")
    p.add_argument("--out", required=True, help="results CSV")
    p.add_argument("--summary", help="per-group summary CSV")
    p.add_argument("--jobs", type=int, default=1, help="datasets processed concurrently")
    _add_search_flags(p, bench=True)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
