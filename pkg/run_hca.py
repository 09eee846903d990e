"""
HCA-DBSCAN command line

Subcommands:
1. cluster  - cluster a CSV with hca, dbscan or components and write a labels CSV
2. compare  - run HCA and a baseline on the same data and report agreement and PPI
3. bench    - time algorithms over generated datasets of growing size
4. generate - write a synthetic dataset (blobs, rings, uniform)

Settings come from the env file (see hca_settings.py); flags override them.

Exit codes: 0 success, 1 data error, 2 usage error.

Examples:
    python run_hca.py cluster --input points.csv --epsilon 0.5 --output labels.csv
    python run_hca.py compare --input points.csv --epsilon 0.5 --policy exact --report cmp.json
    python run_hca.py bench --generator uniform:d=2,seed=1,extent=100 --sizes 10000,40000 --epsilon 1.0
    python run_hca.py generate --kind blobs --n 1000 --dims 2 --seed 7 --output blobs.csv
"""

import argparse
import dataclasses
import logging
import os
import sys
import time
from datetime import datetime

import numpy as np

from bench_report import (BenchReport, BenchResult, ComparisonReport, RunReport, growth_entries, median_ms,
                          ppi_percent, write_bench_workbook, write_comparison_workbook, write_json)
from dataset_io import CsvSchema, GeneratorSpec, generate, load_csv, parse_generator_spec, write_dataset, write_labels
from hca_dbscan import HcaDbscan, MergePolicy, TraversalOrder
from hca_errors import DataIoError, HcaError, UsageError
from hca_settings import COMPARATORS, POLICIES, load_settings
from hca_types import ClusterLabeling
from oracle_dbscan import Comparator, DbscanParams, agreement, connectivity_components, dbscan, refinement_check

log = logging.getLogger("run_hca")

ALGORITHMS = ("hca", "dbscan", "components")
ORACLE_ALGORITHMS = ("dbscan", "components")

COMPARATOR_HELP = ("Distance test against epsilon for dbscan and components. Defaults: dbscan uses "
                   "HCA_COMPARATOR (le), components uses lt like the hca merge test. Pairs exactly epsilon "
                   "apart therefore join under dbscan but not under components; pass the same value to both "
                   "for identical MINPTS = 1 partitions.")


def positive_epsilon(value):
    try:
        epsilon = float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"epsilon must be positive (got {value!r})")
    if not np.isfinite(epsilon) or epsilon <= 0:
        raise argparse.ArgumentTypeError("epsilon must be positive")
    return epsilon


def positive_int(value):
    try:
        parsed = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer (got {value!r})")
    if parsed < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer (got {value!r})")
    return parsed


def size_list(value):
    try:
        sizes = [int(part) for part in value.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"sizes must be comma-separated integers (got {value!r})")
    if not sizes or any(n < 1 for n in sizes):
        raise argparse.ArgumentTypeError(f"sizes must be positive (got {value!r})")
    return sizes


def algorithm_list(value):
    names = [part.strip() for part in value.split(",") if part.strip()]
    unknown = [name for name in names if name not in ALGORITHMS]
    if not names or unknown:
        raise argparse.ArgumentTypeError(f"algorithms must be drawn from {', '.join(ALGORITHMS)} (got {value!r})")
    return names


def default_comparator(algorithm, requested, settings):
    """
    Comparator for an oracle run: an explicit flag wins; components default to
    strict < (the HCA merge test); dbscan defaults to the configured comparator.
    """
    if requested:
        return Comparator(requested)
    if algorithm == "components":
        return Comparator.LT
    return Comparator(settings.comparator)


def run_algorithm(algorithm, dataset, epsilon, settings, minpts=None, policy=None, comparator=None,
                  min_cluster_size=None, order=TraversalOrder.DEPTH):
    """
    Run one clustering algorithm and time it.

    Args:
        algorithm (str): hca, dbscan or components
        dataset (Dataset): the points
        epsilon (float): density radius
        settings (Settings): resolved settings for defaults
        minpts (int, optional): dbscan MINPTS
        policy (str, optional): hca merge policy
        comparator (str, optional): oracle distance comparator
        min_cluster_size (int, optional): hca small-cluster filter
        order (str): hca traversal order

    Returns:
        tuple: (ClusterLabeling, RunReport)
    """
    if algorithm == "hca":
        policy = MergePolicy(policy or settings.policy)
        model = HcaDbscan(epsilon, policy=policy, order=order, min_cluster_size=min_cluster_size,
                          offset_limit=settings.offset_limit, eager_max_dim=settings.eager_max_dim)
        start = time.perf_counter()
        model.fit(dataset)
        elapsed_ms = (time.perf_counter() - start) * 1000.0
        labeling = model.labeling_
        report = RunReport(algorithm="hca", policy=policy.value, epsilon=float(epsilon), minpts=None,
                           n=dataset.n, d=dataset.d, cluster_count=labeling.cluster_count,
                           noise_count=labeling.noise_count, wall_time_ms=elapsed_ms,
                           occupied_cells=model.stats_.occupied_cells, merge_tests=model.stats_.merge_tests)
        return labeling, report

    cmp = default_comparator(algorithm, comparator, settings)
    if algorithm == "dbscan":
        params = DbscanParams(epsilon, minpts or settings.minpts, cmp)
        start = time.perf_counter()
        labeling = dbscan(dataset, params)
        elapsed_ms = (time.perf_counter() - start) * 1000.0
        used_minpts = params.minpts
    elif algorithm == "components":
        start = time.perf_counter()
        labeling = connectivity_components(dataset, epsilon, cmp)
        elapsed_ms = (time.perf_counter() - start) * 1000.0
        used_minpts = 1
    else:
        raise UsageError(f"unknown algorithm {algorithm!r}")

    report = RunReport(algorithm=algorithm, policy=None, epsilon=float(epsilon), minpts=used_minpts,
                       n=dataset.n, d=dataset.d, cluster_count=labeling.cluster_count,
                       noise_count=labeling.noise_count, wall_time_ms=elapsed_ms)
    return labeling, report


def _schema(args, settings) -> CsvSchema:
    delimiter = args.delimiter or settings.csv_delimiter
    has_header = False if args.no_header else settings.csv_has_header
    try:
        return CsvSchema(has_header=has_header, delimiter=delimiter)
    except ValueError as e:
        raise UsageError(str(e))


def _timestamped(settings, prefix, suffix):
    timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
    return os.path.join(settings.output_dir, f"{prefix}_{timestamp}{suffix}")


def _ensure_parent(path):
    folder = os.path.dirname(os.path.abspath(path))
    try:
        os.makedirs(folder, exist_ok=True)
    except OSError as e:
        raise DataIoError(f"cannot create {folder}: {e}")


def cmd_cluster(args, settings) -> int:
    print(f"Loading dataset from {args.input}")
    dataset = load_csv(args.input, _schema(args, settings))
    print(f"Clustering {dataset.n} points (d = {dataset.d}) with {args.algorithm}, epsilon = {args.epsilon}")

    labeling, report = run_algorithm(args.algorithm, dataset, args.epsilon, settings, minpts=args.minpts,
                                     policy=args.policy, comparator=args.comparator,
                                     min_cluster_size=args.min_cluster_size, order=args.order)
    print(f"Found {report.cluster_count} clusters and {report.noise_count} noise points "
          f"in {report.wall_time_ms:.1f} ms")

    output = args.output or _timestamped(settings, "labels", ".csv")
    _ensure_parent(output)
    write_labels(labeling, output)
    print(f"Labels saved to {output}")

    if args.report:
        write_json(report, args.report)
        print(f"Run report saved to {args.report}")
    return 0


def cmd_compare(args, settings) -> int:
    print(f"Loading dataset from {args.input}")
    dataset = load_csv(args.input, _schema(args, settings))

    print(f"Running hca ({args.policy or settings.policy} policy)...")
    hca_labels, hca_report = run_algorithm("hca", dataset, args.epsilon, settings, policy=args.policy,
                                           order=args.order)
    print(f"Running baseline {args.baseline}...")
    base_labels, base_report = run_algorithm(args.baseline, dataset, args.epsilon, settings, minpts=args.minpts,
                                             comparator=args.comparator)

    result = agreement(hca_labels, base_labels)
    # with MINPTS = 1 the baseline is a connectivity partition that hca clusters must refine
    refines = None
    if base_report.minpts == 1:
        refines = refinement_check(hca_labels, base_labels)
    report = ComparisonReport(runs=[hca_report, base_report], agreement=result,
                              ppi_percent=ppi_percent(base_report.wall_time_ms, hca_report.wall_time_ms),
                              refines=refines)

    print(f"Rand index: {result.rand_index:.6f} (identical: {result.identical}, "
          f"mismatched pairs: {result.mismatched_pairs})")
    if refines is not None:
        print(f"hca clusters refine the {args.baseline} clusters: {refines}")
    if refines is False:
        log.warning("an hca cluster spans more than one %s cluster", args.baseline)
    print(f"hca {hca_report.wall_time_ms:.1f} ms vs {args.baseline} {base_report.wall_time_ms:.1f} ms, "
          f"PPI {report.ppi_percent:.2f}%")

    path = args.report or _timestamped(settings, "comparison", ".json")
    write_json(report, path)
    print(f"Comparison report saved to {path}")
    if args.excel:
        write_comparison_workbook(report, args.excel, labelings=(hca_labels, base_labels))
        print(f"Workbook saved to {args.excel}")
    return 0


def _same_labels(a: ClusterLabeling, b: ClusterLabeling) -> bool:
    return a.cluster_count == b.cluster_count and np.array_equal(a.labels, b.labels)


def cmd_bench(args, settings) -> int:
    spec = parse_generator_spec(args.generator, n=args.sizes[0])
    repeat = args.repeat or settings.bench_repeat
    oracle_max_n = settings.oracle_max_n if args.oracle_max_n is None else args.oracle_max_n
    policy = MergePolicy(args.policy or settings.policy)

    results = []
    deterministic = True
    for size in args.sizes:
        dataset = generate(dataclasses.replace(spec, n=size))
        print(f"\n{'=' * 60}\nn = {size} (d = {dataset.d})\n{'=' * 60}")
        for algorithm in args.algorithms:
            if algorithm in ORACLE_ALGORITHMS and size > oracle_max_n:
                print(f"{algorithm}: skipped (n > {oracle_max_n})")
                results.append(BenchResult(algorithm=algorithm, n=size, median_ms=None, skipped=True))
                continue
            samples = []
            first = None
            report = None
            for _ in range(repeat):
                labeling, report = run_algorithm(algorithm, dataset, args.epsilon, settings, minpts=args.minpts,
                                                 policy=policy.value, comparator=args.comparator)
                samples.append(report.wall_time_ms)
                if first is None:
                    first = labeling
                elif not _same_labels(first, labeling):
                    deterministic = False
                    log.warning("%s produced different labels across repeats at n = %d", algorithm, size)
            result = BenchResult(algorithm=algorithm, n=size, median_ms=median_ms(samples), samples_ms=samples,
                                 cluster_count=report.cluster_count, merge_tests=report.merge_tests)
            results.append(result)
            print(f"{algorithm}: median {result.median_ms:.1f} ms over {repeat} runs, "
                  f"{result.cluster_count} clusters")

    growth = growth_entries(results)
    for entry in growth:
        if entry.ratio is not None:
            print(f"{entry.algorithm}: T({entry.to_n})/T({entry.from_n}) = {entry.ratio:.2f}"
                  + (f", exponent {entry.exponent:.2f}" if entry.exponent is not None else ""))

    report = BenchReport(generator=args.generator, epsilon=float(args.epsilon), policy=policy.value,
                         repeat=repeat, sizes=list(args.sizes), results=results, growth=growth,
                         deterministic=deterministic)
    path = args.report or _timestamped(settings, "bench", ".json")
    write_json(report, path)
    print(f"Bench report saved to {path}")
    if args.excel:
        write_bench_workbook(report, args.excel)
        print(f"Workbook saved to {args.excel}")
    return 0


def cmd_generate(args, settings) -> int:
    options = {}
    for key in ("k", "spread", "separation", "thickness", "extent"):
        value = getattr(args, key)
        if value is not None:
            options[key] = value
    if args.radii:
        options["radii"] = tuple(args.radii)
    spec = GeneratorSpec(kind=args.kind, n=args.n, d=args.dims, seed=args.seed, **options)
    dataset = generate(spec)
    _ensure_parent(args.output)
    write_dataset(dataset, args.output, _schema(args, settings))
    print(f"Generated {spec.kind} dataset with {dataset.n} points (d = {dataset.d}) saved to {args.output}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--env", dest="env_path", default=None, help="Path to .env file")
    common.add_argument("--log-level", default=None, help="Logging level (overrides HCA_LOG_LEVEL)")
    common.add_argument("--delimiter", default=None, help="CSV delimiter (overrides HCA_CSV_DELIMITER)")
    common.add_argument("--no-header", action="store_true", help="CSV files have no header row")

    parser = argparse.ArgumentParser(description="HyperCube Accelerated DBSCAN clustering toolkit")
    subparsers = parser.add_subparsers(dest="command", required=True)

    cluster = subparsers.add_parser("cluster", parents=[common], help="Cluster a CSV dataset")
    cluster.add_argument("--input", required=True, help="Input CSV of coordinates")
    cluster.add_argument("--epsilon", required=True, type=positive_epsilon, help="Density radius")
    cluster.add_argument("--algorithm", choices=ALGORITHMS, default="hca")
    cluster.add_argument("--minpts", type=positive_int, default=None)
    cluster.add_argument("--policy", choices=POLICIES, default=None)
    cluster.add_argument("--order", choices=[o.value for o in TraversalOrder], default=TraversalOrder.DEPTH.value)
    cluster.add_argument("--min-cluster-size", type=positive_int, default=None)
    cluster.add_argument("--comparator", choices=COMPARATORS, default=None, help=COMPARATOR_HELP)
    cluster.add_argument("--output", default=None, help="Labels CSV (default: OUTPUT_DIR/labels_<timestamp>.csv)")
    cluster.add_argument("--report", default=None, help="Optional JSON run report")
    cluster.set_defaults(func=cmd_cluster)

    compare = subparsers.add_parser("compare", parents=[common], help="Compare HCA with a baseline")
    compare.add_argument("--input", required=True)
    compare.add_argument("--epsilon", required=True, type=positive_epsilon)
    compare.add_argument("--minpts", type=positive_int, default=None)
    compare.add_argument("--policy", choices=POLICIES, default=None)
    compare.add_argument("--order", choices=[o.value for o in TraversalOrder], default=TraversalOrder.DEPTH.value)
    compare.add_argument("--baseline", choices=ORACLE_ALGORITHMS, default="components")
    compare.add_argument("--comparator", choices=COMPARATORS, default=None, help=COMPARATOR_HELP)
    compare.add_argument("--report", default=None, help="JSON comparison report")
    compare.add_argument("--excel", default=None, help="Optional styled workbook of the report")
    compare.set_defaults(func=cmd_compare)

    bench = subparsers.add_parser("bench", parents=[common], help="Benchmark runtime growth")
    bench.add_argument("--generator", required=True, help='Generator spec, e.g. "uniform:d=2,seed=1,extent=100"')
    bench.add_argument("--sizes", required=True, type=size_list, help="Comma-separated dataset sizes")
    bench.add_argument("--epsilon", required=True, type=positive_epsilon)
    bench.add_argument("--repeat", type=positive_int, default=None)
    bench.add_argument("--algorithms", type=algorithm_list, default=["hca", "components"])
    bench.add_argument("--oracle-max-n", type=int, default=None)
    bench.add_argument("--policy", choices=POLICIES, default=None)
    bench.add_argument("--minpts", type=positive_int, default=None)
    bench.add_argument("--comparator", choices=COMPARATORS, default=None, help=COMPARATOR_HELP)
    bench.add_argument("--report", default=None)
    bench.add_argument("--excel", default=None)
    bench.set_defaults(func=cmd_bench)

    gen = subparsers.add_parser("generate", parents=[common], help="Write a synthetic dataset")
    gen.add_argument("--kind", required=True, choices=("blobs", "rings", "uniform"))
    gen.add_argument("--n", required=True, type=positive_int)
    gen.add_argument("--dims", type=positive_int, default=2)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--output", required=True)
    gen.add_argument("--k", type=positive_int, default=None, help="blobs: cluster count")
    gen.add_argument("--spread", type=float, default=None, help="blobs: standard deviation")
    gen.add_argument("--separation", type=float, default=None, help="blobs: lattice spacing")
    gen.add_argument("--radii", type=float, nargs="+", default=None, help="rings: radii")
    gen.add_argument("--thickness", type=float, default=None, help="rings: annulus width")
    gen.add_argument("--extent", type=float, default=None, help="uniform: box side")
    gen.set_defaults(func=cmd_generate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    try:
        settings = load_settings(args.env_path)
        level = (args.log_level or settings.log_level).upper()
        logging.basicConfig(level=getattr(logging, level, logging.INFO),
                            format="%(asctime)s %(levelname)s %(name)s: %(message)s")
        return args.func(args, settings)
    except HcaError as e:
        # DataError -> 1, UsageError -> 2
        print(f"Error: {e}", file=sys.stderr)
        return getattr(e, "exit_code", 1)


if __name__ == "__main__":
    sys.exit(main())
