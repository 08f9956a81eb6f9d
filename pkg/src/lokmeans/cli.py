"""Command-line harness: single runs, benchmarks, sweeps, and verification.

Subcommands
    run             one clustering run with a report and certificates
    bench           R replicates per variant with shared initial centers
    sweep           benchmark grids over (n, k) on synthetic data
    counterexample  the fixed five-point instance across all variants
    verify          certify a user-supplied labeling, optionally vs brute force

The environment variable LOKMEANS_THREADS bounds the worker pool used for
replicates; aggregation sorts per-run records first, so the thread count
never changes any result.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, replace

import numpy as np

from .data_io import counterexample_instance, dedup_merge, filter_domain, load_csv, synth_uniform_grid
from .divergence import (
    ITAKURA_SAITO,
    KL,
    SQUARED_EUCLIDEAN,
    SQUARED_MAHALANOBIS,
    DivergenceSpec,
    load_mahalanobis_csv,
)
from .engine import VARIANTS, EngineConfig, RunReport, init_centers, run
from .model import Dataset, cluster_stats, optimal_centers
from .verify import BRUTE_FORCE_LIMIT, brute_force_best, certify_c_local, certify_d_local

DIVERGENCE_FLAGS = {
    "sq-euclidean": SQUARED_EUCLIDEAN,
    "mahalanobis": SQUARED_MAHALANOBIS,
    "kl": KL,
    "itakura-saito": ITAKURA_SAITO,
}

# Exhaustive single-move certification is quadratic in the instance size;
# skip it above this many (point, destination) candidates.
MAX_CERTIFY_ADJACENTS = 20000


def _thread_count() -> int:
    raw = os.environ.get("LOKMEANS_THREADS", "1")
    try:
        count = int(raw)
    except ValueError:
        raise ValueError(f"LOKMEANS_THREADS must be an integer, got {raw!r}") from None
    return max(1, count)


def _map_jobs(fn, jobs):
    workers = _thread_count()
    if workers == 1 or len(jobs) <= 1:
        return [fn(job) for job in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs))


def _derived_seed(master: int, *key: int) -> int:
    sequence = np.random.SeedSequence(master, spawn_key=tuple(key))
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


def _parse_synth(text: str) -> tuple[int, int]:
    fields = {}
    for part in text.split(","):
        name, _, value = part.partition("=")
        if name not in ("n", "d") or not value:
            raise ValueError(f"--synth expects n=<N>,d=<D>, got {text!r}")
        fields[name] = int(value)
    if set(fields) != {"n", "d"}:
        raise ValueError(f"--synth expects n=<N>,d=<D>, got {text!r}")
    return fields["n"], fields["d"]


def _parse_grid(text: str, flag: str) -> list[int]:
    try:
        values = [int(part) for part in text.split(",") if part]
    except ValueError:
        raise ValueError(f"{flag} expects comma-separated integers, got {text!r}") from None
    if not values:
        raise ValueError(f"{flag} must list at least one value")
    return values


def _divergence_from_args(args) -> DivergenceSpec:
    kind = DIVERGENCE_FLAGS[args.divergence]
    if kind == SQUARED_MAHALANOBIS:
        if not getattr(args, "mahalanobis_matrix", None):
            raise ValueError("--divergence mahalanobis requires --mahalanobis-matrix")
        return DivergenceSpec(kind, load_mahalanobis_csv(args.mahalanobis_matrix))
    return DivergenceSpec(kind)


def _dataset_from_args(args, spec: DivergenceSpec) -> Dataset:
    if getattr(args, "data", None) and getattr(args, "synth", None):
        raise ValueError("pass either --data or --synth, not both")
    if getattr(args, "data", None):
        raw = load_csv(args.data, skip_header=args.skip_header, weight_column=args.weights_col)
        dataset = dedup_merge(raw)
    elif getattr(args, "synth", None):
        n, d = _parse_synth(args.synth)
        dataset = synth_uniform_grid(n, d, _derived_seed(args.seed, 0xDA7A))
    else:
        raise ValueError("a dataset is required: pass --data <csv> or --synth n=<N>,d=<D>")
    if not args.no_filter:
        dataset, dropped = filter_domain(dataset, spec)
        if dropped:
            print(f"dropped {len(dropped)} out-of-domain dimensions: {dropped}", file=sys.stderr)
    return dataset


def _config_from_args(
    args,
    variant: str | None = None,
    seed: int | None = None,
    initial_centers: np.ndarray | None = None,
) -> EngineConfig:
    return EngineConfig(
        k=args.k,
        divergence=_divergence_from_args(args),
        variant=args.variant if variant is None else variant,
        init=args.init,
        seed=args.seed if seed is None else seed,
        max_iterations=args.max_iters,
        tie_tolerance=args.tie_tol,
        initial_centers=initial_centers,
    )


def _jsonable(value):
    if isinstance(value, dict):
        return {key: _jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(item) for item in value]
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, (np.integer, int)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        number = float(value)
        return None if math.isnan(number) else number
    return value


def _emit_json(payload, args) -> None:
    text = json.dumps(_jsonable(payload), indent=2)
    if getattr(args, "out", None):
        with open(args.out, "w", encoding="utf-8") as handle:
            handle.write(text + "\n")
    else:
        print(text)


def _report_dict(report: RunReport) -> dict:
    return {
        "final_labels": report.final_labels,
        "final_centers": report.final_centers,
        "final_loss": report.final_loss,
        "loss_trajectory": report.loss_trajectory,
        "iterations": report.iterations,
        "new_step_invocations": report.new_step_invocations,
        "empty_cluster_repairs": report.empty_cluster_repairs,
        "wall_time": report.wall_time,
        "termination": report.termination,
    }


def _certificates(dataset: Dataset, report: RunReport, config: EngineConfig) -> dict:
    certs: dict = {}
    c_cert = certify_c_local(
        dataset,
        report.final_labels,
        report.final_centers,
        config.divergence,
        tie_tolerance=config.tie_tolerance,
    )
    certs["c_local"] = asdict(c_cert)
    if dataset.n * (config.k - 1) <= MAX_CERTIFY_ADJACENTS:
        d_cert = certify_d_local(
            dataset, report.final_labels, config.k, config.divergence, config.decrease_threshold
        )
        certs["d_local"] = asdict(d_cert)
    else:
        certs["d_local"] = None
        certs["d_local_note"] = "skipped: instance too large for exhaustive certification"
    return certs


def cmd_run(args) -> int:
    spec = _divergence_from_args(args)
    dataset = _dataset_from_args(args, spec)
    config = _config_from_args(args)
    report = run(dataset, config)
    certs = _certificates(dataset, report, config)
    payload = {
        "dataset": {"n": dataset.n, "d": dataset.dim, "total_weight": dataset.total_weight},
        "config": {
            "k": config.k,
            "divergence": args.divergence,
            "variant": config.variant,
            "init": config.init,
            "seed": config.seed,
        },
        "report": _report_dict(report),
        "certificates": certs,
    }
    if args.json or args.out:
        _emit_json(payload, args)
    if not args.json:
        print(f"dataset: {dataset.n} points, {dataset.dim} dims, total weight {dataset.total_weight:g}")
        print(
            f"variant {config.variant}: loss {report.final_loss:.6f}, "
            f"{report.iterations} iterations, {report.new_step_invocations} escape steps, "
            f"{report.empty_cluster_repairs} repairs, {report.termination}"
        )
        c_kind = certs["c_local"]["kind"]
        d_kind = certs["d_local"]["kind"] if certs["d_local"] else "skipped"
        print(f"certificates: continuous {c_kind}, discrete {d_kind}")
        if dataset.n <= 50:
            print(f"labels: {report.final_labels.tolist()}")
    return 0


@dataclass
class BenchRecord:
    replicate: int
    variant: str
    loss: float
    iterations: int
    new_step_invocations: int
    empty_cluster_repairs: int
    wall_time: float
    termination: str


BENCH_COLUMNS = [
    "variant",
    "init",
    "k",
    "replicates",
    "loss_mean",
    "loss_variance",
    "loss_min",
    "time_mean_seconds",
    "iterations_mean",
    "improvement_proportion",
    "improvement_ratio_mean",
    "iteration_increase_ratio_mean",
    "new_step_invocations_mean",
]


def _summarize_bench(
    records: list[BenchRecord], variants: list[str], init: str, k: int, replicates: int
) -> list[dict]:
    by_variant: dict[str, list[BenchRecord]] = {v: [] for v in variants}
    for record in sorted(records, key=lambda r: (r.variant, r.replicate)):
        by_variant[record.variant].append(record)
    baseline = np.array([r.loss for r in by_variant["none"]])
    baseline_iters = np.array([r.iterations for r in by_variant["none"]], dtype=np.float64)

    summaries = []
    for variant in variants:
        rows = by_variant[variant]
        losses = np.array([r.loss for r in rows])
        iters = np.array([r.iterations for r in rows], dtype=np.float64)
        invocations = np.array([r.new_step_invocations for r in rows], dtype=np.float64)
        improved = losses < baseline
        summary = {
            "variant": variant,
            "init": init,
            "k": k,
            "replicates": replicates,
            "loss_mean": float(losses.mean()),
            "loss_variance": float(np.var(losses, ddof=1)) if replicates > 1 else float("nan"),
            "loss_min": float(losses.min()),
            "time_mean_seconds": float(np.mean([r.wall_time for r in rows])),
            "iterations_mean": float(iters.mean()),
            "improvement_proportion": float(improved.mean()),
        }
        if variant == "none":
            # Self-comparison: every difference is exactly zero.
            summary["improvement_ratio_mean"] = 0.0
            summary["iteration_increase_ratio_mean"] = 0.0
            summary["new_step_invocations_mean"] = 0.0
        elif improved.any():
            ratio = (baseline[improved] - losses[improved]) / baseline[improved]
            growth = (iters[improved] - baseline_iters[improved]) / baseline_iters[improved]
            summary["improvement_ratio_mean"] = float(ratio.mean())
            summary["iteration_increase_ratio_mean"] = float(growth.mean())
            summary["new_step_invocations_mean"] = float(invocations[improved].mean())
        else:
            summary["improvement_ratio_mean"] = float("nan")
            summary["iteration_increase_ratio_mean"] = float("nan")
            summary["new_step_invocations_mean"] = float("nan")
        summaries.append(summary)
    return summaries


def run_bench(
    dataset: Dataset,
    base_config: EngineConfig,
    variants: list[str],
    replicates: int,
    fixed_centers: np.ndarray | None = None,
) -> tuple[list[BenchRecord], list[dict]]:
    """Run every variant against shared per-replicate initial centers."""
    if "none" not in variants:
        variants = ["none"] + variants

    def one_replicate(index: int) -> list[BenchRecord]:
        seed = _derived_seed(base_config.seed, 1, index)
        if fixed_centers is not None:
            centers = fixed_centers
        else:
            rng = np.random.default_rng(seed)
            centers = init_centers(
                dataset, base_config.k, base_config.init, base_config.divergence, rng
            )
        out = []
        for variant in variants:
            config = replace(
                base_config, variant=variant, seed=seed, initial_centers=centers.copy()
            )
            report = run(dataset, config)
            out.append(
                BenchRecord(
                    replicate=index,
                    variant=variant,
                    loss=report.final_loss,
                    iterations=report.iterations,
                    new_step_invocations=report.new_step_invocations,
                    empty_cluster_repairs=report.empty_cluster_repairs,
                    wall_time=report.wall_time,
                    termination=report.termination,
                )
            )
        return out

    nested = _map_jobs(one_replicate, list(range(replicates)))
    records = [record for group in nested for record in group]
    summaries = _summarize_bench(
        records, variants, base_config.init, base_config.k, replicates
    )
    return records, summaries


def _format_cell(value) -> str:
    if isinstance(value, float):
        return "" if math.isnan(value) else f"{value:.6g}"
    return str(value)


def cmd_bench(args) -> int:
    variants = [v.strip() for v in args.variants.split(",") if v.strip()]
    for variant in variants:
        if variant not in VARIANTS:
            raise ValueError(f"unknown variant {variant!r}; expected one of {VARIANTS}")
    fixed_centers = None
    if args.counterexample:
        dataset, fixed_centers = counterexample_instance()
        args.k = 2
        args.divergence = "sq-euclidean"
        spec = _divergence_from_args(args)
    else:
        if args.k is None:
            raise ValueError("--k is required unless --counterexample is given")
        spec = _divergence_from_args(args)
        dataset = _dataset_from_args(args, spec)
    base = _config_from_args(args, variant="none")
    records, summaries = run_bench(dataset, base, variants, args.replicates, fixed_centers)

    if args.json:
        _emit_json({"records": [asdict(r) for r in records], "summaries": summaries}, args)
        return 0
    if args.out:
        with open(args.out, "w", newline="", encoding="utf-8") as handle:
            writer = csv.DictWriter(handle, fieldnames=BENCH_COLUMNS)
            writer.writeheader()
            for summary in summaries:
                writer.writerow({key: _format_cell(summary[key]) for key in BENCH_COLUMNS})
    header = "  ".join(f"{name:>12}" for name in BENCH_COLUMNS)
    print(header)
    for summary in summaries:
        print("  ".join(f"{_format_cell(summary[name]):>12}" for name in BENCH_COLUMNS))
    return 0


SWEEP_METRICS = [
    "improvement_proportion",
    "improvement_ratio_mean",
    "iteration_increase_ratio_mean",
    "new_step_invocations_mean",
]


def run_sweep(
    n_grid: list[int],
    k_grid: list[int],
    d: int,
    replicates: int,
    variant: str,
    init: str,
    spec: DivergenceSpec,
    seed: int,
    max_iterations: int = 10000,
    tie_tolerance: float = 1e-9,
) -> dict[str, np.ndarray]:
    """Per-(n, k) improvement matrices for one variant against plain K-means.

    Each replicate draws a fresh synthetic dataset; both runs share its
    initial centers. Cells whose sampled datasets cannot host k clusters
    (fewer distinct points than k) drop those replicates; a cell with no
    usable replicate, or no improved run for the ratio metrics, is NaN.
    """
    matrices = {
        metric: np.full((len(n_grid), len(k_grid)), np.nan) for metric in SWEEP_METRICS
    }

    def one_cell(cell: tuple[int, int]) -> tuple[int, int, dict[str, float]]:
        row, col = cell
        n, k = n_grid[row], k_grid[col]
        diffs, ratios, growths, invocations = [], [], [], []
        for rep in range(replicates):
            data_seed = _derived_seed(seed, 2, row, col, rep, 0)
            run_seed = _derived_seed(seed, 2, row, col, rep, 1)
            dataset = synth_uniform_grid(n, d, data_seed)
            if k > dataset.n:
                continue
            rng = np.random.default_rng(run_seed)
            centers = init_centers(dataset, k, init, spec, rng)
            base = EngineConfig(
                k=k,
                divergence=spec,
                variant="none",
                init=init,
                seed=run_seed,
                max_iterations=max_iterations,
                tie_tolerance=tie_tolerance,
                initial_centers=centers.copy(),
            )
            plain = run(dataset, base)
            tuned = run(dataset, replace(base, initial_centers=centers.copy(), variant=variant))
            improved = tuned.final_loss < plain.final_loss
            diffs.append(improved)
            if improved:
                ratios.append((plain.final_loss - tuned.final_loss) / plain.final_loss)
                growths.append((tuned.iterations - plain.iterations) / plain.iterations)
                invocations.append(tuned.new_step_invocations)
        cell_values = {metric: float("nan") for metric in SWEEP_METRICS}
        if diffs:
            cell_values["improvement_proportion"] = float(np.mean(diffs))
        if ratios:
            cell_values["improvement_ratio_mean"] = float(np.mean(ratios))
            cell_values["iteration_increase_ratio_mean"] = float(np.mean(growths))
            cell_values["new_step_invocations_mean"] = float(np.mean(invocations))
        return row, col, cell_values

    cells = [(row, col) for row in range(len(n_grid)) for col in range(len(k_grid))]
    for row, col, values in _map_jobs(one_cell, cells):
        for metric in SWEEP_METRICS:
            matrices[metric][row, col] = values[metric]
    return matrices


def cmd_sweep(args) -> int:
    if args.variant == "none":
        raise ValueError("--variant must name an escape variant to compare against plain K-means")
    n_grid = _parse_grid(args.n_grid, "--n-grid")
    k_grid = _parse_grid(args.k_grid, "--k-grid")
    spec = _divergence_from_args(args)
    matrices = run_sweep(
        n_grid,
        k_grid,
        args.synth_d,
        args.replicates,
        args.variant,
        args.init,
        spec,
        args.seed,
        max_iterations=args.max_iters,
        tie_tolerance=args.tie_tol,
    )
    if args.json:
        payload = {metric: matrices[metric] for metric in SWEEP_METRICS}
        payload["n_grid"] = n_grid
        payload["k_grid"] = k_grid
        _emit_json(payload, args)
        return 0
    for metric in SWEEP_METRICS:
        rows = [["n\\k"] + [str(k) for k in k_grid]]
        for row, n in enumerate(n_grid):
            rows.append([str(n)] + [_format_cell(float(v)) for v in matrices[metric][row]])
        if args.out:
            path = f"{args.out}_{metric}.csv"
            with open(path, "w", newline="", encoding="utf-8") as handle:
                csv.writer(handle).writerows(rows)
            print(f"wrote {path}")
        else:
            print(f"# {metric}")
            for line in rows:
                print(",".join(line))
    return 0


def run_counterexample(args=None) -> dict:
    """All variants on the fixed five-point instance with its fixed centers."""
    dataset, initial = counterexample_instance()
    max_iters = getattr(args, "max_iters", 10000) if args else 10000
    tie_tol = getattr(args, "tie_tol", 1e-9) if args else 1e-9
    results = {}
    for variant in VARIANTS:
        config = EngineConfig(
            k=2,
            divergence=DivergenceSpec.squared_euclidean(),
            variant=variant,
            seed=0,
            max_iterations=max_iters,
            tie_tolerance=tie_tol,
            initial_centers=initial.copy(),
        )
        report = run(dataset, config)
        results[variant] = {
            "report": report,
            "certificates": _certificates(dataset, report, config),
        }
    baseline = results["none"]["report"].final_loss
    payload = {"baseline_loss": baseline, "variants": {}}
    for variant, bundle in results.items():
        report = bundle["report"]
        payload["variants"][variant] = {
            "final_loss": report.final_loss,
            "iterations": report.iterations,
            "new_step_invocations": report.new_step_invocations,
            "termination": report.termination,
            "final_labels": report.final_labels,
            "final_centers": report.final_centers,
            "loss_trajectory": report.loss_trajectory,
            "normalized_trajectory_percent": report.loss_trajectory / baseline * 100.0,
            "certificates": bundle["certificates"],
        }
    return payload


def cmd_counterexample(args) -> int:
    payload = run_counterexample(args)
    if args.json:
        _emit_json(payload, args)
        return 0
    print("five-point instance, k = 2, squared Euclidean, centers seeded at (0, 2.5)")
    for variant, entry in payload["variants"].items():
        certs = entry["certificates"]
        d_kind = certs["d_local"]["kind"] if certs["d_local"] else "skipped"
        percent = ", ".join(f"{v:.1f}%" for v in entry["normalized_trajectory_percent"])
        print(
            f"  {variant:>9}: loss {entry['final_loss']:.6f}  iterations {entry['iterations']}"
            f"  continuous {certs['c_local']['kind']}  discrete {d_kind}  trajectory [{percent}]"
        )
    return 0


def cmd_verify(args) -> int:
    spec = _divergence_from_args(args)
    dataset = _dataset_from_args(args, spec)
    with open(args.labels, encoding="utf-8") as handle:
        try:
            labels = np.array([int(line.strip()) for line in handle if line.strip()], dtype=np.int64)
        except ValueError:
            raise ValueError(f"{args.labels}: labels must be one integer per line") from None
    if labels.shape[0] != dataset.n:
        raise ValueError(
            f"{args.labels}: {labels.shape[0]} labels for {dataset.n} points after merging duplicates"
        )
    k = args.k if args.k is not None else int(labels.max()) + 1
    stats = cluster_stats(dataset, labels, k)
    empty = np.flatnonzero(stats.member_count == 0)
    if empty.size:
        raise ValueError(f"cluster {int(empty[0])} is empty under the given labels")
    centers = optimal_centers(dataset, labels, k)
    from .model import clustering_loss

    loss = clustering_loss(dataset, labels, centers, spec)
    c_cert = certify_c_local(dataset, labels, centers, spec, tie_tolerance=args.tie_tol)
    payload = {
        "loss": loss,
        "k": k,
        "c_local": asdict(c_cert),
    }
    if dataset.n * (k - 1) <= MAX_CERTIFY_ADJACENTS:
        payload["d_local"] = asdict(certify_d_local(dataset, labels, k, spec))
    else:
        payload["d_local"] = None
    if k**dataset.n <= min(args.brute_limit, BRUTE_FORCE_LIMIT):
        _, best = brute_force_best(dataset, k, spec)
        payload["global_loss"] = best
        payload["gap_to_global"] = loss - best
    if args.json:
        _emit_json(payload, args)
        return 0
    print(f"loss {loss:.6f} over {dataset.n} points, k = {k}")
    print(f"continuous certificate: {c_cert.kind}" + (f" ({c_cert.note})" if c_cert.note else ""))
    if payload["d_local"]:
        d_cert = payload["d_local"]
        line = f"discrete certificate: {d_cert['kind']}"
        if d_cert["witness"]:
            w = d_cert["witness"]
            line += (
                f" (move point {w['point']} from cluster {w['from_cluster']}"
                f" to {w['to_cluster']}: {w['delta']:+.6f})"
            )
        print(line)
    else:
        print("discrete certificate: skipped (instance too large)")
    if "global_loss" in payload:
        print(f"gap to global optimum: {payload['gap_to_global']:.6f} (global {payload['global_loss']:.6f})")
    return 0


def _add_dataset_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--data", help="CSV of points, one row per point")
    parser.add_argument("--synth", help="synthetic integer-grid data: n=<N>,d=<D>")
    parser.add_argument("--weights-col", type=int, default=None, help="zero-based weight column in --data")
    parser.add_argument("--skip-header", action="store_true", help="ignore the first CSV row")
    parser.add_argument(
        "--no-filter", action="store_true", help="do not drop out-of-domain dimensions"
    )


def _add_model_flags(
    parser: argparse.ArgumentParser, with_variant: bool = True, k_required: bool = True
) -> None:
    parser.add_argument("--k", type=int, required=k_required, help="number of clusters")
    parser.add_argument(
        "--divergence", choices=sorted(DIVERGENCE_FLAGS), default="sq-euclidean"
    )
    parser.add_argument("--mahalanobis-matrix", help="CSV holding the d x d matrix")
    if with_variant:
        parser.add_argument("--variant", choices=VARIANTS, default="none")
    parser.add_argument("--init", choices=("uniform", "kmeans++"), default="uniform")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--max-iters", type=int, default=10000)
    parser.add_argument("--tie-tol", type=float, default=1e-9)


def _add_output_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--out", help="write results to this path")
    parser.add_argument("--json", action="store_true", help="emit JSON instead of text")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lokmeans",
        description="Weighted K-means over Bregman divergences with local-optimality guarantees",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    p_run = commands.add_parser("run", help="one clustering run with certificates")
    _add_dataset_flags(p_run)
    _add_model_flags(p_run)
    _add_output_flags(p_run)
    p_run.set_defaults(func=cmd_run)

    p_bench = commands.add_parser("bench", help="replicated benchmark across variants")
    _add_dataset_flags(p_bench)
    p_bench.add_argument(
        "--counterexample", action="store_true", help="use the fixed five-point instance"
    )
    _add_model_flags(p_bench, with_variant=False, k_required=False)
    p_bench.add_argument(
        "--variants",
        default="none,c-lo,d-lo,min-d-lo",
        help="comma-separated variants; plain K-means is always included",
    )
    p_bench.add_argument("--replicates", type=int, default=20)
    _add_output_flags(p_bench)
    p_bench.set_defaults(func=cmd_bench)

    p_sweep = commands.add_parser("sweep", help="improvement matrices over (n, k) grids")
    p_sweep.add_argument("--n-grid", required=True, help="comma-separated sample sizes")
    p_sweep.add_argument("--k-grid", required=True, help="comma-separated cluster counts")
    p_sweep.add_argument("--synth-d", type=int, default=1, help="synthetic dimension")
    p_sweep.add_argument(
        "--divergence", choices=sorted(DIVERGENCE_FLAGS), default="sq-euclidean"
    )
    p_sweep.add_argument("--mahalanobis-matrix", help="CSV holding the d x d matrix")
    p_sweep.add_argument("--variant", choices=VARIANTS, default="c-lo")
    p_sweep.add_argument("--init", choices=("uniform", "kmeans++"), default="uniform")
    p_sweep.add_argument("--seed", type=int, default=0)
    p_sweep.add_argument("--replicates", type=int, default=100)
    p_sweep.add_argument("--max-iters", type=int, default=10000)
    p_sweep.add_argument("--tie-tol", type=float, default=1e-9)
    _add_output_flags(p_sweep)
    p_sweep.set_defaults(func=cmd_sweep)

    p_counter = commands.add_parser(
        "counterexample", help="all variants on the fixed five-point instance"
    )
    p_counter.add_argument("--max-iters", type=int, default=10000)
    p_counter.add_argument("--tie-tol", type=float, default=1e-9)
    _add_output_flags(p_counter)
    p_counter.set_defaults(func=cmd_counterexample)

    p_verify = commands.add_parser("verify", help="certify a labeling from a file")
    _add_dataset_flags(p_verify)
    p_verify.add_argument("--labels", required=True, help="file with one label per line")
    p_verify.add_argument("--k", type=int, default=None, help="cluster count (default: max label + 1)")
    p_verify.add_argument(
        "--divergence", choices=sorted(DIVERGENCE_FLAGS), default="sq-euclidean"
    )
    p_verify.add_argument("--mahalanobis-matrix", help="CSV holding the d x d matrix")
    p_verify.add_argument("--seed", type=int, default=0)
    p_verify.add_argument("--tie-tol", type=float, default=1e-9)
    p_verify.add_argument(
        "--brute-limit",
        type=int,
        default=10**6,
        help="enumerate the global optimum when k**n is at most this",
    )
    _add_output_flags(p_verify)
    p_verify.set_defaults(func=cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
