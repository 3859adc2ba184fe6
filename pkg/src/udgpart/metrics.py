"""Partition quality metrics and the batch experiment pipeline.

The two error counts are always recomputed from the assignment itself, never
taken from a solver objective, so a bug anywhere in the model/solver chain
shows up as a metric identity violation instead of propagating silently.
"""

import csv
import os
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass

import numpy as np

from .adapt import ThinningStrategy, eliminate_bridges, thin_to_degree
from .generator import GeneratorParams, UnreachableTargetError, generate_connected
from .graphs import GeometricGraph
from .ilp import PartitionAssignment, build_maximal_soft, build_optimal_soft
from .seeds import SeedTableRow
from .solver import SolveLimits, solve

VARIANT_THIN = "SG1"
VARIANT_DEBRIDGE_THIN = "SG2"

RESULT_COLUMNS = (
    "graph_id",
    "n_nodes",
    "deg_exp",
    "avg_degree",
    "variant",
    "n",
    "objective",
    "status",
    "objective_value",
    "best_bound",
    "wall_time_s",
    "miss_cov",
    "inc_nodes",
)


@dataclass(frozen=True)
class CoverageErrors:
    miss_cov: int
    inc_nodes: int
    per_node_missing: dict


def coverage_errors(g: GeometricGraph, assignment: PartitionAssignment, n: int) -> CoverageErrors:
    """Count missing (node, mean) coverages and incompletely covered nodes.

    A node's neighbourhood supplies every mean held by any member, itself
    included; multi-mean nodes contribute each mean they hold.
    """
    if len(assignment.assign) != g.node_count:
        raise ValueError("assignment does not cover the node set")
    if assignment.n != n or any(
        i > n for means in assignment.assign for i in means
    ):
        raise ValueError(f"assignment references a set index above n={n}")
    missing = {}
    total = 0
    for v in range(g.node_count):
        present = set()
        for w in g.closed_neighbourhood(v):
            present |= assignment.assign[w]
        lack = n - len(present)
        if lack > 0:
            missing[v] = lack
            total += lack
    return CoverageErrors(
        miss_cov=total, inc_nodes=len(missing), per_node_missing=missing
    )


def error_bounds(g: GeometricGraph, n: int) -> tuple[int, int]:
    """Worst-case (incompletely covered nodes, missing coverages) for size n."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if n == 1:
        return g.node_count, 0
    return g.node_count, (n - 1) * g.node_count


@dataclass(frozen=True)
class ExperimentConfig:
    seed_rows: tuple[SeedTableRow, ...]
    graphs_per_row: int = 20
    partition_sizes: tuple[int, ...] = (3, 4, 5)
    objectives: tuple[str, ...] = ("optimal", "maximal")
    limits: SolveLimits = SolveLimits()
    variant: str = VARIANT_THIN
    rng_seed: int = 0
    max_attempts: int = 100
    threads: int = 1

    def __post_init__(self):
        if self.graphs_per_row < 1:
            raise ValueError("graphs_per_row must be >= 1")
        if not self.seed_rows:
            raise ValueError("seed_rows must not be empty")
        if self.variant not in (VARIANT_THIN, VARIANT_DEBRIDGE_THIN):
            raise ValueError(f"unknown variant {self.variant!r}")
        bad = [o for o in self.objectives if o not in ("optimal", "maximal")]
        if bad:
            raise ValueError(f"unknown objectives {bad}")


@dataclass(frozen=True)
class ResultRecord:
    graph_id: str
    n_nodes: int
    deg_exp: float
    avg_degree: float
    variant: str
    n: int
    objective: str
    status: str
    objective_value: float | None
    best_bound: float | None
    wall_time_s: float
    miss_cov: int | None
    inc_nodes: int | None

    def to_row(self):
        def opt(x):
            return "" if x is None else x

        return [
            self.graph_id,
            self.n_nodes,
            self.deg_exp,
            self.avg_degree,
            self.variant,
            self.n,
            self.objective,
            self.status,
            opt(self.objective_value),
            opt(self.best_bound),
            self.wall_time_s,
            opt(self.miss_cov),
            opt(self.inc_nodes),
        ]

    @classmethod
    def from_row(cls, row):
        def fnum(s, conv):
            return None if s == "" else conv(s)

        return cls(
            graph_id=row["graph_id"],
            n_nodes=int(row["n_nodes"]),
            deg_exp=float(row["deg_exp"]),
            avg_degree=float(row["avg_degree"]),
            variant=row["variant"],
            n=int(row["n"]),
            objective=row["objective"],
            status=row["status"],
            objective_value=fnum(row["objective_value"], float),
            best_bound=fnum(row["best_bound"], float),
            wall_time_s=float(row["wall_time_s"]),
            miss_cov=fnum(row["miss_cov"], int),
            inc_nodes=fnum(row["inc_nodes"], int),
        )


def prepare_graph(row: SeedTableRow, variant: str, seed: int, max_attempts: int) -> GeometricGraph:
    """Generate one connected graph for a seed row and adapt it per variant.

    SG1 thins straight down to the expected degree with squared-length
    weighting; SG2 removes all bridges first and forbids creating new ones
    while thinning.
    """
    params = GeneratorParams(
        node_count=row.node_count, lam=row.lam, r_tr=row.r_tr, rng_seed=seed
    )
    g = generate_connected(params, max_attempts=max_attempts).graph
    if variant == VARIANT_DEBRIDGE_THIN:
        g = eliminate_bridges(g)
        strategy = ThinningStrategy(
            mode="length-weighted-random",
            exponent=2.0,
            forbid_disconnect=True,
            forbid_new_bridges=True,
        )
    else:
        strategy = ThinningStrategy(
            mode="length-weighted-random", exponent=2.0, forbid_disconnect=True
        )
    if g.avg_degree > row.deg_exp:
        g = thin_to_degree(g, row.deg_exp, strategy, np.random.default_rng(seed + 1))
    return g


def solve_task(graph: GeometricGraph, n: int, objective: str, limits: SolveLimits, meta: dict) -> ResultRecord:
    """Build, solve and independently score one (graph, n, objective) cell."""
    build = build_optimal_soft if objective == "optimal" else build_maximal_soft
    model = build(graph, n)
    report = solve(model, limits)
    miss = inc = None
    if report.assignment is not None:
        errors = coverage_errors(graph, report.assignment, n)
        miss, inc = errors.miss_cov, errors.inc_nodes
    return ResultRecord(
        graph_id=meta["graph_id"],
        n_nodes=graph.node_count,
        deg_exp=meta["deg_exp"],
        avg_degree=graph.avg_degree,
        variant=meta["variant"],
        n=n,
        objective=objective,
        status=report.status,
        objective_value=report.objective,
        best_bound=report.best_bound,
        wall_time_s=report.wall_time,
        miss_cov=miss,
        inc_nodes=inc,
    )


def _skipped_record(row, variant, graph_id):
    return ResultRecord(
        graph_id=graph_id,
        n_nodes=row.node_count,
        deg_exp=row.deg_exp,
        avg_degree=0.0,
        variant=variant,
        n=0,
        objective="",
        status="skipped",
        objective_value=None,
        best_bound=None,
        wall_time_s=0.0,
        miss_cov=None,
        inc_nodes=None,
    )


def run_experiment(config: ExperimentConfig, out_dir: str | None = None) -> list[ResultRecord]:
    """Generate, adapt, solve and score the full batch; optionally stream CSVs.

    Generation failures become ``skipped`` records instead of aborting.
    Records stream to ``results.csv`` as they are produced; the aggregate
    files are written in a second pass over the finished record list.
    """
    writer = None
    handle = None
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        handle = open(os.path.join(out_dir, "results.csv"), "w", newline="")
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(RESULT_COLUMNS)

    def emit(record):
        records.append(record)
        if writer is not None:
            writer.writerow(record.to_row())
            handle.flush()

    records: list[ResultRecord] = []
    tasks = []
    for r_idx, row in enumerate(config.seed_rows):
        for g_idx in range(config.graphs_per_row):
            seed = config.rng_seed + 100_000 * r_idx + 97 * g_idx
            graph_id = f"{config.variant}-{row.node_count}-{row.deg_exp:g}-{g_idx:03d}"
            try:
                graph = prepare_graph(row, config.variant, seed, config.max_attempts)
            except UnreachableTargetError:
                emit(_skipped_record(row, config.variant, graph_id))
                continue
            meta = {
                "graph_id": graph_id,
                "deg_exp": row.deg_exp,
                "variant": config.variant,
            }
            for n in config.partition_sizes:
                for objective in config.objectives:
                    tasks.append((graph, n, objective, config.limits, meta))

    if config.threads > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=config.threads) as pool:
            futures = [pool.submit(solve_task, *t) for t in tasks]
            for fut in as_completed(futures):
                emit(fut.result())
    else:
        for t in tasks:
            emit(solve_task(*t))

    if handle is not None:
        handle.close()
    if out_dir is not None:
        write_aggregates(records, out_dir)
    return records


# -- aggregation ------------------------------------------------------------


def _median_low(values):
    ordered = sorted(values)
    return ordered[(len(ordered) - 1) // 2]


def _group_key(rec):
    return (rec.variant, rec.objective, rec.n, rec.deg_exp, rec.n_nodes)


def _solved(records):
    return [
        r
        for r in records
        if r.status in ("optimal", "feasible-time-limit") and r.miss_cov is not None
    ]


def aggregate_median_times(records):
    """Per group: the lower-middle median of solve wall time."""
    groups = {}
    for rec in sorted(_solved(records), key=lambda r: (r.graph_id, r.n, r.objective)):
        groups.setdefault(_group_key(rec), []).append(rec.wall_time_s)
    return {
        key: (_median_low(times), len(times)) for key, times in sorted(groups.items())
    }


def aggregate_mean_inc_nodes(records):
    groups = {}
    for rec in sorted(_solved(records), key=lambda r: (r.graph_id, r.n, r.objective)):
        groups.setdefault(_group_key(rec), []).append(rec.inc_nodes)
    return {
        key: (sum(vals) / len(vals), len(vals))
        for key, vals in sorted(groups.items())
    }


def aggregate_optimal_split(records):
    """Table of mean errors split by proven-optimal versus time-limited."""
    groups = {}
    for rec in sorted(_solved(records), key=lambda r: (r.graph_id, r.n, r.objective)):
        groups.setdefault(_group_key(rec), []).append(rec)
    out = {}
    for key, recs in sorted(groups.items()):
        opt = [r for r in recs if r.status == "optimal"]
        non = [r for r in recs if r.status != "optimal"]

        def mean(vals):
            return sum(vals) / len(vals) if vals else None

        out[key] = {
            "mean_miss_cov_nonopt": mean([r.miss_cov for r in non]),
            "mean_miss_cov_opt": mean([r.miss_cov for r in opt]),
            "mean_inc_nodes_nonopt": mean([r.inc_nodes for r in non]),
            "mean_inc_nodes_opt": mean([r.inc_nodes for r in opt]),
            "n_opt": len(opt),
            "n_nonopt": len(non),
        }
    return out


def aggregate_relative_means(records):
    """Mean error advantage of each objective over the other, in percent.

    Taken over instances where both objectives were proven optimal: how much
    lower the optimal partition's missing coverages are than the maximal
    partition's (relative to the worst case), and vice versa for
    incompletely covered nodes.
    """
    by_instance = {}
    for rec in _solved(records):
        if rec.status != "optimal":
            continue
        by_instance.setdefault((rec.graph_id, rec.n), {})[rec.objective] = rec
    miss_gains = []
    inc_gains = []
    for (graph_id, n), pair in sorted(by_instance.items()):
        if "optimal" not in pair or "maximal" not in pair or n < 2:
            continue
        opt, mx = pair["optimal"], pair["maximal"]
        max_miss = (n - 1) * opt.n_nodes
        miss_gains.append((mx.miss_cov - opt.miss_cov) / max_miss)
        inc_gains.append((opt.inc_nodes - mx.inc_nodes) / opt.n_nodes)
    if not miss_gains:
        return {"p_miss_cov": None, "p_inc_nodes": None, "instances": 0}
    return {
        "p_miss_cov": 100.0 * sum(miss_gains) / len(miss_gains),
        "p_inc_nodes": 100.0 * sum(inc_gains) / len(inc_gains),
        "instances": len(miss_gains),
    }


def write_aggregates(records, out_dir):
    with open(os.path.join(out_dir, "agg_median_time.csv"), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(
            ["variant", "objective", "n", "deg_exp", "n_nodes", "median_wall_time_s", "records"]
        )
        for key, (median, count) in aggregate_median_times(records).items():
            w.writerow(list(key) + [median, count])
    with open(os.path.join(out_dir, "agg_mean_inc_nodes.csv"), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(
            ["variant", "objective", "n", "deg_exp", "n_nodes", "mean_inc_nodes", "records"]
        )
        for key, (mean, count) in aggregate_mean_inc_nodes(records).items():
            w.writerow(list(key) + [mean, count])
    with open(os.path.join(out_dir, "agg_opt_split.csv"), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(
            [
                "variant", "objective", "n", "deg_exp", "n_nodes",
                "mean_miss_cov_nonopt", "mean_miss_cov_opt",
                "mean_inc_nodes_nonopt", "mean_inc_nodes_opt",
                "n_opt", "n_nonopt",
            ]
        )
        for key, row in aggregate_optimal_split(records).items():
            w.writerow(
                list(key)
                + [
                    "" if row["mean_miss_cov_nonopt"] is None else row["mean_miss_cov_nonopt"],
                    "" if row["mean_miss_cov_opt"] is None else row["mean_miss_cov_opt"],
                    "" if row["mean_inc_nodes_nonopt"] is None else row["mean_inc_nodes_nonopt"],
                    "" if row["mean_inc_nodes_opt"] is None else row["mean_inc_nodes_opt"],
                    row["n_opt"],
                    row["n_nonopt"],
                ]
            )
    rel = aggregate_relative_means(records)
    with open(os.path.join(out_dir, "agg_relative.csv"), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["p_miss_cov_percent", "p_inc_nodes_percent", "instances"])
        w.writerow(
            [
                "" if rel["p_miss_cov"] is None else rel["p_miss_cov"],
                "" if rel["p_inc_nodes"] is None else rel["p_inc_nodes"],
                rel["instances"],
            ]
        )


def read_results_csv(path) -> list[ResultRecord]:
    with open(path, newline="") as fh:
        return [ResultRecord.from_row(row) for row in csv.DictReader(fh)]
