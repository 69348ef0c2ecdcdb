"""Traffic generation, experiment orchestration, and aggregation.

Experiments sweep OXC configurations (lane profiles) and traffic loads.
The same random traffic matrix is replayed across all profiles of a
(load, matrix) cell so comparisons are paired. Result CSVs contain only
deterministic fields; wall-clock timings go to a separate file so reruns
with identical seeds stay byte-identical.
"""

from __future__ import annotations

import csv
import math
import random
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import IO, Sequence

from .errors import ScnPlanError, UndefinedStatisticError
from .instance import Instance, Request
from .physical import Physics, default_physics, simplified_physics
from .siman import AnnealConfig, optimize_sequence
from .topology import Network, NodeId, lane_profile


@dataclass(frozen=True)
class TrafficProfile:
    """Discrete traffic-volume mix used to draw request sizes."""

    volumes: tuple[int, ...] = (1000, 4000, 10000)
    probabilities: tuple[float, ...] = (0.3, 0.3, 0.4)
    seed: int = 0

    def __post_init__(self):
        if len(self.volumes) != len(self.probabilities) or not self.volumes:
            raise ScnPlanError("volumes and probabilities must align and be non-empty")
        if any(v <= 0 for v in self.volumes):
            raise ScnPlanError("traffic volumes must be positive")
        if abs(sum(self.probabilities) - 1.0) > 1e-9:
            raise ScnPlanError("probabilities must sum to 1")


def generate_traffic(
    nodes: Sequence[NodeId], count: int, profile: TrafficProfile
) -> tuple[Request, ...]:
    """Random unidirectional requests, uniform over ordered distinct pairs.

    Deterministic for a fixed profile seed.
    """
    if count < 0:
        raise ScnPlanError("request count must be >= 0")
    ordered = sorted(nodes, key=str)
    pairs = [(u, v) for u in ordered for v in ordered if u != v]
    if count and not pairs:
        raise ScnPlanError("need at least two nodes to generate traffic")
    rng = random.Random(profile.seed)
    out = []
    for rid in range(1, count + 1):
        src, dst = pairs[rng.randrange(len(pairs))]
        volume = rng.choices(profile.volumes, weights=profile.probabilities)[0]
        out.append(Request(rid, src, dst, volume))
    return tuple(out)


# -- small-sample statistics --------------------------------------------------


def _log_beta(a: float, b: float) -> float:
    return math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)


def _beta_cf(a: float, b: float, x: float) -> float:
    """Continued fraction for the regularized incomplete beta function."""
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    d = 1.0 / (d if abs(d) > tiny else tiny)
    h = d
    for m in range(1, 300):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = 1.0 / (d if abs(d) > tiny else tiny)
        c = 1.0 + aa / (c if abs(c) > tiny else tiny)
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = 1.0 / (d if abs(d) > tiny else tiny)
        c = 1.0 + aa / (c if abs(c) > tiny else tiny)
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 3e-12:
            break
    return h


def _betainc(a: float, b: float, x: float) -> float:
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    front = math.exp(a * math.log(x) + b * math.log1p(-x) - _log_beta(a, b))
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_cf(a, b, x) / a
    return 1.0 - front * _beta_cf(b, a, 1.0 - x) / b


def student_t_quantile(p: float, df: int) -> float:
    """Inverse CDF of Student's t, bisected on the closed-form CDF.

    Matches published critical-value tables to the printed precision; kept
    in-tree so the harness has no statistical runtime dependency.
    """
    if not 0.0 < p < 1.0:
        raise ScnPlanError("quantile level must lie in (0, 1)")
    if df < 1:
        raise ScnPlanError("degrees of freedom must be >= 1")
    if p == 0.5:
        return 0.0
    if p < 0.5:
        return -student_t_quantile(1.0 - p, df)

    def cdf(t: float) -> float:
        return 1.0 - 0.5 * _betainc(df / 2.0, 0.5, df / (df + t * t))

    hi = 1.0
    while cdf(hi) < p and hi < 1e12:
        hi *= 2.0
    lo = 0.0
    for _ in range(200):
        mid = (lo + hi) / 2.0
        if cdf(mid) < p:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2.0


def mean_ci(samples: Sequence[float], level: float = 0.95) -> tuple[float, float]:
    """Sample mean and t-distribution confidence half-width."""
    n = len(samples)
    if n < 2:
        raise UndefinedStatisticError("a confidence interval needs at least two samples")
    mean = statistics.fmean(samples)
    spread = statistics.stdev(samples)
    if spread == 0.0:
        return mean, 0.0
    t = student_t_quantile((1.0 + level) / 2.0, n - 1)
    return mean, t * spread / math.sqrt(n)


# -- experiment orchestration --------------------------------------------------


@dataclass(frozen=True)
class ExperimentPlan:
    network: Network
    profiles: tuple[str, ...] = ("full", "ninth", "none")
    loads: tuple[int, ...] = (20, 40, 60, 80, 100)
    matrices: int = 50
    iterations: int = 1000
    k: int = 3
    seed: int = 1
    traffic: TrafficProfile = TrafficProfile()
    physics_name: str = "full"

    def __post_init__(self):
        if not self.loads:
            raise ScnPlanError("the load grid must be non-empty")
        if self.matrices < 1:
            raise ScnPlanError("at least one traffic matrix per load is required")

    def physics(self) -> Physics:
        return simplified_physics() if self.physics_name == "simplified" else default_physics()


@dataclass(frozen=True)
class RawRow:
    profile: str
    load: int
    matrix: int
    seed: int
    obj1: int
    obj2: int
    unserved_count: int
    unserved_gbps: int


@dataclass(frozen=True)
class StatRow:
    """Aggregate over the matrices of one (profile, load) scenario."""

    profile: str
    load: int
    samples: int
    obj1_mean: float
    obj1_hw: float
    obj2_mean: float
    obj2_hw: float
    unserved_gbps_mean: float
    runtime_mean_s: float
    runtime_hw_s: float


@dataclass
class ExperimentResult:
    plan: ExperimentPlan
    raw: list[RawRow] = field(default_factory=list)
    timings: list[tuple[str, int, int, float]] = field(default_factory=list)
    aggregates: list[StatRow] = field(default_factory=list)

    def rows_for(self, profile: str, load: int) -> list[RawRow]:
        return [r for r in self.raw if r.profile == profile and r.load == load]

    def aggregate_for(self, profile: str, load: int) -> StatRow:
        for row in self.aggregates:
            if row.profile == profile and row.load == load:
                return row
        raise KeyError((profile, load))


def matrix_seed(plan: ExperimentPlan, load_index: int, matrix: int) -> int:
    return plan.seed + 100_000 * load_index + matrix


def _run_cell(args: tuple[ExperimentPlan, int, int]) -> tuple[list[RawRow], list[tuple]]:
    """One (load, matrix) cell: the same traffic replayed per profile."""
    plan, load_index, matrix = args
    load = plan.loads[load_index]
    seed = matrix_seed(plan, load_index, matrix)
    requests = generate_traffic(
        plan.network.nodes, load, replace(plan.traffic, seed=seed)
    )
    physics = plan.physics()
    raw_rows, timing_rows = [], []
    for mode in plan.profiles:
        profile = lane_profile(plan.network.lanes_per_link, mode)
        instance = Instance(plan.network, profile, requests, physics, plan.k)
        config = AnnealConfig(iterations=plan.iterations, seed=seed)
        started = time.perf_counter()
        solution, _seq, _trace = optimize_sequence(instance, config)
        elapsed = time.perf_counter() - started
        raw_rows.append(RawRow(
            mode, load, matrix, seed, solution.obj1, solution.obj2,
            len(solution.unserved), solution.unserved_gbps,
        ))
        timing_rows.append((mode, load, matrix, elapsed))
    return raw_rows, timing_rows


def run_experiment(plan: ExperimentPlan, *, workers: int = 1) -> ExperimentResult:
    """Run the full (profile x load x matrix) grid.

    Cells are independent jobs; results are folded in a fixed order so the
    output is identical for any worker count. Per-cell infeasibility shows
    up as unserved volume in the raw rows rather than stopping the sweep.
    """
    tasks = [
        (plan, load_index, matrix)
        for load_index in range(len(plan.loads))
        for matrix in range(1, plan.matrices + 1)
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            cell_results = list(pool.map(_run_cell, tasks, chunksize=1))
    else:
        cell_results = [_run_cell(task) for task in tasks]

    result = ExperimentResult(plan)
    for raw_rows, timing_rows in cell_results:
        result.raw.extend(raw_rows)
        result.timings.extend(timing_rows)
    result.raw.sort(key=lambda r: (r.profile, r.load, r.matrix))
    result.timings.sort(key=lambda t: (t[0], t[1], t[2]))

    for mode in plan.profiles:
        for load in plan.loads:
            rows = result.rows_for(mode, load)
            times = [t[3] for t in result.timings if t[0] == mode and t[1] == load]
            result.aggregates.append(_aggregate(mode, load, rows, times))
    return result


def _aggregate(mode: str, load: int, rows: list[RawRow], times: list[float]) -> StatRow:
    def stats(values):
        if len(values) < 2:
            return (float(values[0]) if values else math.nan, math.nan)
        return mean_ci(values)

    obj1_mean, obj1_hw = stats([r.obj1 for r in rows])
    obj2_mean, obj2_hw = stats([r.obj2 for r in rows])
    unserved_mean = statistics.fmean([r.unserved_gbps for r in rows]) if rows else math.nan
    runtime_mean, runtime_hw = stats(times)
    return StatRow(
        mode, load, len(rows), obj1_mean, obj1_hw, obj2_mean, obj2_hw,
        unserved_mean, runtime_mean, runtime_hw,
    )


# -- CSV export ---------------------------------------------------------------


def write_raw_csv(result: ExperimentResult, stream: IO[str]) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow([
        "profile", "load", "matrix", "seed", "obj1", "obj2",
        "unserved_count", "unserved_gbps",
    ])
    for r in result.raw:
        writer.writerow([
            r.profile, r.load, r.matrix, r.seed, r.obj1, r.obj2,
            r.unserved_count, r.unserved_gbps,
        ])


def write_aggregate_csv(result: ExperimentResult, stream: IO[str]) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow([
        "profile", "load", "samples", "obj1_mean", "obj1_ci95",
        "obj2_mean", "obj2_ci95", "unserved_gbps_mean",
    ])
    for row in result.aggregates:
        writer.writerow([
            row.profile, row.load, row.samples,
            _fmt(row.obj1_mean), _fmt(row.obj1_hw),
            _fmt(row.obj2_mean), _fmt(row.obj2_hw),
            _fmt(row.unserved_gbps_mean),
        ])


def write_timings_csv(result: ExperimentResult, stream: IO[str]) -> None:
    """Wall-clock seconds per cell; excluded from determinism guarantees."""
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["profile", "load", "matrix", "seconds"])
    for mode, load, matrix, seconds in result.timings:
        writer.writerow([mode, load, matrix, f"{seconds:.4f}"])


def write_result_files(result: ExperimentResult, out_dir: str | Path) -> dict[str, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "raw": out / "raw.csv",
        "aggregate": out / "aggregate.csv",
        "timings": out / "timings.csv",
    }
    with paths["raw"].open("w") as fh:
        write_raw_csv(result, fh)
    with paths["aggregate"].open("w") as fh:
        write_aggregate_csv(result, fh)
    with paths["timings"].open("w") as fh:
        write_timings_csv(result, fh)
    return paths


def _fmt(value: float) -> str:
    return "nan" if math.isnan(value) else f"{value:.6f}"
