"""Simulated-annealing search over service sequences.

The planner is deterministic for a fixed sequence, so the only leverage is
the order in which requests are served. The search starts from the
descending-volume order, proposes random position swaps, and accepts
regressions with the usual exp(-delta/T) rule, where delta is taken from
the first component at which the two energies differ so that the strict
priority of the objectives is preserved.
"""

from __future__ import annotations

import csv
import math
import random
from dataclasses import dataclass
from typing import IO, Sequence

from .allocation import Solution
from .errors import ScnPlanError
from .heuristic import PlanContext, default_sequence, plan
from .instance import Instance, Request


@dataclass(frozen=True)
class Energy:
    """Lexicographic solution quality: fewer lanes, then fewer switching
    lanes, then a smaller per-link lane total as a tie key."""

    obj1: int
    obj2: int
    lane_link_total: int

    def key(self) -> tuple[int, int, int]:
        return (self.obj1, self.obj2, self.lane_link_total)


@dataclass(frozen=True)
class AnnealConfig:
    iterations: int = 1000
    initial_temperature: float | None = None  # None: calibrate from 20 probe swaps
    cooling: float = 0.95
    seed: int = 0

    def __post_init__(self):
        if self.iterations < 1:
            raise ScnPlanError("iteration budget must be at least 1")
        if not 0.0 < self.cooling < 1.0:
            raise ScnPlanError("cooling factor must lie strictly between 0 and 1")


@dataclass(frozen=True)
class TraceRow:
    iteration: int
    temperature: float
    energy: Energy
    unserved_gbps: int
    accepted: bool
    best_energy: Energy


def solution_energy(solution: Solution) -> Energy:
    return Energy(solution.obj1, solution.obj2, solution.lane_link_total)


def _search_key(solution: Solution) -> tuple[int, int, int, int]:
    # Sequences that strand demand rank behind any fully served one.
    return (solution.unserved_gbps,) + solution_energy(solution).key()


def _first_delta(cand: tuple, cur: tuple) -> float:
    for c, k in zip(cand, cur):
        if c != k:
            return float(c - k)
    return 0.0


def optimize_sequence(
    instance: Instance,
    config: AnnealConfig = AnnealConfig(),
    *,
    context: PlanContext | None = None,
) -> tuple[Solution, tuple[Request, ...], list[TraceRow]]:
    """Best solution found, the sequence that produced it, and the trace.

    Evaluates exactly ``config.iterations`` sequences (the first one is the
    descending-volume order). Deterministic for a fixed seed.
    """
    ctx = context or PlanContext(instance)
    rng = random.Random(config.seed)
    current_seq = list(default_sequence(instance.requests))
    current_sol = plan(instance, current_seq, context=ctx)
    current_key = _search_key(current_sol)
    best_seq = tuple(current_seq)
    best_sol = current_sol
    best_key = current_key
    trace = [
        TraceRow(1, 0.0, solution_energy(current_sol), current_sol.unserved_gbps,
                 True, solution_energy(best_sol))
    ]
    n = len(current_seq)
    if n < 2 or config.iterations == 1:
        return best_sol, best_seq, trace

    temperature = (
        config.initial_temperature
        if config.initial_temperature is not None
        else _calibrate_temperature(instance, ctx, current_seq, current_key, rng)
    )
    for iteration in range(2, config.iterations + 1):
        i, j = rng.sample(range(n), 2)
        cand_seq = current_seq[:]
        cand_seq[i], cand_seq[j] = cand_seq[j], cand_seq[i]
        cand_sol = plan(instance, cand_seq, context=ctx)
        cand_key = _search_key(cand_sol)
        delta = _first_delta(cand_key, current_key)
        accepted = delta <= 0 or rng.random() < math.exp(-delta / max(temperature, 1e-12))
        if accepted:
            current_seq, current_sol, current_key = cand_seq, cand_sol, cand_key
            if cand_key < best_key:
                best_seq, best_sol, best_key = tuple(cand_seq), cand_sol, cand_key
        trace.append(
            TraceRow(iteration, temperature, solution_energy(cand_sol),
                     cand_sol.unserved_gbps, accepted, solution_energy(best_sol))
        )
        temperature *= config.cooling
    return best_sol, best_seq, trace


def _calibrate_temperature(
    instance: Instance,
    ctx: PlanContext,
    seq: list[Request],
    base_key: tuple,
    rng: random.Random,
    probes: int = 20,
) -> float:
    """Mean absolute first-component delta over random probe swaps."""
    n = len(seq)
    deltas = []
    for _ in range(probes):
        i, j = rng.sample(range(n), 2)
        probe = seq[:]
        probe[i], probe[j] = probe[j], probe[i]
        probe_key = _search_key(plan(instance, probe, context=ctx))
        deltas.append(abs(_first_delta(probe_key, base_key)))
    mean = sum(deltas) / len(deltas) if deltas else 0.0
    return mean if mean > 0 else 1.0


def write_trace(rows: Sequence[TraceRow], stream: IO[str]) -> None:
    """One CSV row per iteration for reproducibility audits."""
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow([
        "iteration", "temperature", "obj1", "obj2", "lane_link_total",
        "unserved_gbps", "accepted", "best_obj1", "best_obj2", "best_lane_link_total",
    ])
    for row in rows:
        writer.writerow([
            row.iteration, f"{row.temperature:.6f}",
            row.energy.obj1, row.energy.obj2, row.energy.lane_link_total,
            row.unserved_gbps, int(row.accepted),
            row.best_energy.obj1, row.best_energy.obj2, row.best_energy.lane_link_total,
        ])
