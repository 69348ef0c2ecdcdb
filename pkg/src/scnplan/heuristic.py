"""Three-phase first-fit planner.

Phase 1 walks the service sequence and gives every request Type I/II
spatial channels on the lowest-index lanes that are wholly free along a
candidate path, consuming spare same-pair capacity first. Remainders that
would strand spectrum are parked in the unsatisfied-traffic table.
Phase 2 retries parked volumes on already-counted bypass lanes, largest
first, accepting some spectrum wastage because the objective counts lane
indices, not per-link usage. Phase 3 packs whatever is left onto the
switching lanes as guard-banded blocks, sweeping lanes in ascending order
and placing each volume at the lowest feasible ending slot; a final
retry of phase 2 without the lane-index cap mops up anything unplaced.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .allocation import AllocationState, Solution, solution_from_state
from .errors import InfeasibleInstanceError, ScnPlanError
from .instance import Instance, Request
from .physical import highest_feasible_modulation
from .topology import CandidatePath, Pair, k_shortest_paths


@dataclass(frozen=True)
class HeuristicConfig:
    """Knobs for one planning run."""

    k: int = 3
    lane_mode: str = "ninth"
    physics: str = "full"  # "full" or "simplified"
    fail_on_unserved: bool = False

    def __post_init__(self):
        if self.k < 1:
            raise ScnPlanError("k must be at least 1")


@dataclass(frozen=True)
class PhaseOutcome:
    """What the opening phase leaves behind for the later phases."""

    l_nw_a1_max: int
    leftover: tuple[tuple[int, int], ...]  # (request_id, t_rem) snapshot


class PlanContext:
    """Per-instance precomputation shared by every planning run.

    Candidate paths are the k shortest loopless paths per node pair,
    restricted to paths with a feasible modulation format. Paths beyond
    reach can carry nothing and are dropped here once.
    """

    def __init__(self, instance: Instance):
        self.instance = instance
        grid = instance.physics.grid
        self.grid = grid
        self.full_lane_ocs = grid.ocs_per_lane
        self.paths_by_pair: dict[Pair, tuple[CandidatePath, ...]] = {}
        # per path: (gbps per carrier, gbps per full lane, modulation name)
        self.path_info: dict[CandidatePath, tuple[int, int, str]] = {}
        self.requests_by_id: dict[int, Request] = {r.id: r for r in instance.requests}
        for pair in instance.pairs:
            kept = []
            for path in k_shortest_paths(instance.network, pair, instance.k):
                try:
                    entry = highest_feasible_modulation(
                        instance.physics.modulations, path.length_km
                    )
                except ScnPlanError:
                    continue
                kept.append(path)
                self.path_info[path] = (
                    entry.gbps_per_oc,
                    self.full_lane_ocs * entry.gbps_per_oc,
                    entry.name,
                )
            self.paths_by_pair[pair] = tuple(kept)

    def initial_pending(self) -> dict[Pair, int]:
        pending: dict[Pair, int] = {}
        for r in self.instance.requests:
            pending[r.pair] = pending.get(r.pair, 0) + 1
        return pending

    def new_state(self) -> AllocationState:
        return AllocationState(self.instance.network, self.instance.profile, self.grid)


def first_fit_lane(state: AllocationState, path: CandidatePath) -> int | None:
    """Lowest lane index wholly free on every link of the path (FF-SLA)."""
    return state.first_free_lane(path)


def best_candidate_lane(
    state: AllocationState, paths: Sequence[CandidatePath]
) -> tuple[CandidatePath, int] | None:
    """Candidate with the lowest first-fit lane; ties go to the shorter,
    then lower-ranked path (the iteration order)."""
    best: tuple[CandidatePath, int] | None = None
    for path in paths:
        lane = state.first_free_lane(path)
        if lane is not None and (best is None or lane < best[1]):
            best = (path, lane)
            if lane == 1:
                break
    return best


def first_fit_spectrum(
    state: AllocationState, path: CandidatePath, lane: int, fs_count: int, pair: Pair
) -> int | None:
    """Lowest start slot where a guard-respecting block fits (FF-SA)."""
    return state.first_fit_start(path, lane, fs_count, (pair, path.nodes))


def assign_spatial_channels(
    ctx: PlanContext,
    state: AllocationState,
    seq: Sequence[Request],
    pending: dict[Pair, int],
) -> PhaseOutcome:
    """Phase 1: serve requests in sequence with Type I/II channels.

    Spare capacity recorded for the request's pair is consumed first. The
    remainder is covered by full-lane channels; the final partial lane is
    either registered as spare capacity (same-pair requests still pending)
    or parked in the unsatisfied-traffic table. When no lane is free along
    any candidate the remainder is parked as well rather than aborting.
    """
    grid = ctx.grid
    for r in seq:
        pending[r.pair] -= 1
        t = r.gbps
        entry = state.t2_find(r.pair)
        if entry is not None:
            t_oc, _full, mod = ctx.path_info[entry.path]
            usable_ocs = entry.remaining_fs // grid.fs_per_oc
            t_p = usable_ocs * t_oc
            if t_p > t:
                ocs = -(-t // t_oc)
                state.append_to_sch(entry.sch_id, r.id, r.pair, ocs, mod)
                state.t2_consume(entry, ocs * grid.fs_per_oc, remove=False)
                continue
            if usable_ocs >= 1:
                state.append_to_sch(entry.sch_id, r.id, r.pair, usable_ocs, mod)
            t -= t_p
            state.t2_consume(entry, entry.remaining_fs, remove=True)
        while t > 0:
            best = best_candidate_lane(state, ctx.paths_by_pair.get(r.pair, ()))
            if best is None:
                state.t3_add(r.id, t)
                break
            path, lane = best
            t_oc, t_full, mod = ctx.path_info[path]
            if t_full > t:
                if pending[r.pair] > 0:
                    ocs = -(-t // t_oc)
                    sch = state.reserve_bypass_sch(r.id, r.pair, path, lane, ocs, mod)
                    b_rem = grid.fs_max - ocs * grid.fs_per_oc
                    if b_rem >= grid.fs_per_oc:
                        state.t2_add(r.pair, sch.id, b_rem)
                else:
                    state.t3_add(r.id, t)
                t = 0
            else:
                state.reserve_bypass_sch(r.id, r.pair, path, lane, ctx.full_lane_ocs, mod)
                t -= t_full
    l_nw_a1_max = max((l for l in state.used_lanes if not state.profile.is_switching(l)),
                      default=0)
    return PhaseOutcome(
        l_nw_a1_max=l_nw_a1_max,
        leftover=tuple((e.request_id, e.t_rem) for e in state.table3),
    )


def reassign_to_spare_lanes(
    ctx: PlanContext,
    state: AllocationState,
    l_max: int,
    allow_any_lane: bool = False,
) -> None:
    """Phase 2: retry parked volumes on lanes that are already counted.

    Entries are processed from the largest unsatisfied volume down. Each
    keeps taking full-lane Type I channels while its best first-fit lane
    stays within ``l_max`` (ignored when ``allow_any_lane``); the final
    partial channel deliberately strands its spare spectrum. An entry
    whose best lane lies beyond the cap stays parked, possibly reduced.
    """
    grid = ctx.grid
    ordered = sorted(state.table3, key=lambda e: -e.t_rem)
    for entry in ordered:
        r = ctx.requests_by_id[entry.request_id]
        t_rem = entry.t_rem
        while True:
            if t_rem == 0:
                state.t3_remove(r.id)
                break
            best = best_candidate_lane(state, ctx.paths_by_pair.get(r.pair, ()))
            if best is None or (not allow_any_lane and best[1] > l_max):
                if t_rem != entry.t_rem:
                    state.t3_set(r.id, t_rem)
                break
            path, lane = best
            t_oc, t_full, mod = ctx.path_info[path]
            if t_full > t_rem:
                ocs = -(-t_rem // t_oc)
                state.reserve_bypass_sch(r.id, r.pair, path, lane, ocs, mod)
                state.t3_remove(r.id)
                break
            state.reserve_bypass_sch(r.id, r.pair, path, lane, ctx.full_lane_ocs, mod)
            t_rem -= t_full


def assign_shared_spectrum(ctx: PlanContext, state: AllocationState) -> None:
    """Phase 3: pack remaining volumes onto switching lanes as blocks.

    Sweeps switching lanes in ascending index. Per lane, the (descending)
    table is scanned and each entry is placed at the candidate giving the
    lowest ending slot index, when one fits. Each entry is placed as a
    single block; if entries survive the sweep, phase 2 runs once more
    with the lane cap lifted.
    """
    grid = ctx.grid
    ordered = sorted(state.table3, key=lambda e: -e.t_rem)
    served: set[int] = set()
    for lane in sorted(state.profile.lw):
        if len(served) == len(ordered):
            break
        for entry in ordered:
            if entry.request_id in served:
                continue
            r = ctx.requests_by_id[entry.request_id]
            best = None  # (end, path, start, ocs, mod)
            for path in ctx.paths_by_pair.get(r.pair, ()):
                t_oc, _full, mod = ctx.path_info[path]
                ocs = -(-entry.t_rem // t_oc)
                fs = ocs * grid.fs_per_oc
                if fs > grid.fs_max:
                    continue
                start = state.first_fit_start(path, lane, fs, (r.pair, path.nodes))
                if start is None:
                    continue
                end = start + fs - 1
                if best is None or end < best[0]:
                    best = (end, path, start, ocs, mod)
            if best is not None:
                _end, path, start, ocs, mod = best
                state.reserve_wxc_block(r.id, r.pair, path, lane, start, ocs, mod)
                state.t3_remove(r.id)
                served.add(r.id)
    if state.table3:
        reassign_to_spare_lanes(ctx, state, l_max=0, allow_any_lane=True)


def default_sequence(requests: Sequence[Request]) -> tuple[Request, ...]:
    """Descending traffic volume, ties by request id."""
    return tuple(sorted(requests, key=lambda r: (-r.gbps, r.id)))


def plan(
    instance: Instance,
    order: Sequence[Request] | Sequence[int] | None = None,
    *,
    context: PlanContext | None = None,
    fail_on_unserved: bool = False,
) -> Solution:
    """Run the full three-phase pipeline for one service sequence.

    The result is a deterministic function of (instance, order). Unserved
    volumes are reported in the solution rather than raised, unless
    ``fail_on_unserved`` is set.
    """
    ctx = context or PlanContext(instance)
    seq = _normalize_order(instance, order)
    state = ctx.new_state()
    pending = ctx.initial_pending()
    outcome = assign_spatial_channels(ctx, state, seq, pending)
    after_phase1 = outcome.leftover
    reassign_to_spare_lanes(ctx, state, outcome.l_nw_a1_max)
    after_phase2 = tuple((e.request_id, e.t_rem) for e in state.table3)
    assign_shared_spectrum(ctx, state)
    unserved = [(e.request_id, e.t_rem) for e in state.table3]
    if unserved and fail_on_unserved:
        detail = ", ".join(f"request {rid}: {rem} Gbps" for rid, rem in unserved)
        raise InfeasibleInstanceError(f"could not serve all demand ({detail})")
    diagnostics = {
        "sequence": [r.id for r in seq],
        "l_nw_a1_max": outcome.l_nw_a1_max,
        "leftover_after_phase1": [list(x) for x in after_phase1],
        "leftover_after_phase2": [list(x) for x in after_phase2],
    }
    return solution_from_state(state, instance.requests, unserved, diagnostics)


def _normalize_order(
    instance: Instance, order: Sequence[Request] | Sequence[int] | None
) -> tuple[Request, ...]:
    if order is None:
        return default_sequence(instance.requests)
    seq = tuple(
        instance.request_by_id(item) if isinstance(item, int) else item for item in order
    )
    if sorted(r.id for r in seq) != sorted(r.id for r in instance.requests):
        raise ScnPlanError("service sequence is not a permutation of the instance requests")
    return seq
