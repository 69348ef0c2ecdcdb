"""Exhaustive exact solver for tiny instances.

Searches over channel decompositions per request: each request is split
into at most a configured number of pieces, every piece being a (candidate
path, lane, carrier count) triple. Lanes that have never been touched are
interchangeable within each class, so only the first unused lane of each
class is branched on. Feasibility on a switching lane is decided exactly
by trying placement orders with earliest-fit positions, which is complete
for pairwise-separation packing. The search minimizes (total lanes used,
switching lanes used) lexicographically and is intended for instances of
a handful of nodes, lanes, and requests; anything bigger is refused.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from itertools import permutations

from .allocation import Channel, Solution
from .errors import InfeasibleInstanceError, OracleLimitError
from .heuristic import PlanContext
from .instance import Instance, Request
from .topology import CandidatePath

Piece = tuple[CandidatePath, int, int]  # (path, lane, oc_count)


@dataclass(frozen=True)
class OracleLimits:
    max_nodes: int = 6
    max_lanes: int = 4
    max_requests: int = 8
    max_splits: int = 2
    time_budget_s: float = 120.0


def exact_solve(
    instance: Instance,
    limits: OracleLimits = OracleLimits(),
    *,
    context: PlanContext | None = None,
) -> Solution:
    """Optimal solution for a tiny instance, or raise when none exists."""
    searcher = _Searcher(instance, limits, relaxed=False, context=context)
    best = searcher.run()
    if best is None:
        raise InfeasibleInstanceError("no feasible assignment within the candidate paths")
    return searcher.materialize(best)


def relaxed_lane_bound_exact(
    instance: Instance,
    limits: OracleLimits = OracleLimits(),
    *,
    context: PlanContext | None = None,
) -> int:
    """Exact optimum of the relaxed lane-count model, by the same search.

    Only demand coverage and per-(link, lane) capacity are enforced, so
    the result lower-bounds the full problem for every lane profile.
    """
    searcher = _Searcher(instance, limits, relaxed=True, context=context)
    best = searcher.run()
    if best is None:
        raise InfeasibleInstanceError("even the relaxed model admits no assignment")
    return best[0][0]


class _Searcher:
    def __init__(self, instance, limits, relaxed, context=None):
        if len(instance.network.nodes) > limits.max_nodes:
            raise OracleLimitError(f"instance has more than {limits.max_nodes} nodes")
        if instance.profile.lanes > limits.max_lanes:
            raise OracleLimitError(f"instance has more than {limits.max_lanes} lanes")
        if len(instance.requests) > limits.max_requests:
            raise OracleLimitError(f"instance has more than {limits.max_requests} requests")
        self.instance = instance
        self.limits = limits
        self.relaxed = relaxed
        self.ctx = context or PlanContext(instance)
        self.grid = instance.physics.grid
        self.profile = instance.profile
        self.lanes = instance.profile.lanes
        self.lnw = instance.profile.lnw
        # canonical service order: largest volumes first for tighter pruning
        self.order: list[Request] = sorted(
            instance.requests, key=lambda r: (-r.gbps, r.id)
        )
        self.deadline = time.monotonic() + limits.time_budget_s
        self.nodes_visited = 0
        # search state
        self.used_lanes: set[int] = set()
        self.bypass_groups: dict[tuple[int, int], tuple] = {}
        self.bypass_fs: dict[tuple[int, int], int] = {}
        self.lane_blocks: dict[int, list[tuple[int, tuple, frozenset]]] = {}
        self.pieces: list[list[Piece]] = [[] for _ in self.order]
        self.best_key: tuple[int, int] | None = None
        self.best_pieces: list[list[Piece]] | None = None
        self._fit_memo: dict[tuple, bool] = {}

    # -- top level ---------------------------------------------------------

    def run(self):
        self._assign_request(0)
        if self.best_key is None:
            return None
        return (self.best_key, self.best_pieces)

    def _tick(self):
        self.nodes_visited += 1
        if self.nodes_visited % 4096 == 0 and time.monotonic() > self.deadline:
            raise OracleLimitError(
                f"time budget of {self.limits.time_budget_s} s exceeded "
                f"after {self.nodes_visited} nodes"
            )

    def _objective(self) -> tuple[int, int]:
        return (len(self.used_lanes), len(self.used_lanes & self.profile.lw))

    def _prunable(self) -> bool:
        if self.best_key is None:
            return False
        return self._objective() >= self.best_key

    def _assign_request(self, idx: int) -> None:
        self._tick()
        if self._prunable():
            return
        if idx == len(self.order):
            key = self._objective()
            if self.best_key is None or key < self.best_key:
                self.best_key = key
                self.best_pieces = [list(p) for p in self.pieces]
            return
        request = self.order[idx]
        self._assign_piece(idx, request, request.gbps, (0, 0), self.limits.max_splits)

    def _assign_piece(self, idx, request, t_left, min_slot, pieces_left):
        """Add one more piece for the request, slots in canonical order."""
        self._tick()
        if self._prunable():
            return
        paths = self.ctx.paths_by_pair.get(request.pair, ())
        for path in paths:
            for lane in self._candidate_lanes():
                slot = (path.rank, lane)
                if slot < min_slot:
                    continue
                t_oc = self.ctx.path_info[path][0]
                need = -(-t_left // t_oc)
                max_here = min(need, self.grid.ocs_per_lane)
                if pieces_left == 1:
                    oc_options = [need] if need <= max_here else []
                else:
                    # keep a positive remainder for the next piece, or finish here
                    oc_options = list(range(min(need - 1, max_here), 0, -1))
                    if need <= max_here:
                        oc_options.insert(0, need)
                for oc in oc_options:
                    undo = self._place(request, path, lane, oc)
                    if undo is not None:
                        self.pieces[idx].append((path, lane, oc))
                        if oc == need:
                            self._assign_request(idx + 1)
                        else:
                            self._assign_piece(
                                idx, request, t_left - oc * t_oc, slot, pieces_left - 1
                            )
                        self.pieces[idx].pop()
                        self._undo(undo)

    def _candidate_lanes(self):
        """Used lanes plus the first untouched lane of each class."""
        out = sorted(self.used_lanes)
        for lane in range(1, self.lanes + 1):
            if lane not in self.used_lanes and lane in self.lnw:
                out.append(lane)
                break
        for lane in sorted(self.profile.lw):
            if lane not in self.used_lanes:
                out.append(lane)
                break
        return out

    # -- incremental feasibility -------------------------------------------

    def _place(self, request, path, lane, oc):
        """Try to add a piece; return an undo token or None if infeasible."""
        fs = oc * self.grid.fs_per_oc
        group = (request.pair, path.nodes)
        if self.relaxed:
            touched = []
            for e in path.link_ids:
                key = (e, lane)
                if self.bypass_fs.get(key, 0) + fs > self.grid.fs_max:
                    for k, amount in touched:
                        self.bypass_fs[k] -= amount
                    return None
                self.bypass_fs[key] = self.bypass_fs.get(key, 0) + fs
                touched.append((key, fs))
            lane_added = lane not in self.used_lanes
            self.used_lanes.add(lane)
            return ("relaxed", touched, lane_added, lane)
        if self.profile.is_switching(lane):
            blocks = self.lane_blocks.setdefault(lane, [])
            blocks.append((fs, group, frozenset(path.link_ids)))
            if not self._lane_feasible(lane):
                blocks.pop()
                return None
            lane_added = lane not in self.used_lanes
            self.used_lanes.add(lane)
            return ("block", lane, lane_added)
        # bypass lane: single group end to end, capacity shared by the group
        touched = []
        for e in path.link_ids:
            key = (e, lane)
            existing = self.bypass_groups.get(key)
            if existing is not None and existing != group:
                self._undo(("bypass", touched, False, lane))
                return None
            if self.bypass_fs.get(key, 0) + fs > self.grid.fs_max:
                self._undo(("bypass", touched, False, lane))
                return None
            self.bypass_groups[key] = group
            self.bypass_fs[key] = self.bypass_fs.get(key, 0) + fs
            touched.append((key, fs, existing is None))
        lane_added = lane not in self.used_lanes
        self.used_lanes.add(lane)
        return ("bypass", touched, lane_added, lane)

    def _undo(self, token):
        kind = token[0]
        if kind == "relaxed":
            _, touched, lane_added, lane = token
            for key, amount in touched:
                self.bypass_fs[key] -= amount
                if self.bypass_fs[key] == 0:
                    del self.bypass_fs[key]
            if lane_added:
                self.used_lanes.discard(lane)
        elif kind == "block":
            _, lane, lane_added = token
            self.lane_blocks[lane].pop()
            if lane_added:
                self.used_lanes.discard(lane)
        else:
            _, touched, lane_added, lane = token
            for key, amount, was_new in touched:
                self.bypass_fs[key] -= amount
                if self.bypass_fs[key] == 0:
                    del self.bypass_fs[key]
                if was_new:
                    del self.bypass_groups[key]
            if lane_added:
                self.used_lanes.discard(lane)

    def _lane_feasible(self, lane: int) -> bool:
        blocks = self.lane_blocks[lane]
        if len(blocks) <= 1:
            return blocks[0][0] <= self.grid.fs_max if blocks else True
        key = tuple(sorted(
            (fs, repr(g), tuple(sorted(map(repr, links)))) for fs, g, links in blocks
        ))
        cached = self._fit_memo.get(key)
        if cached is not None:
            return cached
        ok = _placement_positions(blocks, self.grid.fs_max, self.grid.fs_per_gb) is not None
        self._fit_memo[key] = ok
        return ok

    # -- solution construction ----------------------------------------------

    def materialize(self, best) -> Solution:
        _key, piece_lists = best
        grid = self.grid
        channels: list[Channel] = []
        next_id = 1
        bypass_fill: dict[tuple, int] = {}
        lane_positions: dict[int, list[int]] = {}
        if not self.relaxed:
            for lane in sorted({lane for pl in piece_lists for _p, lane, _o in pl
                                if self.profile.is_switching(lane)}):
                blocks = []
                for pl, req in zip(piece_lists, self.order):
                    for path, piece_lane, oc in pl:
                        if piece_lane == lane:
                            blocks.append((oc * grid.fs_per_oc, (req.pair, path.nodes),
                                           frozenset(path.link_ids)))
                positions = _placement_positions(blocks, grid.fs_max, grid.fs_per_gb)
                assert positions is not None
                lane_positions[lane] = positions
        lane_cursor: dict[int, int] = {lane: 0 for lane in lane_positions}
        for req, piece_list in zip(self.order, piece_lists):
            for path, lane, oc in piece_list:
                fs = oc * grid.fs_per_oc
                mod = self.ctx.path_info[path][2]
                if not self.relaxed and self.profile.is_switching(lane):
                    start = lane_positions[lane][lane_cursor[lane]]
                    lane_cursor[lane] += 1
                else:
                    fill_key = (lane, req.pair, path.nodes)
                    start = bypass_fill.get(fill_key, 0)
                    bypass_fill[fill_key] = start + fs
                channels.append(Channel(
                    next_id, req.id, req.pair, path, lane, oc, mod, start, start + fs - 1
                ))
                next_id += 1
        used = {c.lane for c in channels}
        per_link: dict[int, set[int]] = {}
        for c in channels:
            for e in c.path.link_ids:
                per_link.setdefault(e, set()).add(c.lane)
        return Solution(
            objectives=(len(used), len(used & self.profile.lw)),
            lane_link_total=sum(len(v) for v in per_link.values()),
            requests=tuple(self.instance.requests),
            channels=tuple(channels),
            unserved=(),
            diagnostics={"search_nodes": self.nodes_visited},
        )


def _placement_positions(blocks, fs_max, fs_gb):
    """Earliest-fit positions for the blocks in some order, or None.

    Tries placement orders; within one order each block goes to the lowest
    start compatible with the already placed blocks it shares a link with
    (disjoint, plus a guard gap between different groups). If any
    placement exists, the order sorted by its start positions succeeds, so
    scanning all orders decides feasibility exactly. Returns positions in
    the blocks' original order.
    """
    n = len(blocks)
    if n == 0:
        return []
    for order in permutations(range(n)):
        positions: list[int | None] = [None] * n
        ok = True
        for i in order:
            fs, group, links = blocks[i]
            start = 0
            moved = True
            while moved:
                moved = False
                for j in order:
                    if j == i or positions[j] is None:
                        continue
                    ofs, ogroup, olinks = blocks[j]
                    if not links & olinks:
                        continue
                    gap = 0 if ogroup == group else fs_gb
                    lo = positions[j] - fs - gap + 1
                    hi = positions[j] + ofs - 1 + gap
                    if lo <= start <= hi:
                        start = hi + 1
                        moved = True
            if start + fs - 1 > fs_max - 1:
                ok = False
                break
            positions[i] = start
        if ok:
            return [int(p) for p in positions]
    return None
