"""Mutable resource ledger for one planning run.

Occupancy is tracked per (directed link, lane). A lane without wavelength
switching can only be owned outright by one spatial channel (SCh) along
its whole path. A lane with switching support carries a ledger of disjoint
frequency-slot intervals; spectrally adjacent intervals belonging to
different node pairs (or different paths) must keep one guard slice of
clearance, while members of the same SCh abut freely.

Lane freedom is kept as one bitmask int per link (bit l-1 set means lane l
is wholly free on that link), which keeps first-fit scans cheap. Every
mutation is journaled; replaying the journal on an empty state reproduces
the state exactly, which is what the audit trail and the determinism tests
rely on.
"""

from __future__ import annotations

import json
from bisect import insort
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import (
    CapacityError,
    GridRangeError,
    GuardBandError,
    LaneConflictError,
    PairMismatchError,
    ScnPlanError,
)
from .instance import Request
from .physical import GridParams
from .topology import CandidatePath, LaneProfile, Network, Pair, _path_from_nodes

# A group key identifies channels allowed to share spectrum without a
# guard band: same node pair and same routing path.
GroupKey = tuple[Pair, tuple]


@dataclass(frozen=True)
class Channel:
    """One assigned lightpath: path, lane, carriers, and slot interval."""

    id: int
    request_id: int
    pair: Pair
    path: CandidatePath
    lane: int
    oc_count: int
    modulation: str
    fs_start: int
    fs_end: int

    @property
    def group(self) -> GroupKey:
        return (self.pair, self.path.nodes)


@dataclass
class SChRecord:
    """A spatial channel: the lane-level entity channels are packed into."""

    id: int
    sch_type: str  # "I", "II", or "III-carrier"
    pair: Pair
    path: CandidatePath
    lane: int
    used_fs: int
    channel_ids: list[int] = field(default_factory=list)


@dataclass
class Type2Entry:
    """Partially filled same-pair SCh whose spare spectrum awaits reuse."""

    pair: Pair
    sch_id: int
    path: CandidatePath
    lane: int
    remaining_fs: int


@dataclass
class Type3Entry:
    """Unsatisfied traffic volume waiting for shared-spectrum service."""

    request_id: int
    t_rem: int


class AllocationState:
    def __init__(self, network: Network, profile: LaneProfile, grid: GridParams):
        if profile.lanes != network.lanes_per_link:
            raise ScnPlanError("lane profile does not match network lane count")
        self.network = network
        self.profile = profile
        self.grid = grid
        self._lanes = profile.lanes
        self._full_mask = (1 << profile.lanes) - 1
        # bit l-1 set == lane l wholly free on that link
        self._free: list[int] = [self._full_mask] * network.num_links
        # (link_id, lane) -> sorted [start, end, group, channel_id] blocks
        self._ledgers: dict[tuple[int, int], list[list]] = {}
        self._owner: dict[tuple[int, int], int] = {}
        self.schs: dict[int, SChRecord] = {}
        self.channels: dict[int, Channel] = {}
        self.table2: list[Type2Entry] = []
        self.table3: list[Type3Entry] = []
        self.used_lanes: set[int] = set()
        self.journal: list[tuple] = []
        self._next_sch = 1
        self._next_channel = 1

    # -- queries ---------------------------------------------------------

    def free_lane_mask(self, path: CandidatePath) -> int:
        mask = self._full_mask
        for e in path.link_ids:
            mask &= self._free[e]
            if not mask:
                return 0
        return mask

    def first_free_lane(self, path: CandidatePath) -> int | None:
        """Lowest lane index wholly free on every link of the path."""
        mask = self.free_lane_mask(path)
        if not mask:
            return None
        return (mask & -mask).bit_length()

    def lane_free_on_path(self, path: CandidatePath, lane: int) -> bool:
        bit = 1 << (lane - 1)
        return all(self._free[e] & bit for e in path.link_ids)

    def objectives(self) -> tuple[int, int]:
        """(lanes used anywhere, switching lanes used anywhere)."""
        obj1 = len(self.used_lanes)
        obj2 = len(self.used_lanes & self.profile.lw)
        return obj1, obj2

    def lane_link_total(self) -> int:
        """Sum over links of the per-link used-lane count (tie-break key)."""
        return sum((self._full_mask & ~m).bit_count() for m in self._free)

    def blocks_on(self, link_id: int, lane: int) -> list[tuple]:
        return [tuple(b) for b in self._ledgers.get((link_id, lane), [])]

    # -- spatial channel operations ---------------------------------------

    def reserve_bypass_sch(
        self,
        request_id: int,
        pair: Pair,
        path: CandidatePath,
        lane: int,
        oc_count: int,
        modulation: str,
    ) -> SChRecord:
        """Claim a wholly free lane along the path for a new Type I SCh."""
        if oc_count < 1:
            raise CapacityError("a spatial channel must hold at least one carrier")
        fs = oc_count * self.grid.fs_per_oc
        if fs > self.grid.fs_max:
            raise CapacityError(f"{oc_count} carriers need {fs} slices > lane size {self.grid.fs_max}")
        if not 1 <= lane <= self._lanes:
            raise GridRangeError(f"lane {lane} outside 1..{self._lanes}")
        bit = 1 << (lane - 1)
        for e in path.link_ids:
            if not self._free[e] & bit:
                raise LaneConflictError(
                    f"lane {lane} already occupied on link {self.network.links[e].src!r}"
                    f"->{self.network.links[e].dst!r}"
                )
        sch = SChRecord(self._next_sch, "I", pair, path, lane, fs)
        self._next_sch += 1
        channel = self._add_channel(request_id, pair, path, lane, oc_count, modulation, 0, fs - 1)
        sch.channel_ids.append(channel.id)
        self.schs[sch.id] = sch
        for e in path.link_ids:
            self._free[e] &= ~bit
            self._owner[(e, lane)] = sch.id
            if self.profile.is_switching(lane):
                insort(self._ledgers.setdefault((e, lane), []),
                       [0, fs - 1, channel.group, channel.id])
        self.used_lanes.add(lane)
        self.journal.append(("sch", request_id, pair, path, lane, oc_count, modulation))
        return sch

    def append_to_sch(
        self, sch_id: int, request_id: int, pair: Pair, oc_count: int, modulation: str
    ) -> Channel:
        """Pack another same-pair channel into an SCh, guard-band free."""
        sch = self.schs.get(sch_id)
        if sch is None:
            raise ScnPlanError(f"no spatial channel with id {sch_id}")
        if sch.pair != pair:
            raise PairMismatchError(
                f"SCh {sch_id} belongs to pair {sch.pair}, not {pair}"
            )
        if oc_count < 1:
            raise CapacityError("appended channel must hold at least one carrier")
        fs = oc_count * self.grid.fs_per_oc
        if sch.used_fs + fs > self._sch_capacity_fs(sch):
            raise CapacityError(
                f"SCh {sch_id} has {self._sch_capacity_fs(sch) - sch.used_fs} free slices, "
                f"{fs} requested"
            )
        start = sch.used_fs
        channel = self._add_channel(
            request_id, pair, sch.path, sch.lane, oc_count, modulation, start, start + fs - 1
        )
        sch.channel_ids.append(channel.id)
        sch.used_fs += fs
        sch.sch_type = "II"
        if self.profile.is_switching(sch.lane):
            for e in sch.path.link_ids:
                for block in self._ledgers[(e, sch.lane)]:
                    if block[0] == 0 and block[2] == (sch.pair, sch.path.nodes):
                        block[1] = sch.used_fs - 1
                        break
        self.journal.append(("append", sch_id, request_id, pair, oc_count, modulation))
        return channel

    def _sch_capacity_fs(self, sch: SChRecord) -> int:
        """Slices an SCh may grow into before hitting the grid or a neighbor."""
        cap = self.grid.fs_max
        if not self.profile.is_switching(sch.lane):
            return cap
        group = (sch.pair, sch.path.nodes)
        for e in sch.path.link_ids:
            for start, end, other_group, _cid in self._ledgers.get((e, sch.lane), []):
                if start == 0 and other_group == group:
                    continue
                gap = self.grid.fs_per_gb if other_group != group else 0
                cap = min(cap, start - gap)
        return cap

    # -- switching-lane block operations ----------------------------------

    def first_fit_start(
        self, path: CandidatePath, lane: int, fs_count: int, group: GroupKey
    ) -> int | None:
        """Lowest start index where a block fits on every link of the path.

        Clearance of one guard slice is required next to blocks of any
        other group; same-group blocks only need to be disjoint.
        """
        if not self.profile.is_switching(lane):
            return None
        if fs_count < 1 or fs_count > self.grid.fs_max:
            return None
        zones: list[tuple[int, int]] = []
        gb = self.grid.fs_per_gb
        for e in path.link_ids:
            for start, end, other_group, _cid in self._ledgers.get((e, lane), []):
                if other_group == group:
                    zones.append((start - fs_count + 1, end))
                else:
                    zones.append((start - fs_count - gb + 1, end + gb))
        zones.sort()
        s = 0
        for lo, hi in zones:
            if hi < s:
                continue
            if lo > s:
                break
            s = hi + 1
        if s + fs_count - 1 > self.grid.f_max:
            return None
        return s

    def reserve_wxc_block(
        self,
        request_id: int,
        pair: Pair,
        path: CandidatePath,
        lane: int,
        start_fs: int,
        oc_count: int,
        modulation: str,
    ) -> Channel:
        """Place a slot interval on a switching lane along the path."""
        if not self.profile.is_switching(lane):
            raise LaneConflictError(f"lane {lane} has no wavelength switching support")
        if oc_count < 1:
            raise CapacityError("a block must hold at least one carrier")
        fs = oc_count * self.grid.fs_per_oc
        end = start_fs + fs - 1
        if start_fs < 0 or end > self.grid.f_max:
            raise GridRangeError(f"interval [{start_fs}, {end}] outside grid 0..{self.grid.f_max}")
        group = (pair, path.nodes)
        gb = self.grid.fs_per_gb
        for e in path.link_ids:
            for a, b, other_group, _cid in self._ledgers.get((e, lane), []):
                if start_fs <= b and a <= end:
                    raise LaneConflictError(
                        f"interval [{start_fs}, {end}] overlaps [{a}, {b}] on lane {lane}"
                    )
                if other_group != group and start_fs <= b + gb and a - gb <= end:
                    raise GuardBandError(
                        f"interval [{start_fs}, {end}] within guard distance of "
                        f"[{a}, {b}] held by another pair"
                    )
        channel = self._add_channel(request_id, pair, path, lane, oc_count, modulation, start_fs, end)
        sch = SChRecord(self._next_sch, "III-carrier", pair, path, lane, fs, [channel.id])
        self._next_sch += 1
        self.schs[sch.id] = sch
        bit = 1 << (lane - 1)
        for e in path.link_ids:
            insort(self._ledgers.setdefault((e, lane), []), [start_fs, end, group, channel.id])
            self._free[e] &= ~bit
        self.used_lanes.add(lane)
        self.journal.append(("block", request_id, pair, path, lane, start_fs, oc_count, modulation))
        return channel

    def _add_channel(self, request_id, pair, path, lane, oc_count, modulation, fs_start, fs_end):
        channel = Channel(
            self._next_channel, request_id, pair, path, lane, oc_count, modulation, fs_start, fs_end
        )
        self._next_channel += 1
        self.channels[channel.id] = channel
        return channel

    # -- heuristic tables --------------------------------------------------

    def t2_add(self, pair: Pair, sch_id: int, remaining_fs: int) -> None:
        if remaining_fs <= 0:
            raise ScnPlanError("a spare-capacity entry must have positive remaining spectrum")
        sch = self.schs[sch_id]
        self.table2.append(Type2Entry(pair, sch_id, sch.path, sch.lane, remaining_fs))
        self.journal.append(("t2_add", pair, sch_id, remaining_fs))

    def t2_find(self, pair: Pair) -> Type2Entry | None:
        """Oldest spare-capacity entry for the pair, if any."""
        for entry in self.table2:
            if entry.pair == pair:
                return entry
        return None

    def t2_consume(self, entry: Type2Entry, used_fs: int, remove: bool) -> None:
        if remove:
            self.table2.remove(entry)
        else:
            entry.remaining_fs -= used_fs
        self.journal.append(("t2_consume", entry.sch_id, used_fs, remove))

    def t3_add(self, request_id: int, t_rem: int) -> None:
        if t_rem <= 0:
            raise ScnPlanError("unsatisfied-traffic entries must be positive")
        self.table3.append(Type3Entry(request_id, t_rem))
        self.journal.append(("t3_add", request_id, t_rem))

    def t3_set(self, request_id: int, t_rem: int) -> None:
        for entry in self.table3:
            if entry.request_id == request_id:
                entry.t_rem = t_rem
                self.journal.append(("t3_set", request_id, t_rem))
                return
        raise ScnPlanError(f"request {request_id} not in the unsatisfied-traffic table")

    def t3_remove(self, request_id: int) -> None:
        for entry in self.table3:
            if entry.request_id == request_id:
                self.table3.remove(entry)
                self.journal.append(("t3_remove", request_id))
                return
        raise ScnPlanError(f"request {request_id} not in the unsatisfied-traffic table")

    # -- audit -------------------------------------------------------------

    @classmethod
    def replay(
        cls, network: Network, profile: LaneProfile, grid: GridParams, journal: Iterable[tuple]
    ) -> "AllocationState":
        """Re-execute a journal on an empty state."""
        state = cls(network, profile, grid)
        for op in journal:
            kind, args = op[0], op[1:]
            if kind == "sch":
                state.reserve_bypass_sch(*args)
            elif kind == "append":
                state.append_to_sch(*args)
            elif kind == "block":
                state.reserve_wxc_block(*args)
            elif kind == "t2_add":
                state.t2_add(*args)
            elif kind == "t2_consume":
                sch_id, used_fs, remove = args
                entry = next(e for e in state.table2 if e.sch_id == sch_id)
                state.t2_consume(entry, used_fs, remove)
            elif kind == "t3_add":
                state.t3_add(*args)
            elif kind == "t3_set":
                state.t3_set(*args)
            elif kind == "t3_remove":
                state.t3_remove(*args)
            else:
                raise ScnPlanError(f"unknown journal entry kind {kind!r}")
        return state

    def same_occupancy_as(self, other: "AllocationState") -> bool:
        return (
            self._free == other._free
            and self._ledgers == other._ledgers
            and self._owner == other._owner
            and self.schs == other.schs
            and self.channels == other.channels
            and self.table2 == other.table2
            and self.table3 == other.table3
            and self.used_lanes == other.used_lanes
        )


@dataclass(frozen=True)
class Solution:
    """A complete assignment with objectives and audit metadata."""

    objectives: tuple[int, int]
    lane_link_total: int
    requests: tuple[Request, ...]
    channels: tuple[Channel, ...]
    unserved: tuple[tuple[int, int], ...]  # (request_id, residual gbps)
    diagnostics: dict = field(default_factory=dict, compare=False)

    @property
    def obj1(self) -> int:
        return self.objectives[0]

    @property
    def obj2(self) -> int:
        return self.objectives[1]

    @property
    def fully_served(self) -> bool:
        return not self.unserved

    @property
    def unserved_gbps(self) -> int:
        return sum(residual for _rid, residual in self.unserved)

    def channels_for(self, request_id: int) -> tuple[Channel, ...]:
        return tuple(c for c in self.channels if c.request_id == request_id)

    def to_dict(self) -> dict:
        return {
            "objectives": {"obj1": self.obj1, "obj2": self.obj2},
            "lane_link_total": self.lane_link_total,
            "requests": [
                {
                    "id": r.id,
                    "source": r.source,
                    "destination": r.destination,
                    "gbps": r.gbps,
                    "channels": [
                        {
                            "path": list(c.path.nodes),
                            "lane": c.lane,
                            "modulation": c.modulation,
                            "oc_count": c.oc_count,
                            "fs_start": c.fs_start,
                            "fs_end": c.fs_end,
                        }
                        for c in self.channels
                        if c.request_id == r.id
                    ],
                }
                for r in self.requests
            ],
            "unserved": [
                {"id": rid, "residual_gbps": residual} for rid, residual in self.unserved
            ],
            "diagnostics": self.diagnostics,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, doc: dict, network: Network) -> "Solution":
        """Rebuild a solution from its export document."""
        requests = []
        channels = []
        next_channel = 1
        for entry in doc["requests"]:
            req = Request(int(entry["id"]), entry["source"], entry["destination"], int(entry["gbps"]))
            requests.append(req)
            for ch in entry.get("channels", []):
                path = _path_from_nodes(network, ch["path"], rank=0)
                channels.append(
                    Channel(
                        next_channel,
                        req.id,
                        req.pair,
                        path,
                        int(ch["lane"]),
                        int(ch["oc_count"]),
                        str(ch["modulation"]),
                        int(ch["fs_start"]),
                        int(ch["fs_end"]),
                    )
                )
                next_channel += 1
        objectives = (int(doc["objectives"]["obj1"]), int(doc["objectives"]["obj2"]))
        unserved = tuple(
            (int(u["id"]), int(u["residual_gbps"])) for u in doc.get("unserved", [])
        )
        return cls(
            objectives=objectives,
            lane_link_total=int(doc.get("lane_link_total", 0)),
            requests=tuple(requests),
            channels=tuple(channels),
            unserved=unserved,
            diagnostics=doc.get("diagnostics", {}),
        )


def solution_from_state(
    state: AllocationState,
    requests: Sequence[Request],
    unserved: Sequence[tuple[int, int]],
    diagnostics: dict | None = None,
) -> Solution:
    obj = state.objectives()
    return Solution(
        objectives=obj,
        lane_link_total=state.lane_link_total(),
        requests=tuple(requests),
        channels=tuple(state.channels[cid] for cid in sorted(state.channels)),
        unserved=tuple(sorted(unserved)),
        diagnostics=diagnostics or {},
    )
