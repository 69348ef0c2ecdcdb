"""Problem instances: request sets bundled with a network and physics."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ScnPlanError
from .physical import Physics, default_physics
from .topology import LaneProfile, Network, NodeId, Pair


@dataclass(frozen=True)
class Request:
    """A unidirectional connection request with a traffic volume in Gbps."""

    id: int
    source: NodeId
    destination: NodeId
    gbps: int

    def __post_init__(self):
        if self.source == self.destination:
            raise ScnPlanError(f"request {self.id}: source equals destination")
        if self.gbps <= 0:
            raise ScnPlanError(f"request {self.id}: traffic volume must be positive")

    @property
    def pair(self) -> Pair:
        return (self.source, self.destination)


@dataclass(frozen=True)
class Instance:
    """Everything a solver needs: topology, lane profile, physics, demand."""

    network: Network
    profile: LaneProfile
    requests: tuple[Request, ...]
    physics: Physics = field(default_factory=default_physics)
    k: int = 3

    def __post_init__(self):
        if self.profile.lanes != self.network.lanes_per_link:
            raise ScnPlanError("lane profile size does not match the network lane count")
        if self.k < 1:
            raise ScnPlanError("candidate path count k must be at least 1")
        seen = set()
        for r in self.requests:
            if r.id in seen:
                raise ScnPlanError(f"duplicate request id {r.id}")
            seen.add(r.id)

    def request_by_id(self, rid: int) -> Request:
        for r in self.requests:
            if r.id == rid:
                return r
        raise KeyError(rid)

    @property
    def pairs(self) -> tuple[Pair, ...]:
        out, seen = [], set()
        for r in self.requests:
            if r.pair not in seen:
                seen.add(r.pair)
                out.append(r.pair)
        return tuple(out)


def load_requests(doc: dict | str | Path) -> tuple[Request, ...]:
    """Parse a traffic document: {"requests": [{id, source, destination, gbps}]}."""
    if isinstance(doc, Path) or (isinstance(doc, str) and not doc.lstrip().startswith("{")):
        return load_requests(Path(doc).read_text())
    if isinstance(doc, str):
        doc = json.loads(doc)
    entries = doc["requests"] if isinstance(doc, dict) else doc
    return tuple(
        Request(int(e["id"]), e["source"], e["destination"], int(e["gbps"]))
        for e in entries
    )


def dump_requests(requests: tuple[Request, ...]) -> str:
    payload = {
        "requests": [
            {"id": r.id, "source": r.source, "destination": r.destination, "gbps": r.gbps}
            for r in requests
        ]
    }
    return json.dumps(payload, indent=2, sort_keys=True)
