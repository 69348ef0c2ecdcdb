"""Network topologies, lane profiles, and candidate-path computation.

A network is a directed graph with a uniform lane count per link. Lane
indices 1..L are global: index i on one link and index i on another link
refer to the same spatial position, which is what makes end-to-end spatial
bypass without lane change possible. The lane profile splits the index
range into a low block without wavelength switching (bypass only) and a
high block with wavelength switching support.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import networkx as nx

from .errors import TopologyError

LANE_MODES = ("full", "ninth", "none", "explicit")

NodeId = str | int
Pair = tuple[NodeId, NodeId]


@dataclass(frozen=True)
class Link:
    src: NodeId
    dst: NodeId
    length_km: float


@dataclass(frozen=True)
class Network:
    """Directed graph with per-link lengths and a uniform lane count."""

    nodes: tuple[NodeId, ...]
    links: tuple[Link, ...]
    lanes_per_link: int
    name: str = ""
    link_index: dict[Pair, int] = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        _validate_network(self)
        object.__setattr__(
            self, "link_index", {(l.src, l.dst): i for i, l in enumerate(self.links)}
        )

    @property
    def num_links(self) -> int:
        return len(self.links)

    def length_of(self, src: NodeId, dst: NodeId) -> float:
        return self.links[self.link_index[(src, dst)]].length_km

    def to_digraph(self) -> nx.DiGraph:
        g = nx.DiGraph()
        g.add_nodes_from(self.nodes)
        for link in self.links:
            g.add_edge(link.src, link.dst, length_km=link.length_km)
        return g


def _validate_network(net: Network) -> None:
    if net.lanes_per_link < 1:
        raise TopologyError("lanes_per_link must be at least 1")
    if not net.nodes:
        raise TopologyError("topology has no nodes")
    node_set = set(net.nodes)
    seen: set[Pair] = set()
    for link in net.links:
        if link.src == link.dst:
            raise TopologyError(f"self-loop link at node {link.src!r}")
        if link.src not in node_set or link.dst not in node_set:
            raise TopologyError(f"link {link.src!r}->{link.dst!r} references unknown node")
        if (link.src, link.dst) in seen:
            raise TopologyError(f"duplicate link {link.src!r}->{link.dst!r}")
        if not link.length_km > 0:
            raise TopologyError(
                f"link {link.src!r}->{link.dst!r} has non-positive length {link.length_km}"
            )
        seen.add((link.src, link.dst))


@dataclass(frozen=True)
class LaneProfile:
    """Partition of lane indices 1..L into bypass-only and switching lanes.

    All bypass indices are lower than all switching indices, so the
    switching block is always the top of the range.
    """

    lanes: int
    lw: frozenset[int]
    mode: str

    def __post_init__(self):
        bad = [l for l in self.lw if not 1 <= l <= self.lanes]
        if bad:
            raise TopologyError(f"switching lane indices out of range 1..{self.lanes}: {bad}")
        if self.lw and min(self.lw) != self.lanes - len(self.lw) + 1:
            raise TopologyError("switching lanes must occupy the top of the index range")

    @property
    def lnw(self) -> frozenset[int]:
        return frozenset(range(1, self.lanes + 1)) - self.lw

    @property
    def lw_min(self) -> int | None:
        return min(self.lw) if self.lw else None

    @property
    def lw_max(self) -> int | None:
        return max(self.lw) if self.lw else None

    def is_switching(self, lane: int) -> bool:
        return lane in self.lw


def lane_profile(lanes: int, mode: str, lw: Iterable[int] | None = None) -> LaneProfile:
    """Build a lane profile for one of the OXC configurations.

    ``full``: every lane supports wavelength switching. ``none``: no lane
    does. ``ninth``: the top ceil(L/9) lanes do. ``explicit``: the given
    ``lw`` indices do (they must form the top of the range).
    """
    if lanes < 1:
        raise TopologyError("lane count must be at least 1")
    if mode not in LANE_MODES:
        raise TopologyError(f"unknown lane mode {mode!r}; expected one of {LANE_MODES}")
    if mode == "full":
        switching = range(1, lanes + 1)
    elif mode == "none":
        switching = ()
    elif mode == "ninth":
        count = math.ceil(lanes / 9)
        switching = range(lanes - count + 1, lanes + 1)
    else:
        if lw is None:
            raise TopologyError("explicit lane mode requires a list of switching indices")
        switching = lw
    return LaneProfile(lanes=lanes, lw=frozenset(switching), mode=mode)


@dataclass(frozen=True)
class CandidatePath:
    """A loopless routing path with its link indices and total length."""

    nodes: tuple[NodeId, ...]
    link_ids: tuple[int, ...]
    length_km: float
    rank: int

    @property
    def pair(self) -> Pair:
        return (self.nodes[0], self.nodes[-1])

    def __str__(self) -> str:
        return "-".join(str(n) for n in self.nodes)


def _path_from_nodes(net: Network, nodes: Sequence[NodeId], rank: int) -> CandidatePath:
    link_ids = []
    length = 0.0
    for a, b in zip(nodes, nodes[1:]):
        idx = net.link_index.get((a, b))
        if idx is None:
            raise TopologyError(f"no link {a!r}->{b!r} in network")
        link_ids.append(idx)
        length += net.links[idx].length_km
    return CandidatePath(tuple(nodes), tuple(link_ids), length, rank)


def k_shortest_paths(net: Network, pair: Pair, k: int) -> list[CandidatePath]:
    """Up to k shortest loopless paths, ties broken by node sequence.

    Returns an empty list when the destination is unreachable. The result
    is deterministic: paths are ordered by (length, lexicographic node
    sequence) and the order is total.
    """
    src, dst = pair
    if src == dst:
        raise TopologyError("source and destination must differ")
    if k < 1:
        raise TopologyError("k must be at least 1")
    g = net.to_digraph()
    if src not in g or dst not in g:
        raise TopologyError(f"unknown node in pair {pair!r}")
    collected: list[tuple[float, tuple[str, ...], tuple[NodeId, ...]]] = []
    try:
        gen = nx.shortest_simple_paths(g, src, dst, weight="length_km")
        kth_len = None
        for nodes in gen:
            length = sum(g[a][b]["length_km"] for a, b in zip(nodes, nodes[1:]))
            if kth_len is not None and length > kth_len + 1e-9:
                break
            collected.append((length, tuple(str(n) for n in nodes), tuple(nodes)))
            if len(collected) == k:
                kth_len = length
            if len(collected) > 4 * k + 64:  # tie classes beyond this are never needed
                break
    except nx.NetworkXNoPath:
        return []
    collected.sort(key=lambda item: (item[0], item[1]))
    return [
        _path_from_nodes(net, nodes, rank)
        for rank, (_, _, nodes) in enumerate(collected[:k], start=1)
    ]


def load_topology(doc: dict | str | Path) -> tuple[Network, LaneProfile]:
    """Parse a topology document (dict, JSON text, or file path).

    Expected fields: ``nodes`` (list), ``links`` (list of objects with
    ``src``, ``dst``, ``length_km``), ``lanes_per_link``, ``lane_mode``,
    and optionally ``lw`` for the explicit mode and ``name``.
    """
    if isinstance(doc, Path) or (isinstance(doc, str) and not doc.lstrip().startswith("{")):
        try:
            text = Path(doc).read_text()
        except OSError as exc:
            raise TopologyError(f"cannot read topology file {doc!r}: {exc}") from exc
        return load_topology(text)
    if isinstance(doc, str):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError as exc:
            raise TopologyError(f"topology document is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise TopologyError("topology document must be a JSON object")
    try:
        nodes = tuple(doc["nodes"])
        raw_links = doc["links"]
        lanes = int(doc["lanes_per_link"])
    except KeyError as exc:
        raise TopologyError(f"topology document missing field {exc}") from exc
    links = []
    for entry in raw_links:
        try:
            links.append(Link(entry["src"], entry["dst"], float(entry["length_km"])))
        except (KeyError, TypeError, ValueError) as exc:
            raise TopologyError(f"malformed link entry {entry!r}: {exc}") from exc
    net = Network(nodes=nodes, links=tuple(links), lanes_per_link=lanes,
                  name=str(doc.get("name", "")))
    mode = doc.get("lane_mode", "ninth")
    profile = lane_profile(lanes, mode, lw=doc.get("lw"))
    return net, profile


def bundled_topology(name: str) -> tuple[Network, LaneProfile]:
    """Load one of the topology files shipped with the package."""
    from importlib.resources import files

    resource = files("scnplan.data").joinpath(f"{name}.json")
    if not resource.is_file():
        raise TopologyError(f"no bundled topology named {name!r}")
    return load_topology(resource.read_text())
