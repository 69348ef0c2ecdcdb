import random

import pytest

from scnplan.instance import Instance, Request
from scnplan.physical import (
    GridParams,
    ModulationEntry,
    ModulationTable,
    Physics,
    simplified_physics,
)
from scnplan.topology import Link, Network, bundled_topology, lane_profile


@pytest.fixture(scope="session")
def walkthrough_instance():
    """Six-node walkthrough: 4 lanes, lane 4 switching, 8 Tbps lanes, k=2."""
    network, profile = bundled_topology("walkthrough6")
    requests = (
        Request(1, 1, 6, 10000),
        Request(2, 1, 6, 6000),
        Request(3, 1, 6, 10000),
        Request(4, 2, 6, 8000),
        Request(5, 2, 4, 8000),
        Request(6, 2, 4, 6000),
        Request(7, 3, 6, 8000),
    )
    return Instance(network, profile, requests, simplified_physics(), k=2)


def triangle_network(lanes=2, length=100.0):
    nodes = ("a", "b", "c")
    links = []
    for u in nodes:
        for v in nodes:
            if u != v:
                links.append(Link(u, v, length))
    return Network(nodes=nodes, links=tuple(links), lanes_per_link=lanes, name="triangle")


def tiny_physics():
    """Scaled-down grid so exhaustive searches stay small: 12 slices,
    3 per carrier, up to 4 carriers per lane."""
    table = ModulationTable((
        ModulationEntry("mod-200", 200, 300.0),
        ModulationEntry("mod-400", 400, 150.0),
    ))
    return Physics(table, GridParams(fs_max=12, fs_per_oc=3))


def random_tiny_instance(seed: int, lane_mode: str):
    """Small random connected instance for oracle/heuristic comparisons.

    Kept well inside the oracle limits: up to 5 nodes, up to 4 lanes,
    up to 4 requests, and demands sized so a feasible assignment exists
    with a little headroom.
    """
    rng = random.Random(seed)
    n_nodes = rng.randint(3, 5)
    nodes = tuple(f"n{i}" for i in range(n_nodes))
    pairs = set()
    for i in range(1, n_nodes):  # random spanning tree keeps it connected
        j = rng.randrange(i)
        pairs.add((min(i, j), max(i, j)))
    extra = rng.randint(1, n_nodes)
    for _ in range(extra):
        i, j = rng.sample(range(n_nodes), 2)
        pairs.add((min(i, j), max(i, j)))
    links = []
    for i, j in sorted(pairs):
        length = rng.choice([100.0, 120.0, 200.0, 280.0])
        links.append(Link(nodes[i], nodes[j], length))
        links.append(Link(nodes[j], nodes[i], length))
    lanes = rng.randint(2, 4)
    network = Network(nodes=nodes, links=tuple(links), lanes_per_link=lanes)
    profile = lane_profile(lanes, lane_mode)
    physics = tiny_physics()
    n_requests = rng.randint(1, 4)
    requests = []
    for rid in range(1, n_requests + 1):
        src, dst = rng.sample(nodes, 2)
        volume = rng.choice([200, 400, 600, 800, 1200, 1600])
        requests.append(Request(rid, src, dst, volume))
    return Instance(network, profile, tuple(requests), physics, k=2)
