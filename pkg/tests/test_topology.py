import itertools
import json

import networkx as nx
import pytest

from scnplan.errors import TopologyError
from scnplan.topology import (
    Link,
    Network,
    bundled_topology,
    k_shortest_paths,
    lane_profile,
    load_topology,
)

from .conftest import triangle_network


def _doc(links, lanes=4, mode="ninth"):
    nodes = sorted({n for a, b in [(l["src"], l["dst"]) for l in links] for n in (a, b)})
    return {"nodes": nodes, "links": links, "lanes_per_link": lanes, "lane_mode": mode}


class TestLoadTopology:
    def test_bundled_n6s9_shape(self):
        net, profile = bundled_topology("n6s9")
        assert len(net.nodes) == 6
        assert net.num_links == 18
        assert profile.lanes == 20

    def test_bundled_nsf_shape(self):
        net, _ = bundled_topology("nsf14")
        assert len(net.nodes) == 14
        assert net.num_links == 42

    def test_self_loop_rejected(self):
        doc = _doc([{"src": "a", "dst": "a", "length_km": 10}])
        with pytest.raises(TopologyError, match="self-loop"):
            load_topology(doc)

    def test_duplicate_link_rejected(self):
        doc = _doc([
            {"src": "a", "dst": "b", "length_km": 10},
            {"src": "a", "dst": "b", "length_km": 12},
        ])
        with pytest.raises(TopologyError, match="duplicate"):
            load_topology(doc)

    def test_non_positive_length_rejected(self):
        doc = _doc([{"src": "a", "dst": "b", "length_km": 0}])
        with pytest.raises(TopologyError, match="non-positive"):
            load_topology(doc)

    def test_zero_lanes_rejected(self):
        doc = _doc([{"src": "a", "dst": "b", "length_km": 5}], lanes=0)
        with pytest.raises(TopologyError):
            load_topology(doc)

    def test_parse_error(self):
        with pytest.raises(TopologyError, match="JSON"):
            load_topology("{not json")

    def test_json_text_roundtrip(self, tmp_path):
        doc = _doc([
            {"src": 1, "dst": 2, "length_km": 5},
            {"src": 2, "dst": 1, "length_km": 5},
        ])
        path = tmp_path / "t.json"
        path.write_text(json.dumps(doc))
        net, _ = load_topology(path)
        assert net.length_of(1, 2) == 5


class TestLaneProfile:
    def test_ninth_20_lanes(self):
        profile = lane_profile(20, "ninth")
        assert sorted(profile.lw) == [18, 19, 20]
        assert profile.lw_min == 18 and profile.lw_max == 20

    def test_ninth_40_lanes(self):
        profile = lane_profile(40, "ninth")
        assert sorted(profile.lw) == [36, 37, 38, 39, 40]

    def test_none_mode(self):
        profile = lane_profile(4, "none")
        assert profile.lw == frozenset()
        assert sorted(profile.lnw) == [1, 2, 3, 4]

    def test_full_mode(self):
        profile = lane_profile(3, "full")
        assert sorted(profile.lw) == [1, 2, 3]
        assert profile.lnw == frozenset()

    def test_partition_property(self):
        for lanes in range(1, 30):
            for mode in ("full", "ninth", "none"):
                profile = lane_profile(lanes, mode)
                assert profile.lw | profile.lnw == set(range(1, lanes + 1))
                assert not (profile.lw & profile.lnw)
                if profile.lw and profile.lnw:
                    assert max(profile.lnw) < min(profile.lw)

    def test_explicit_requires_top_block(self):
        profile = lane_profile(5, "explicit", lw=[4, 5])
        assert sorted(profile.lw) == [4, 5]
        with pytest.raises(TopologyError):
            lane_profile(5, "explicit", lw=[2, 5])
        with pytest.raises(TopologyError):
            lane_profile(5, "explicit", lw=[6])


class TestKShortestPaths:
    def test_walkthrough_first_path(self):
        net, _ = bundled_topology("walkthrough6")
        paths = k_shortest_paths(net, (1, 6), 2)
        assert [str(p) for p in paths] == ["1-3-4-6", "1-2-5-6"]

    def test_triangle_brute_force(self):
        net = triangle_network()
        paths = k_shortest_paths(net, ("a", "b"), 3)
        # independent oracle: enumerate every loopless path by hand
        g = net.to_digraph()
        expected = sorted(
            nx.all_simple_paths(g, "a", "b"),
            key=lambda nodes: (
                sum(g[x][y]["length_km"] for x, y in zip(nodes, nodes[1:])),
                tuple(map(str, nodes)),
            ),
        )
        assert [list(p.nodes) for p in paths] == expected[:3]
        assert [str(p) for p in paths] == ["a-b", "a-c-b"]

    def test_k1_is_shortest_path(self):
        net, _ = bundled_topology("n6s9")
        for src, dst in itertools.permutations(net.nodes, 2):
            paths = k_shortest_paths(net, (src, dst), 1)
            assert len(paths) == 1
            expected = nx.shortest_path_length(net.to_digraph(), src, dst, weight="length_km")
            assert paths[0].length_km == pytest.approx(expected)

    def test_sorted_loopless_ranked(self):
        net, _ = bundled_topology("nsf14")
        paths = k_shortest_paths(net, (1, 14), 5)
        lengths = [p.length_km for p in paths]
        assert lengths == sorted(lengths)
        for rank, p in enumerate(paths, start=1):
            assert p.rank == rank
            assert len(set(p.nodes)) == len(p.nodes)
            assert p.length_km == pytest.approx(
                sum(net.links[e].length_km for e in p.link_ids)
            )

    def test_unreachable_returns_empty(self):
        net = Network(
            nodes=("a", "b", "c"),
            links=(Link("a", "b", 1.0),),
            lanes_per_link=1,
        )
        assert k_shortest_paths(net, ("b", "c"), 2) == []

    def test_deterministic(self):
        net, _ = bundled_topology("n6s9")
        first = [tuple(p.nodes) for p in k_shortest_paths(net, (1, 6), 4)]
        for _ in range(3):
            assert [tuple(p.nodes) for p in k_shortest_paths(net, (1, 6), 4)] == first
