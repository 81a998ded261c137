from __future__ import annotations

import pytest
from hypothesis import given, strategies as st

from heteronet import DNNGraph, InvalidArgumentError, build_graph, expected_edge_count
from heteronet.graph import plane_for_target


def test_three_nodes_is_complete():
    g = build_graph(3)
    assert sorted(g.edges) == sorted([(1, 2), (2, 3), (3, 1), (1, 3), (2, 1), (3, 2)])


def test_four_nodes_incoming_of_node_one():
    g = build_graph(4)
    assert len(g.edges) == 8
    assert sorted(g.incoming(1)) == [(3, 1), (4, 1)]
    assert all(g.plane_of_edge[e] == 1 for e in g.incoming(1))


def test_eight_nodes_share_plane_three():
    g = build_graph(8)
    for t in (3, 6):
        assert {g.plane_of_edge[e] for e in g.incoming(t)} == {3}


@pytest.mark.parametrize("n, count", [(3, 6), (4, 8), (12, 24)])
def test_expected_edge_count(n, count):
    assert expected_edge_count(n) == count
    assert len(build_graph(n).edges) == count


@pytest.mark.parametrize("n", [-1, 0, 1, 2])
def test_small_n_rejected(n):
    with pytest.raises(InvalidArgumentError):
        build_graph(n)
    with pytest.raises(InvalidArgumentError):
        expected_edge_count(n)


def test_plane_for_target_rejects_zero():
    with pytest.raises(InvalidArgumentError):
        plane_for_target(0)


@given(st.integers(min_value=3, max_value=60))
def test_degree_and_edge_invariants(n):
    g = build_graph(n)
    assert len(g.edges) == 2 * n
    assert len(set(g.edges)) == 2 * n
    for k in g.nodes:
        assert (k, k % n + 1) in g.edges
        assert (k, (k + 1) % n + 1) in g.edges
        assert len(g.incoming(k)) == 2
        assert len(g.outgoing(k)) == 2
    assert all(s != t for s, t in g.edges)


@given(st.integers(min_value=3, max_value=60))
def test_plane_is_that_of_the_target(n):
    g = build_graph(n)
    for (s, t), j in g.plane_of_edge.items():
        assert j == (t if t <= 2 else (t - 3) % 3 + 3)


@given(st.integers(min_value=6, max_value=60))
def test_residue_planes_collect_targets(n):
    g = build_graph(n)
    for j in (3, 4, 5):
        assert g.targets_in_plane(j) == list(range(j, n + 1, 3))


@pytest.mark.parametrize("n", [3, 4, 5])
def test_small_graphs_one_plane_per_node(n):
    g = build_graph(n)
    for j in range(1, n + 1):
        assert sorted(g.edges_in_plane(j)) == sorted(g.incoming(j))


@given(st.integers(min_value=3, max_value=60))
def test_strongly_connected(n):
    assert build_graph(n).is_strongly_connected()


def test_not_strongly_connected_detected():
    g = DNNGraph(n=3, edges=((1, 2), (2, 3)), plane_of_edge={(1, 2): 2, (2, 3): 3})
    assert not g.is_strongly_connected()


@pytest.mark.parametrize("n, cycles", [(3, [(1, 2), (1, 3), (2, 3)]), (4, [(1, 3), (2, 4)]), (5, []), (6, []), (9, [])])
def test_two_cycles(n, cycles):
    assert build_graph(n).two_cycles() == cycles


@given(st.integers(min_value=3, max_value=30))
def test_json_round_trip(n):
    g = build_graph(n)
    back = DNNGraph.from_json(g.to_json())
    assert back.n == g.n
    assert back.edges == g.edges
    assert dict(back.plane_of_edge) == dict(g.plane_of_edge)
