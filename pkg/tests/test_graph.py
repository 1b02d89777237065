import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from popproto.graph import (
    GraphError,
    build_graph,
    gen_family,
    read_edge_list,
    stats,
    write_edge_list,
)


def _nx(g):
    h = nx.Graph()
    h.add_nodes_from(range(g.n))
    h.add_edges_from(g.edges)
    return h


def test_symmetric_closure():
    g = build_graph([(0, 1)], n=2)
    assert set(g.edges) == {(0, 1), (1, 0)}
    assert g.m == 2


def test_duplicates_collapse():
    g = build_graph([(0, 1), (1, 0), (0, 1), (1, 2)])
    assert g.m == 4
    assert g.adjacency == ((1,), (0, 2), (1,))


@pytest.mark.parametrize("pairs, n, msg", [
    ([(0, 1), (2, 3)], 4, "disconnected"),
    ([(0, 0)], None, "self-loop"),
    ([(0, 1)], 1, "at least 2"),
    ([(0, 5)], 3, "outside"),
])
def test_build_rejects(pairs, n, msg):
    with pytest.raises(GraphError, match=msg):
        build_graph(pairs, n=n)


def test_families():
    assert gen_family("complete", 4).m == 12
    ring = gen_family("ring", 5)
    assert all(ring.degree(u) == 2 for u in range(5))
    assert stats(ring).diameter == 2
    star = gen_family("star", 4)
    assert star.degree(0) == 3
    assert stats(star).diameter == 2


@pytest.mark.parametrize("kind, n, expected", [
    ("ring", 8, (16, 2, 4)),
    ("complete", 4, (12, 3, 1)),
    ("star", 5, (8, 4, 2)),
])
def test_stats_examples(kind, n, expected):
    s = stats(gen_family(kind, n))
    assert (s.m, s.delta, s.diameter) == expected


@pytest.mark.parametrize("k", range(3, 33))
def test_ring_diameter(k):
    assert stats(gen_family("ring", k)).diameter == k // 2


def test_invalid_family_arguments():
    with pytest.raises(GraphError):
        gen_family("ring", 1)
    with pytest.raises(GraphError):
        gen_family("gnp", 5, p=0.0)
    with pytest.raises(GraphError):
        gen_family("gnp", 5, p=None)
    with pytest.raises(GraphError):
        gen_family("torus", 5)


@settings(max_examples=60, deadline=None)
@given(n=st.integers(2, 14), p=st.floats(0.05, 1.0), seed=st.integers(0, 10_000))
def test_gnp_matches_networkx(n, p, seed):
    g = gen_family("gnp", n, p=p, seed=seed)
    h = _nx(g)
    assert nx.is_connected(h)
    assert all((v, u) in set(g.edges) for u, v in g.edges)
    assert all(u != v for u, v in g.edges)
    assert len(set(g.edges)) == g.m
    s = stats(g)
    assert s.delta == max(d for _, d in h.degree())
    assert s.delta <= n - 1
    assert s.diameter == nx.diameter(h)
    assert 1 <= s.diameter <= n - 1
    assert gen_family("gnp", n, p=p, seed=seed) == g


def test_edge_list_roundtrip(tmp_path):
    g = gen_family("gnp", 9, p=0.4, seed=3)
    path = tmp_path / "g.txt"
    write_edge_list(g, path)
    assert read_edge_list(path) == g


def test_edge_list_comments_and_errors(tmp_path):
    path = tmp_path / "g.txt"
    path.write_text("# triangle\n0 1\n\n1 2  # spoke\n2 0\n")
    g = read_edge_list(path)
    assert g.n == 3 and g.m == 6
    path.write_text("0 1 2\n")
    with pytest.raises(GraphError, match="expected"):
        read_edge_list(path)
