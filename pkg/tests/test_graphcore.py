import io

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tfg.graphcore import (
    Graph,
    PlantedGraph,
    components,
    cut_value,
    defect_components,
    is_bipartite,
    is_triangle_free,
    max_cut_exact,
    read_edgelist,
    write_edgelist,
)


def cycle(k, offset=0):
    return [(offset + i, offset + (i + 1) % k) for i in range(k)]


@st.composite
def small_graphs(draw, max_n=12):
    n = draw(st.integers(min_value=1, max_value=max_n))
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    keep = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    return n, [e for e, k in zip(pairs, keep) if k]


def test_triangle_free_examples():
    assert is_triangle_free((0, []))
    assert is_triangle_free((4, cycle(4)))
    assert not is_triangle_free((3, cycle(3)))


@given(small_graphs())
def test_triangle_free_matches_networkx(g):
    n, edges = g
    G = nx.Graph()
    G.add_nodes_from(range(n))
    G.add_edges_from(edges)
    assert is_triangle_free((n, edges)) == (sum(nx.triangles(G).values()) == 0)


def test_bipartite_examples():
    assert is_bipartite(cycle(6))[0]
    ok, cyc = is_bipartite(cycle(5))
    assert not ok and sorted(cyc) == list(range(5))
    assert is_bipartite([(0, 1), (1, 2), (1, 3), (3, 4)])[0]
    assert is_bipartite([], vertices=[0, 1, 2])[0]


@given(small_graphs())
def test_bipartite_witnesses(g):
    n, edges = g
    es = {frozenset(e) for e in edges}
    ok, w = is_bipartite(edges, range(n))
    G = nx.Graph()
    G.add_nodes_from(range(n))
    G.add_edges_from(edges)
    assert ok == nx.is_bipartite(G)
    if ok:
        assert all(w[u] != w[v] for u, v in edges)
    else:
        assert len(w) % 2 == 1 and len(set(w)) == len(w)
        assert all(frozenset((w[i], w[(i + 1) % len(w)])) in es for i in range(len(w)))


@given(small_graphs())
def test_components_match_networkx(g):
    n, edges = g
    G = nx.Graph()
    G.add_nodes_from(range(n))
    G.add_edges_from(edges)
    ours = sorted(map(tuple, components(range(n), edges)))
    theirs = sorted(tuple(sorted(c)) for c in nx.connected_components(G))
    assert ours == theirs


def test_defect_components():
    g = PlantedGraph.build(8, range(6), S=[], T=[])
    comps, hist = defect_components(g, "A")
    assert hist == {1: 6}
    g = PlantedGraph.build(8, range(6), S=[(0, 1), (2, 3), (4, 5)])
    assert defect_components(g, "A")[1] == {2: 3}
    g = PlantedGraph.build(8, range(6), S=[(0, 1), (1, 2), (2, 3)])
    comps, hist = defect_components(g, "A")
    assert hist == {1: 2, 4: 1} and [0, 1, 2, 3] in comps
    with pytest.raises(ValueError):
        defect_components(g, "C")


def test_build_validates_parts():
    with pytest.raises(ValueError):
        PlantedGraph.build(4, [0, 1], S=[(0, 2)])
    with pytest.raises(ValueError):
        PlantedGraph.build(4, [0, 1], E_cr=[(0, 1)])
    with pytest.raises(ValueError):
        PlantedGraph.build(4, [0, 1], T=[(2, 3)], E_cr=[(1, 0)], S=[(0, 0)])


def test_max_cut_examples():
    assert max_cut_exact((2, [(0, 1)]))["value"] == 1
    r = max_cut_exact((4, cycle(4)))
    assert r["value"] == 4 and set(r["part"]) in ({0, 2}, {1, 3}) and r["unique"]
    r = max_cut_exact((5, cycle(5)))
    assert r["value"] == 4 and not r["unique"]


def test_max_cut_cap():
    with pytest.raises(ValueError):
        max_cut_exact((29, []))


@settings(max_examples=40)
@given(small_graphs(max_n=10))
def test_max_cut_brute_force(g):
    n, edges = g
    best = max(cut_value(edges, [(m >> v) & 1 for v in range(n)]) for m in range(1 << n))
    r = max_cut_exact((n, edges))
    mask = np.zeros(n, dtype=bool)
    mask[list(r["part"])] = True
    assert r["value"] == best == cut_value(edges, ~mask)


def test_planted_cut_is_crossing_count():
    g = PlantedGraph.build(6, [0, 1, 2], S=[(0, 1)], T=[(4, 5)], E_cr=[(0, 3), (2, 4), (1, 5)])
    assert cut_value(g.edges, g.in_A) == len(g.E_cr)
    assert max_cut_exact(g)["value"] >= len(g.E_cr)


def test_edgelist_round_trip():
    g = PlantedGraph.build(7, [0, 2, 4], S=[(0, 2)], T=[(1, 3), (5, 6)], E_cr=[(0, 1), (4, 5)])
    text = write_edgelist(g)
    assert text.splitlines()[:2] == ["n 7 A 3", "P 0 2 4"]
    h = read_edgelist(io.StringIO(text))
    assert h == g
    assert write_edgelist(h) == text


def test_edgelist_bad_header():
    with pytest.raises(ValueError):
        read_edgelist("x 3 A 1\nP 0\n")


def test_graph_from_edges():
    g = Graph.from_edges(3, [(1, 0), (2, 1)])
    assert g.edges == ((0, 1), (1, 2))
    assert g.adj[1] == {0, 2}
