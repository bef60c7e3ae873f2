import itertools

import numpy as np
import pytest

from volta.errors import GraphError
from volta.graph import (
    Graph,
    bfs_distances,
    complete_graph,
    components,
    cycles_up_to,
    degree,
    find_cycle,
    is_bipartite,
    read_graph,
    write_graph,
)


def circle(n):
    return Graph(n, [(i, (i + 1) % n) for i in range(n)])


def cycle_edges(cyc):
    return frozenset(frozenset((cyc[i], cyc[(i + 1) % len(cyc)])) for i in range(len(cyc)))


def brute_force_cycles(g, max_len):
    """Every simple cycle as an edge set, by checking all vertex orderings of all subsets."""
    found = set()
    for k in range(3, max_len + 1):
        for subset in itertools.combinations(range(g.n), k):
            first = subset[0]
            for rest in itertools.permutations(subset[1:]):
                seq = (first, *rest)
                if all(g.has_edge(seq[i], seq[(i + 1) % k]) for i in range(k)):
                    found.add(cycle_edges(seq))
    return found


def test_degree_examples(k4):
    assert degree(circle(5), 0) == 2
    assert all(degree(k4, v) == 3 for v in range(4))
    assert degree(Graph(3), 1) == 0
    with pytest.raises(IndexError):
        degree(k4, 4)


def test_handshake():
    rng = np.random.default_rng(3)
    pairs = {tuple(sorted(rng.choice(40, 2, replace=False))) for _ in range(120)}
    g = Graph(40, sorted(pairs))
    assert g.degrees().sum() == 2 * g.edge_count


def test_canonical_edges_and_adjacency():
    g = Graph(4, [(3, 1), (0, 2), (2, 1)])
    assert g.edges.tolist() == [[0, 2], [1, 2], [1, 3]]
    assert g.neighbors(1).tolist() == [2, 3]
    assert g.has_edge(3, 1) and not g.has_edge(0, 3)
    for slot, e in enumerate(g.edge_ids):
        v = np.searchsorted(g.indptr, slot, side="right") - 1
        assert {int(v), int(g.indices[slot])} == set(g.edges[e].tolist())


@pytest.mark.parametrize("edges", [[(0, 0)], [(0, 1), (1, 0)], [(0, 5)]])
def test_invalid_edges(edges):
    with pytest.raises(GraphError):
        Graph(3, edges)


def test_components_examples():
    c = components(circle(6))
    assert c.count == 1 and list(c.component_sizes) == [6]
    two = Graph(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)])
    c = components(two)
    assert sorted(c.component_sizes) == [3, 3]
    assert c.component_id[0] != c.component_id[3]
    c = components(Graph(4))
    assert c.count == 4 and not c.is_connected


def test_k4_cycles_match_subset_enumeration(k4):
    cyc = cycles_up_to(k4, 4)
    assert [len(c) for c in cyc].count(3) == 4
    assert [len(c) for c in cyc].count(4) == 3
    assert {cycle_edges(c) for c in cyc} == brute_force_cycles(k4, 4)


def test_cycles_random_graphs_match_oracle():
    rng = np.random.default_rng(11)
    for _ in range(5):
        pairs = [(i, j) for i in range(7) for j in range(i + 1, 7) if rng.random() < 0.45]
        g = Graph(7, pairs)
        got = cycles_up_to(g, 6)
        assert len({cycle_edges(c) for c in got}) == len(got)
        assert {cycle_edges(c) for c in got} == brute_force_cycles(g, 6)


def test_cycle_examples():
    assert cycles_up_to(circle(1000), 7) == []
    assert cycles_up_to(Graph(3, [(0, 1), (1, 2), (0, 2)]), 3) == [[0, 1, 2]]
    with pytest.raises(ValueError):
        cycles_up_to(circle(5), 2)


def test_find_cycle():
    k8 = complete_graph(8)
    for length in (3, 5, 7, 8):
        cyc = find_cycle(k8, length)
        assert len(cyc) == length and len(set(cyc)) == length
        assert all(k8.has_edge(cyc[i], cyc[(i + 1) % length]) for i in range(length))
    assert find_cycle(circle(10), 3) is None
    assert find_cycle(circle(10), 10) is not None


def test_bfs_and_bipartite():
    d = bfs_distances(Graph(5, [(0, 1), (1, 2), (3, 4)]), [0])
    assert d.tolist() == [0, 1, 2, -1, -1]
    assert is_bipartite(circle(6))
    assert not is_bipartite(circle(7))


def test_induced():
    sub, labels = circle(6).induced([1, 2, 3, 5])
    assert labels.tolist() == [1, 2, 3, 5]
    assert sub.edge_set() == {(0, 1), (1, 2)}
    with pytest.raises(GraphError):
        circle(6).induced([])


def test_read_write_roundtrip(tmp_path):
    g = Graph(5, [(0, 4), (1, 2), (2, 3)])
    path = tmp_path / "g.txt"
    write_graph(g, path)
    assert path.read_text().splitlines()[0] == "5 3"
    assert read_graph(path) == g
