import random

import pytest

from rsd.graphs import Graph, GraphFormatError, decompose, parse_graph
from rsd.generators import random_connected_graph, random_tree, star


def test_parse_k2():
    g = parse_graph("2 1\n0 1\n")
    assert g.n == 2
    assert g.edges == ((0, 1),)


def test_parse_cycle4():
    g = parse_graph("4 4\n0 1\n0 2\n1 3\n2 3\n")
    assert g.n == 4
    assert len(g.edges) == 4
    assert all(g.degree(v) == 2 for v in range(4))


def test_parse_comments_and_whitespace():
    g = parse_graph("# a comment\n\n3 2\n0 1\n# mid comment\n1 2\n")
    assert g.n == 3


def test_parse_self_loop_reports_line():
    with pytest.raises(GraphFormatError) as err:
        parse_graph("3 3\n0 1\n1 1\n0 2\n")
    assert "self-loop" in str(err.value)
    assert "line 3" in str(err.value)


def test_parse_duplicate_edge_reports_line():
    with pytest.raises(GraphFormatError) as err:
        parse_graph("3 3\n0 1\n1 2\n1 0\n")
    assert "duplicate" in str(err.value)
    assert "line 4" in str(err.value)


def test_parse_out_of_range_id():
    with pytest.raises(GraphFormatError) as err:
        parse_graph("3 2\n0 1\n1 3\n")
    assert "out of range" in str(err.value)


def test_parse_disconnected():
    with pytest.raises(GraphFormatError) as err:
        parse_graph("4 2\n0 1\n2 3\n")
    assert "not connected" in str(err.value)


def test_parse_edge_count_mismatch():
    with pytest.raises(GraphFormatError):
        parse_graph("3 2\n0 1\n")


def test_parse_single_node():
    assert parse_graph("1 0\n").n == 1


def test_roundtrip_to_text():
    g = random_connected_graph(20, 5, 11)
    assert parse_graph(g.to_text()).edges == g.edges


def test_decompose_star():
    d = decompose(star(4))
    assert d.root == 0
    assert d.h == 1
    assert d.delta == 4
    assert d.levels[1] == (1, 2, 3, 4)


def test_decompose_path3():
    g = parse_graph("3 2\n0 1\n1 2\n")
    d = decompose(g)
    assert d.root == 1  # the unique degree-2 node
    assert d.h == 1
    assert d.delta == 2
    assert set(d.levels[1]) == {0, 2}


def test_decompose_diamond():
    g = Graph.from_edges(4, [(0, 1), (0, 2), (1, 3), (2, 3)])
    d = decompose(g)
    assert d.root == 0
    assert d.h == 2
    assert d.levels[1] == (1, 2)
    assert d.levels[2] == (3,)


def test_decompose_root_tie_break_smallest_id():
    # both endpoints of an edge in K4 have degree 3; node 0 wins
    g = Graph.from_edges(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)])
    assert decompose(g).root == 0


@pytest.mark.parametrize("seed", range(12))
def test_decomposition_invariants(seed):
    rng = random.Random(seed)
    n = rng.randrange(2, 60)
    g = random_connected_graph(n, 8, seed)
    d = decompose(g)
    # edge endpoints differ by at most one level
    for u, v in g.edges:
        assert abs(d.level[u] - d.level[v]) <= 1
    # every node below the root has an upward neighbor
    for l in range(d.h):
        for v in d.levels[l + 1]:
            assert any(d.level[w] == l for w in g.adj[v])
    # levels partition the nodes
    assert sum(len(vs) for vs in d.levels) == g.n
    assert d.levels[0] == (d.root,)
    assert all(d.levels[l] for l in range(d.h + 1))
    assert g.degree(d.root) == d.delta
    # determinism
    again = decompose(g)
    assert again == d


def test_tree_generator_is_tree_and_respects_cap():
    for seed in range(10):
        g = random_tree(40, 5, seed)
        assert len(g.edges) == 39
        assert g.max_degree() <= 5


def test_graph_generator_respects_cap():
    for seed in range(10):
        g = random_connected_graph(40, 6, seed)
        assert g.max_degree() <= 6
        assert len(g.edges) >= 39


def test_diameter_path():
    g = parse_graph("5 4\n0 1\n1 2\n2 3\n3 4\n")
    assert g.diameter() == 4
