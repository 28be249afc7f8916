from __future__ import annotations

import itertools
import logging
from fractions import Fraction

import numpy as np
import pytest
from pydantic import ValidationError
from scipy import stats

from pairlab.exceptions import FormatError, InvalidParameter, SizeGuardExceeded
from pairlab.graphs import (
    EXPANSION_EXACT_MAX_N,
    DegreeStats,
    Graph,
    GraphKind,
    GraphModel,
    components,
    degree_stats,
    edge_expansion,
    format_graph,
    gen_graph,
    is_connected,
    min_cut,
    neighborhood_overlap,
    parse_graph,
    read_graph,
    triangle_count,
    write_graph,
)

from .conftest import (
    DEFAULT_TIMEOUT,
    brute_force_boundary,
    brute_force_components,
    complete,
    connected_er,
    rand_int,
    ring,
)

log = logging.getLogger(__name__)


@pytest.mark.timeout(DEFAULT_TIMEOUT)
def test_graph_normalizes_edges():
    graph = Graph(n=4, edges=[(3, 2), (1, 0), (2, 0)])

    assert graph.edges == ((0, 1), (0, 2), (2, 3))
    assert graph.adjacency == ((1, 2), (0,), (0, 3), (2,))
    assert graph.m == 3
    assert graph.degrees().tolist() == [2, 1, 2, 1]
    assert graph.has_edge(3, 2)
    assert not graph.has_edge(1, 2)


@pytest.mark.timeout(DEFAULT_TIMEOUT)
@pytest.mark.parametrize(
    "n, edges",
    [
        (0, []),
        (3, [(1, 1)]),
        (3, [(0, 3)]),
        (3, [(-1, 0)]),
        (3, [(0, 1), (1, 0)]),
    ],
)
def test_graph_invalid(n, edges):
    with pytest.raises(ValidationError):
        Graph(n=n, edges=edges)


@pytest.mark.timeout(DEFAULT_TIMEOUT)
def test_graph_adjacency_must_match_edges():
    with pytest.raises(ValidationError):
        Graph(n=3, edges=[(0, 1)], adjacency=[(1, 2), (0,), (0,)])


@pytest.mark.timeout(DEFAULT_TIMEOUT)
@pytest.mark.parametrize(
    "kind, params",
    [
        ("er", {}),
        ("er", {"q": 1.5}),
        ("geo", {"r": 0}),
        ("sw", {"k": 3, "q": 0.1}),
        ("sw", {"q": 0.1}),
        ("ring", {"q": 0.1}),
        ("torus", {}),
    ],
)
def test_graph_model_invalid(kind, params):
    with pytest.raises(ValidationError):
        GraphModel(kind=kind, **params)


@pytest.mark.timeout(DEFAULT_TIMEOUT)
def test_graph_model_label():
    assert str(GraphModel.erdos_renyi(0.1)) == "er(q=0.1)"
    assert str(GraphModel.small_world(4, 0.2)) == "sw(k=4;q=0.2)"
    assert str(GraphModel.ring()) == "ring"
    assert GraphModel.geometric(0.5).param_label == "r=0.5"
    assert GraphModel(kind="complete").kind == GraphKind.COMPLETE


@pytest.mark.timeout(DEFAULT_TIMEOUT)
@pytest.mark.parametrize(
    "model, n, expected_m",
    [
        (GraphModel.complete(), 10, 45),
        (GraphModel.ring(), 10, 10),
        (GraphModel.erdos_renyi(0), 10, 0),
        (GraphModel.erdos_renyi(1), 10, 45),
        (GraphModel.geometric(2.5), 10, 45),
        (GraphModel.small_world(4, 0), 10, 20),
        (GraphModel.small_world(4, 0.5), 30, 60),
    ],
)
def test_gen_graph_edge_counts(model, n, expected_m):
    graph = gen_graph(model, n, seed=rand_int())

    assert graph.n == n
    assert graph.m == expected_m


@pytest.mark.timeout(DEFAULT_TIMEOUT)
@pytest.mark.parametrize(
    "model",
    [GraphModel.erdos_renyi(0.3), GraphModel.geometric(0.8), GraphModel.small_world(4, 0.3)],
)
def test_gen_graph_is_deterministic(model):
    seed = rand_int()

    assert gen_graph(model, 40, seed) == gen_graph(model, 40, seed)


@pytest.mark.timeout(DEFAULT_TIMEOUT)
def test_gen_graph_seed_changes_sample():
    model = GraphModel.erdos_renyi(0.3)

    assert gen_graph(model, 40, 1).edges != gen_graph(model, 40, 2).edges


@pytest.mark.timeout(DEFAULT_TIMEOUT)
def test_gen_graph_invalid():
    with pytest.raises(InvalidParameter):
        gen_graph(GraphModel.ring(), 2, seed=0)

    with pytest.raises(InvalidParameter):
        gen_graph(GraphModel.small_world(6, 0.1), 6, seed=0)


@pytest.mark.timeout(DEFAULT_TIMEOUT)
def test_small_world_without_rewiring_is_lattice():
    graph = gen_graph(GraphModel.small_world(4, 0), 8, seed=0)

    assert degree_stats(graph) == DegreeStats(d_min=4, d_max=4, mean=4.0)
    assert graph.has_edge(0, 2)
    assert graph.has_edge(7, 1)
    assert not graph.has_edge(0, 3)


@pytest.mark.timeout(DEFAULT_TIMEOUT)
def test_erdos_renyi_edge_density():
    pairs = 100 * 99 // 2

    counts = [gen_graph(GraphModel.erdos_renyi(0.1), 100, seed).m for seed in range(200)]

    standard_error = (pairs * 0.1 * 0.9 / len(counts)) ** 0.5
    assert abs(np.mean(counts) - 495) < 3 * standard_error


@pytest.mark.timeout(DEFAULT_TIMEOUT)
def test_geometric_degree_histogram_is_stable_across_seeds():
    # a cap of chord radius r covers r**2 / 4 of the unit sphere
    expected = 499 * 0.5**2 / 4
    degrees = [
        [len(neighbors) for neighbors in gen_graph(GraphModel.geometric(0.5), 500, seed).adjacency] for seed in range(4)
    ]

    for sample in degrees:
        assert abs(np.mean(sample) - expected) < 1.5
        # two-sample KS distance, about 0.12 is the 0.1% critical value for independent samples
        assert stats.ks_2samp(degrees[0], sample).statistic < 0.15


@pytest.mark.timeout(DEFAULT_TIMEOUT)
@pytest.mark.parametrize(
    "graph, expected",
    [
        (ring(5), (2, 2, 2.0)),
        (complete(6), (5, 5, 5.0)),
        (Graph(n=3, edges=[(0, 1), (1, 2)]), (1, 2, 4 / 3)),
        (Graph(n=3, edges=[(0, 1)]), (0, 1, 2 / 3)),
    ],
)
def test_degree_stats(graph, expected):
    stats = degree_stats(graph)

    assert (stats.d_min, stats.d_max) == expected[:2]
    assert stats.mean == pytest.approx(expected[2])


@pytest.mark.timeout(DEFAULT_TIMEOUT)
@pytest.mark.parametrize("n", [3, 5, 10, 20])
def test_min_cut_of_ring_and_complete(n):
    assert min_cut(ring(n)).value == 2
    assert int(min_cut(complete(n))) == n - 1


@pytest.mark.timeout(DEFAULT_TIMEOUT)
def test_min_cut_partition_attains_value():
    graph = connected_er(12, 0.4, seed=rand_int())

    cut = min_cut(graph)
    left, right = cut.partition

    assert cut.connected
    assert sorted(left + right) == list(range(graph.n))
    assert brute_force_boundary(graph, set(left)) == cut.value
    assert cut.value <= degree_stats(graph).d_min


@pytest.mark.timeout(DEFAULT_TIMEOUT)
def test_min_cut_of_disconnected_graph():
    graph = Graph(n=4, edges=[(0, 1), (2, 3)])

    cut = min_cut(graph)

    assert cut.value == 0
    assert not cut.connected
    assert cut.partition == ((0, 1), (2, 3))


@pytest.mark.timeout(DEFAULT_TIMEOUT)
def test_connectivity():
    graph = Graph(n=5, edges=[(0, 1), (2, 3)])

    assert not is_connected(graph)
    assert components(graph) == 3 == brute_force_components(graph)
    assert is_connected(ring(5))


@pytest.mark.timeout(DEFAULT_TIMEOUT)
@pytest.mark.parametrize(
    "graph, expected",
    [
        (ring(6), Fraction(2, 3)),
        (complete(4), Fraction(2)),
        (Graph(n=3, edges=[(0, 1), (1, 2)]), Fraction(1)),
        (Graph(n=4, edges=[(0, 1), (2, 3)]), Fraction(0)),
    ],
)
def test_edge_expansion_exact(graph, expected):
    expansion = edge_expansion(graph)

    assert expansion.exact
    assert expansion.fraction == expected
    assert expansion.value == pytest.approx(float(expected))


@pytest.mark.timeout(DEFAULT_TIMEOUT)
def test_edge_expansion_matches_enumeration():
    graph = connected_er(9, 0.35, seed=rand_int())
    expected = min(
        Fraction(brute_force_boundary(graph, set(subset)), size)
        for size in range(1, graph.n // 2 + 1)
        for subset in itertools.combinations(range(graph.n), size)
    )

    assert edge_expansion(graph).fraction == expected


@pytest.mark.timeout(DEFAULT_TIMEOUT)
def test_edge_expansion_spectral_bound():
    graph = connected_er(12, 0.5, seed=rand_int())

    bound = edge_expansion(graph, exact=False)

    assert not bound.exact
    assert bound.fraction is None
    assert 0 < bound.value <= edge_expansion(graph, exact=True).value


@pytest.mark.timeout(DEFAULT_TIMEOUT)
def test_edge_expansion_guard():
    big = ring(EXPANSION_EXACT_MAX_N + 1)

    with pytest.raises(SizeGuardExceeded):
        edge_expansion(big, exact=True)

    assert not edge_expansion(big).exact

    with pytest.raises(InvalidParameter):
        edge_expansion(Graph(n=1))


@pytest.mark.timeout(DEFAULT_TIMEOUT)
def test_triangle_count_and_overlap():
    assert triangle_count(complete(5)) == 10
    assert triangle_count(ring(5)) == 0
    assert neighborhood_overlap(complete(5)) == pytest.approx(3 / 4)
    assert neighborhood_overlap(ring(5)) == 0


@pytest.mark.timeout(DEFAULT_TIMEOUT)
def test_triangle_count_matches_enumeration():
    graph = gen_graph(GraphModel.erdos_renyi(0.4), 20, seed=rand_int())

    expected = sum(
        graph.has_edge(i, j) and graph.has_edge(j, k) and graph.has_edge(i, k)
        for i, j, k in itertools.combinations(range(graph.n), 3)
    )

    assert triangle_count(graph) == expected


@pytest.mark.timeout(DEFAULT_TIMEOUT)
def test_graph_text_format(tmp_path):
    graph = gen_graph(GraphModel.erdos_renyi(0.4), 15, seed=rand_int())
    path = tmp_path / "graph.txt"

    write_graph(graph, path)

    assert path.read_text().splitlines()[0] == f"15 {graph.m}"
    assert read_graph(path) == graph
    assert format_graph(Graph(n=3, edges=[(1, 2)])) == "3 1\n1 2\n"


@pytest.mark.timeout(DEFAULT_TIMEOUT)
@pytest.mark.parametrize(
    "text",
    [
        "",
        "3\n",
        "3 2\n0 1\n",
        "3 1\n1 0\n",
        "3 2\n1 2\n0 1\n",
        "3 1\n0 x\n",
        "3 1\n0 3\n",
        "3 2\n0 1\n0 1\n",
    ],
)
def test_parse_graph_malformed(text):
    with pytest.raises(FormatError):
        parse_graph(text)
