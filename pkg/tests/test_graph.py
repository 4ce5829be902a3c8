import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from secalloc.graph import (
    DisconnectedGraphError,
    Graph,
    UnconnectableParametersError,
    all_pairs_hop_distance,
    complete_graph,
    cycle_graph,
    generate_erdos_renyi,
    is_connected,
    laplacian,
    load_graph,
    path_graph,
    save_graph,
    star_graph,
)


def test_p_one_gives_complete_graph():
    g = generate_erdos_renyi(4, 1.0, 123)
    assert g.num_edges == 6
    assert g == complete_graph(4)
    assert g.rejections == 0


def test_p_zero_is_unconnectable():
    with pytest.raises(UnconnectableParametersError):
        generate_erdos_renyi(4, 0.0, 5, max_rejections=20)


def test_single_vertex_is_connected_for_any_p():
    assert generate_erdos_renyi(1, 0.0, 0).n == 1


def test_same_seed_same_graph():
    a = generate_erdos_renyi(10, 0.5, 42)
    b = generate_erdos_renyi(10, 0.5, 42)
    assert np.array_equal(a.adjacency, b.adjacency)
    assert a.rejections == b.rejections


def test_rejections_reseed_with_successor_seeds():
    g = generate_erdos_renyi(12, 0.15, 7)
    assert is_connected(g)
    assert g.seed == 7 + g.rejections


def test_invalid_probability():
    with pytest.raises(ValueError):
        generate_erdos_renyi(5, 1.5, 0)


def test_laplacian_rows_sum_to_zero_and_psd():
    g = generate_erdos_renyi(9, 0.4, 3)
    lap = laplacian(g)
    assert np.allclose(lap.sum(axis=1), 0)
    w = np.linalg.eigvalsh(lap)
    assert w[0] > -1e-12
    assert w[1] > 1e-9  # connected: zero eigenvalue is simple


def test_weighted_laplacian():
    g = Graph(3, ((1, 2, 2.0), (2, 3, 0.5)))
    assert np.allclose(laplacian(g), [[2, -2, 0], [-2, 2.5, -0.5], [0, -0.5, 0.5]])


@pytest.mark.parametrize(
    "edges, msg",
    [
        (((1, 1, 1.0),), "self-loop"),
        (((1, 4, 1.0),), "out of range"),
        (((1, 2, 0.0),), "non-positive"),
        (((1, 2, 1.0), (2, 1, 1.0)), "duplicate"),
    ],
)
def test_bad_edges_rejected(edges, msg):
    with pytest.raises(ValueError, match=msg):
        Graph(3, edges)


def test_json_rejects_reversed_edges():
    with pytest.raises(ValueError, match="i < j"):
        Graph.from_dict({"n": 3, "edges": [[2, 1, 1.0]]})
    with pytest.raises(ValueError):
        Graph.from_dict({"n": 3})


def test_json_roundtrip(tmp_path):
    g = Graph(4, ((1, 2, 1.5), (2, 4, 3.0), (3, 4, 1.0)))
    path = tmp_path / "g.json"
    save_graph(g, path)
    assert json.loads(path.read_text())["n"] == 4
    assert load_graph(path) == g


def test_hop_distances_ignore_weights():
    g = Graph(3, ((1, 2, 10.0), (2, 3, 0.1)))
    assert all_pairs_hop_distance(g).tolist() == [[0, 1, 2], [1, 0, 1], [2, 1, 0]]


def test_disconnected_distance_raises():
    with pytest.raises(DisconnectedGraphError):
        all_pairs_hop_distance(Graph(3, ((1, 2, 1.0),)))


def test_named_graphs():
    assert path_graph(4).num_edges == 3
    assert cycle_graph(5).num_edges == 5
    assert star_graph(5).neighbors(1) == [2, 3, 4, 5]
    assert star_graph(4, center=3).neighbors(3) == [1, 2, 4]


@st.composite
def adjacency(draw, max_n=8):
    n = draw(st.integers(1, max_n))
    bits = draw(st.lists(st.booleans(), min_size=n * (n - 1) // 2, max_size=n * (n - 1) // 2))
    a = np.zeros((n, n))
    a[np.triu_indices(n, 1)] = bits
    return a + a.T


@settings(max_examples=60, deadline=None)
@given(adjacency())
def test_adjacency_roundtrip_and_symmetry(a):
    g = Graph.from_adjacency(a)
    assert np.array_equal(g.adjacency, a)
    assert np.array_equal(g.adjacency, g.adjacency.T)
    assert Graph.from_dict(json.loads(json.dumps(g.to_dict()))) == g


@settings(max_examples=40, deadline=None)
@given(adjacency(), st.randoms(use_true_random=False))
def test_relabel_preserves_distances(a, rnd):
    g = Graph.from_adjacency(a)
    if not is_connected(g):
        return
    perm = list(range(1, g.n + 1))
    rnd.shuffle(perm)
    h = g.relabel(perm)
    d, e = all_pairs_hop_distance(g), all_pairs_hop_distance(h)
    p0 = np.array(perm) - 1
    assert np.array_equal(e[np.ix_(p0, p0)], d)
