from collections import deque

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gwbounds.bounds import BoundConfig, stlb, tlb
from gwbounds.exceptions import DomainError, ValidationError
from gwbounds.graphs import (
    Graph,
    GraphModel,
    generate,
    make_graph_pair,
    make_pair,
    shortest_path_metric,
    structured_space,
    wl_refinement,
)


def bfs_oracle(g):
    """Hop counts by plain queue-based BFS from every node."""
    adj = g.neighbors()
    D = np.full((g.n, g.n), np.inf)
    for s in range(g.n):
        D[s, s] = 0
        q = deque([s])
        while q:
            u = q.popleft()
            for v in adj[u]:
                if D[s, v] == np.inf:
                    D[s, v] = D[s, u] + 1
                    q.append(v)
    return D


def path(n):
    return Graph(n, frozenset((i, i + 1) for i in range(n - 1)))


def cycle(n):
    return Graph(n, frozenset((i, (i + 1) % n) for i in range(n)))


def complete(n):
    return Graph(n, frozenset((i, j) for i in range(n) for j in range(i + 1, n)))


# --- generators ---------------------------------------------------------------


def test_ws_without_rewiring_is_ring_lattice():
    g = generate(GraphModel("ws", k=4, p_e=0.0), 20, seed=0)
    assert np.all(g.degrees() == 4)
    assert len(g.edges) == 40


def test_rr_degree_and_edge_count():
    g = generate(GraphModel("rr", R=3), 10, seed=1)
    assert np.all(g.degrees() == 3) and len(g.edges) == 15
    assert g.is_connected()


def test_ba_edge_count():
    g = generate(GraphModel("ba", m=5), 10, seed=2)
    assert len(g.edges) == 5 * (10 - 5)
    assert g.is_connected()


@pytest.mark.parametrize("model", [GraphModel("ws"), GraphModel("ba", m=3), GraphModel("rr")])
def test_generation_is_deterministic(model):
    a, b = generate(model, 30, seed=7), generate(model, 30, seed=7)
    assert a.edges == b.edges
    assert generate(model, 30, seed=8).edges != a.edges


@settings(max_examples=25, deadline=None)
@given(st.integers(6, 40), st.integers(0, 2**31), st.floats(0.0, 1.0))
def test_ws_keeps_edge_count_and_connectivity(n, seed, p_e):
    g = generate(GraphModel("ws", k=4, p_e=p_e), n, seed)
    assert len(g.edges) == 2 * n
    assert g.is_connected()


def test_features_drawn_by_kind():
    g = generate(GraphModel("ba", m=2, feature_kind="normal1d"), 12, seed=0)
    assert g.node_features.shape == (12, 1)
    g = generate(GraphModel("rr", feature_kind="bernoulli", p_b=0.5), 12, seed=0)
    assert set(np.unique(g.node_features)) <= {0.0, 1.0}


def test_model_domain_errors():
    with pytest.raises(DomainError):
        GraphModel("er")
    with pytest.raises(DomainError):
        generate(GraphModel("ws", k=3), 10, 0)
    with pytest.raises(DomainError):
        generate(GraphModel("rr", R=3), 7, 0)
    with pytest.raises(DomainError):
        generate(GraphModel("ba", m=10), 10, 0)


# --- hop-count metric ---------------------------------------------------------


def test_path_metric():
    D = shortest_path_metric(path(4)).distances
    np.testing.assert_array_equal(D, np.abs(np.arange(4)[:, None] - np.arange(4)[None, :]))


def test_complete_graph_metric():
    D = shortest_path_metric(complete(4)).distances
    np.testing.assert_array_equal(D, 1 - np.eye(4))


def test_cycle_diameter():
    assert shortest_path_metric(cycle(5)).distances.max() == 2


@pytest.mark.parametrize("model", [GraphModel("ws", p_e=0.3), GraphModel("ba", m=2),
                                   GraphModel("rr")])
def test_metric_matches_bfs_oracle(model):
    for seed in range(5):
        g = generate(model, 24, seed)
        np.testing.assert_array_equal(shortest_path_metric(g).distances, bfs_oracle(g))


def test_disconnected_graph():
    g = Graph(5, frozenset({(0, 1), (1, 2), (3, 4)}))
    with pytest.raises(ValidationError):
        shortest_path_metric(g)
    assert shortest_path_metric(g, largest_component=True).n == 3
    g = Graph(5, g.edges, np.arange(5.0))
    np.testing.assert_array_equal(structured_space(g, True).features[:, 0], [0, 1, 2])


def test_graph_validation():
    with pytest.raises(ValidationError):
        Graph(3, frozenset({(0, 0)}))
    with pytest.raises(ValidationError):
        Graph(3, frozenset({(0, 3)}))
    with pytest.raises(ValidationError):
        Graph(3, frozenset({(0, 1), (1, 0)}))
    with pytest.raises(ValidationError):
        Graph(3, frozenset(), np.zeros((2, 1)))


def test_json_roundtrip():
    g = generate(GraphModel("ba", m=2, feature_kind="normal1d"), 9, seed=4)
    back = Graph.from_json(g.to_json())
    assert back.n == g.n and back.edges == g.edges
    np.testing.assert_array_equal(back.node_features, g.node_features)


# --- isomorphic pairs ---------------------------------------------------------


@pytest.mark.parametrize("kind", ["ws", "ba", "rr"])
def test_isomorphic_pairs_have_zero_bounds(kind):
    model = GraphModel(kind, m=3, feature_kind="normal1d")
    for seed in range(3):
        X, Y, label = make_pair(model, 20, seed, isomorphic=True)
        assert label
        assert tlb(X, Y).value == 0.0
        assert stlb(X, Y, BoundConfig(r=5, num_projections=20)).value == 0.0


def test_relabeled_copy_matches_permuted_metric():
    g1, g2, _ = make_graph_pair(GraphModel("ws"), 15, 0, isomorphic=True)
    assert g1.edges != g2.edges
    D1, D2 = bfs_oracle(g1), bfs_oracle(g2)
    assert sorted(map(tuple, np.sort(D1, axis=1))) == sorted(map(tuple, np.sort(D2, axis=1)))


# --- Weisfeiler-Lehman --------------------------------------------------------


def test_wl_relabeled_is_possibly_isomorphic():
    g = generate(GraphModel("ba", m=2), 20, 3)
    perm = np.random.default_rng(0).permutation(20)
    assert wl_refinement(g, g.relabeled(perm)) == "possibly-isomorphic"


def test_wl_path_vs_triangle():
    # same size, different degree histograms
    p3 = Graph(3, frozenset({(0, 1), (1, 2)}))
    assert wl_refinement(p3, complete(3)) == "not-isomorphic"


def test_wl_cannot_split_regular_graphs():
    # C6 and two disjoint triangles are both 2-regular; 1-WL sees no difference
    two_triangles = Graph(6, frozenset({(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)}))
    assert wl_refinement(cycle(6), two_triangles) == "possibly-isomorphic"


def test_wl_detects_after_refinement():
    # a path 0-1-2-3-4 with a pendant node 5 hung on node 1 or on node 2:
    # equal degree sequences, so only the first refinement round separates them
    spine = {(0, 1), (1, 2), (2, 3), (3, 4)}
    a = Graph(6, frozenset(spine | {(1, 5)}))
    b = Graph(6, frozenset(spine | {(2, 5)}))
    assert sorted(a.degrees()) == sorted(b.degrees())
    assert wl_refinement(a, b, iterations=0) == "possibly-isomorphic"
    assert wl_refinement(a, b, iterations=1) == "not-isomorphic"


def test_wl_feature_labels():
    g = Graph(3, frozenset({(0, 1), (1, 2)}), np.array([0.0, 1.0, 2.0]))
    h = g.relabeled([2, 1, 0])
    assert wl_refinement(g, h, labels="feature-binned") == "possibly-isomorphic"
    h2 = Graph(3, g.edges, np.array([1.0, 0.0, 2.0]))
    assert wl_refinement(g, h2, labels="feature-binned") == "not-isomorphic"
    with pytest.raises(ValidationError):
        wl_refinement(path(3), path(3), labels="feature-binned")
