"""Unit tests for minimum-weight paths and the similarity matrix"""

import itertools

import networkx as nx
import numpy as np
import pytest

from thor2.core.exceptions import ValidationException
from thor2.services.similarity import build_similarity, min_weight_paths, similarity_from_paths
from tests.fixtures.builders import make_network


def brute_force_paths(n, edges):
    """Cheapest simple path by exhaustive enumeration"""
    graph = nx.Graph()
    graph.add_nodes_from(range(n))
    graph.add_weighted_edges_from(edges)
    best = np.full((n, n), np.inf)
    np.fill_diagonal(best, 0.0)
    for i, j in itertools.combinations(range(n), 2):
        for path in nx.all_simple_paths(graph, i, j):
            weight = sum(graph[u][v]["weight"] for u, v in zip(path, path[1:]))
            best[i, j] = best[j, i] = min(best[i, j], weight)
    return best


@pytest.mark.unit
class TestMinWeightPaths:
    def test_path_graph(self):
        """Test A-B (2) - C (3)"""
        paths = min_weight_paths(make_network(3, [(0, 1, 2.0), (1, 2, 3.0)]))

        assert paths[0, 2] == 5.0
        assert paths[2, 0] == 5.0
        assert np.all(np.diag(paths) == 0.0)

    def test_detour_wins(self):
        """Test triangle with weights 1, 1, 10"""
        paths = min_weight_paths(make_network(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 10.0)]))

        assert paths[0, 2] == 2.0

    def test_disconnected_is_infinite(self):
        """Test unreachable pairs"""
        paths = min_weight_paths(make_network(3, [(0, 1, 1.0)]))

        assert np.isinf(paths[0, 2])

    def test_matches_exhaustive_enumeration(self):
        """Test random small graphs against all simple paths"""
        rng = np.random.default_rng(11)

        for _ in range(100):
            n = int(rng.integers(2, 13))
            pairs = [p for p in itertools.combinations(range(n), 2) if rng.random() < 0.3]
            edges = [(u, v, float(rng.uniform(0, 20))) for u, v in pairs]

            paths = min_weight_paths(make_network(n, edges))

            np.testing.assert_allclose(paths, brute_force_paths(n, edges), rtol=1e-12, atol=0)

    def test_scale_covariance(self):
        """Test scaling all weights scales all path weights"""
        edges = [(0, 1, 1.5), (1, 2, 2.25), (0, 3, 0.5), (3, 2, 4.0)]
        scaled = [(u, v, 2.0 * w) for u, v, w in edges]

        assert np.array_equal(min_weight_paths(make_network(4, scaled)), 2.0 * min_weight_paths(make_network(4, edges)))


@pytest.mark.unit
class TestSimilarity:
    def test_values(self):
        """Test 0 -> 1, 1 -> 0.5, inf -> 0"""
        delta = similarity_from_paths(np.array([[0.0, 1.0], [1.0, np.inf]]))

        assert delta.delta.tolist() == [[1.0, 0.5], [0.5, 0.0]]

    def test_properties(self, toy_network):
        """Test symmetry, unit diagonal and range on a built network"""
        network, _ = toy_network

        delta = build_similarity(network)

        assert delta.n_c == network.n_c
        assert delta.network_hash == network.digest()
        assert np.array_equal(delta.delta, delta.delta.T)
        assert np.all(np.diag(delta.delta) == 1.0)
        assert np.all((delta.delta >= 0.0) & (delta.delta <= 1.0))

    def test_adding_edge_never_decreases(self):
        """Test monotonicity"""
        edges = [(0, 1, 3.0), (1, 2, 3.0), (2, 3, 3.0)]
        before = similarity_from_paths(min_weight_paths(make_network(4, edges))).delta

        after = similarity_from_paths(min_weight_paths(make_network(4, edges + [(0, 3, 1.0)]))).delta

        assert np.all(after >= before)

    def test_direct_edge_bound(self):
        """Test delta_ij >= 1 / (1 + w_ij)"""
        edges = [(0, 1, 5.0), (1, 2, 1.0), (0, 2, 1.0)]
        delta = similarity_from_paths(min_weight_paths(make_network(3, edges))).delta

        for u, v, w in edges:
            assert delta[u, v] >= 1.0 / (1.0 + w)

    def test_non_square_rejected(self):
        """Test shape validation"""
        with pytest.raises(ValidationException):
            similarity_from_paths(np.zeros((2, 3)))
