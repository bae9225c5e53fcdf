"""Graph construction, validity classification, and spectral facts."""

import itertools

import numpy as np
import pytest

from formsim.topology import (
    EIG_ZERO_TOL,
    GraphMatrices,
    Topology,
    TopologyError,
    build_matrices,
    is_valid_for_estimation,
    min_eigenvalue_h,
)


def make(adj, links):
    adj = np.array(adj, dtype=float)
    links = np.array(links, dtype=float)
    return Topology(n=len(links), adjacency=adj, leader_links=links)


def all_topologies(n):
    """Every undirected simple graph on n followers x every leader-link set."""
    pairs = list(itertools.combinations(range(n), 2))
    for mask in range(2 ** len(pairs)):
        adj = np.zeros((n, n))
        for b, (i, j) in enumerate(pairs):
            if mask >> b & 1:
                adj[i, j] = adj[j, i] = 1.0
        for lmask in range(2 ** n):
            links = np.array([(lmask >> i) & 1 for i in range(n)], dtype=float)
            yield make(adj, links)


class TestBuildMatrices:
    def test_two_followers_one_edge(self):
        gm = build_matrices(make([[0, 1], [1, 0]], [1, 0]))
        assert np.array_equal(gm.laplacian, [[1, -1], [-1, 1]])
        assert np.array_equal(gm.h_matrix, [[2, -1], [-1, 1]])
        assert np.array_equal(gm.degrees, [2, 1])

    def test_single_follower(self):
        gm = build_matrices(make([[0]], [1]))
        assert np.array_equal(gm.laplacian, [[0]])
        assert np.array_equal(gm.h_matrix, [[1]])

    def test_ring_with_one_link_is_positive_definite(self):
        ring = [[0, 1, 0, 1], [1, 0, 1, 0], [0, 1, 0, 1], [1, 0, 1, 0]]
        gm = build_matrices(make(ring, [1, 0, 0, 0]))
        # Oracle: inverse power iteration converges to the smallest eigenpair.
        assert _min_eig_power_iteration(gm.h_matrix) > 0
        assert min_eigenvalue_h(gm) > 0

    def test_rejects_asymmetric(self):
        with pytest.raises(TopologyError, match="symmetric"):
            make([[0, 1], [0, 0]], [1, 0])

    def test_rejects_self_loops(self):
        with pytest.raises(TopologyError, match="diagonal"):
            make([[1, 1], [1, 0]], [1, 0])

    def test_rejects_non_binary(self):
        with pytest.raises(TopologyError, match="0 or 1"):
            make([[0, 2], [2, 0]], [1, 0])
        with pytest.raises(TopologyError, match="0 or 1"):
            make([[0, 1], [1, 0]], [1, 3])


class TestValidity:
    def test_connected_chain_with_link(self):
        chain = [[0, 1, 0, 0], [1, 0, 1, 0], [0, 1, 0, 1], [0, 0, 1, 0]]
        ok, reason = is_valid_for_estimation(make(chain, [1, 0, 0, 0]))
        assert ok and reason == "ok"

    def test_no_leader_link(self):
        chain = [[0, 1, 0, 0], [1, 0, 1, 0], [0, 1, 0, 1], [0, 0, 1, 0]]
        ok, reason = is_valid_for_estimation(make(chain, [0, 0, 0, 0]))
        assert not ok and "leader link" in reason

    def test_disconnected_pairs(self):
        pairs = [[0, 1, 0, 0], [1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]]
        ok, reason = is_valid_for_estimation(make(pairs, [1, 1, 0, 0]))
        assert not ok and "not connected" in reason


class TestMinEigenvalue:
    def test_scalar(self):
        gm = GraphMatrices(laplacian=[[0.0]], h_matrix=[[1.0]], degrees=[1.0])
        assert min_eigenvalue_h(gm) == pytest.approx(1.0, rel=1e-12)

    def test_two_by_two_closed_form(self):
        # Characteristic polynomial x^2 - 3x + 1 has roots (3 +/- sqrt 5)/2.
        gm = build_matrices(make([[0, 1], [1, 0]], [1, 0]))
        expected = (3.0 - np.sqrt(5.0)) / 2.0
        assert min_eigenvalue_h(gm) == pytest.approx(expected, rel=1e-12)

    def test_valid_four_follower_scenario_positive(self):
        from formsim.scenarios import default_topology

        gm = build_matrices(default_topology())
        lam = min_eigenvalue_h(gm)
        assert lam > 0
        assert lam == pytest.approx(_min_eig_power_iteration(gm.h_matrix), rel=1e-9)


def _min_eig_power_iteration(h, iters=2000):
    """Independent spectral oracle: power iteration on H^-1."""
    inv = np.linalg.inv(h)
    v = np.ones(h.shape[0]) / np.sqrt(h.shape[0])
    for _ in range(iters):
        v = inv @ v
        v /= np.linalg.norm(v)
    return float(v @ h @ v)


class TestInvariants:
    def test_laplacian_rows_sum_to_zero_everywhere(self):
        for n in (1, 2, 3, 4):
            for topo in all_topologies(n):
                gm = build_matrices(topo)
                assert np.array_equal(gm.laplacian @ np.ones(n), np.zeros(n))

    def test_degree_construction_identity(self):
        # diag(degrees) - adjacency must equal L + diag(links) bit for bit.
        for topo in all_topologies(4):
            gm = build_matrices(topo)
            alt = np.diag(gm.degrees) - topo.adjacency
            assert np.array_equal(alt, gm.h_matrix)

    def test_positive_definiteness_classification_exhaustive(self):
        # Valid topologies give a positive definite H; invalid ones are
        # either not positive definite or fail connectivity.
        for n in (1, 2, 3, 4):
            for topo in all_topologies(n):
                gm = build_matrices(topo)
                lam = min_eigenvalue_h(gm)
                ok, _ = is_valid_for_estimation(topo)
                if ok:
                    assert lam > EIG_ZERO_TOL
                else:
                    connected = is_valid_for_estimation(
                        Topology(topo.n, topo.adjacency, np.ones(topo.n))
                    )[0]
                    assert lam <= EIG_ZERO_TOL or not connected
