"""Communication graph among followers and the leader.

The follower network is an undirected graph given by a binary adjacency
matrix; leader links mark which followers receive the leader's state
directly.  The derived Laplacian L and the leader-augmented matrix
H = L + diag(leader_links) drive the distributed estimator: H is positive
definite exactly when the follower graph is connected and at least one
follower hears the leader, which is the property the consensus analysis
depends on.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np


class TopologyError(ValueError):
    """Raised when an adjacency matrix or leader-link vector is malformed."""


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Topology:
    """Follower adjacency plus leader links.

    Attributes:
        n: number of followers.
        adjacency: (n, n) symmetric 0/1 matrix, zero diagonal.
        leader_links: (n,) 0/1 vector; entry i is 1 when follower i
            receives the leader's state directly.
    """

    n: int
    adjacency: np.ndarray
    leader_links: np.ndarray

    def __post_init__(self) -> None:
        adj = np.asarray(self.adjacency, dtype=float)
        links = np.asarray(self.leader_links, dtype=float)
        if adj.shape != (self.n, self.n):
            raise TopologyError(f"adjacency must be {self.n}x{self.n}, got {adj.shape}")
        if links.shape != (self.n,):
            raise TopologyError(f"leader_links must have length {self.n}, got {links.shape}")
        if not np.all(np.isin(adj, (0.0, 1.0))):
            raise TopologyError("adjacency entries must be 0 or 1")
        if not np.all(np.isin(links, (0.0, 1.0))):
            raise TopologyError("leader_links entries must be 0 or 1")
        if np.any(np.diag(adj) != 0.0):
            raise TopologyError("adjacency diagonal must be zero (no self links)")
        if not np.array_equal(adj, adj.T):
            raise TopologyError("adjacency must be symmetric (undirected follower graph)")
        object.__setattr__(self, "adjacency", _readonly(adj))
        object.__setattr__(self, "leader_links", _readonly(links))


@dataclass(frozen=True)
class GraphMatrices:
    """Laplacian, leader-augmented matrix, and per-follower degrees."""

    laplacian: np.ndarray
    h_matrix: np.ndarray
    degrees: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "laplacian", _readonly(np.array(self.laplacian, dtype=float)))
        object.__setattr__(self, "h_matrix", _readonly(np.array(self.h_matrix, dtype=float)))
        object.__setattr__(self, "degrees", _readonly(np.array(self.degrees, dtype=float)))


def build_matrices(topo: Topology) -> GraphMatrices:
    """Build L (off-diagonal -a_ij, diagonal row degree), H = L + diag(links),
    and degrees (neighbor count plus leader link)."""
    adj = topo.adjacency
    lap = np.diag(adj.sum(axis=1)) - adj
    h = lap + np.diag(topo.leader_links)
    degrees = adj.sum(axis=1) + topo.leader_links
    return GraphMatrices(laplacian=lap, h_matrix=h, degrees=degrees)


def is_valid_for_estimation(topo: Topology) -> tuple[bool, str]:
    """Check the two conditions the estimator needs: a connected follower
    graph and at least one leader link.

    Returns (ok, diagnostic); the diagnostic names the failing condition.
    """
    if not np.any(topo.leader_links > 0):
        return False, "no follower has a leader link (leader_links all zero)"
    if not _is_connected(topo.adjacency):
        return False, "follower graph is not connected"
    return True, "ok"


def min_eigenvalue_h(gm: GraphMatrices) -> float:
    """Smallest eigenvalue of H (symmetric, so eigvalsh applies)."""
    return float(np.linalg.eigvalsh(gm.h_matrix)[0])


# |eig| below this counts as zero when classifying definiteness.
EIG_ZERO_TOL = 1e-9


def _is_connected(adjacency: np.ndarray) -> bool:
    """Breadth-first reachability over the follower graph only; the leader
    does not mediate follower-follower connectivity."""
    n = adjacency.shape[0]
    if n <= 1:
        return True
    seen = {0}
    queue = deque([0])
    while queue:
        i = queue.popleft()
        for j in np.nonzero(adjacency[i])[0]:
            if int(j) not in seen:
                seen.add(int(j))
                queue.append(int(j))
    return len(seen) == n
