"""Per-follower estimation of the leader's posture and velocities from
neighbor information only.

Each follower keeps an estimate of the leader posture and velocities and
updates it from a snapshot of its neighbors' estimates (plus the leader's
true state when it has a direct link).  The posture law is a consensus
protocol on the neighborhood error

    e_p = a_i0 (P_i - P_leader) + sum_j a_ij (P_i - P_j),

    dP_i/dt = (1/xi_i) (-K e_p + sum_j a_ij dP_j/dt + a_i0 dP_leader/dt),

with xi_i the degree.  The velocity laws are sliding-mode estimators

    dv_i/dt = -k_a e_v - k_b sat(e_v)

that need no leader acceleration: k_b only has to dominate the leader's
acceleration bound.

The posture law couples the followers' derivatives.  Two resolutions
ship, selected by how the snapshot is built:

* delayed  - snapshots carry each neighbor's previous-tick derivative
  (causal, truly distributed); integration is explicit Euler.
* implicit - the engine solves the coupled linear system for all
  derivatives first (see solve_posture_derivatives) and snapshots carry
  the same-tick solution, which `posture_step` then reproduces exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .angles import wrap_angle
from .topology import GraphMatrices


class IsolatedFollowerError(ValueError):
    """Estimator undefined for a follower with no neighbors and no leader link."""


class SnapshotMismatchError(ValueError):
    """Snapshot contents disagree with the follower's topology row."""


def _readonly(arr) -> np.ndarray:
    out = np.array(arr, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class EstimatorGains:
    """Posture gain matrix (3x3 symmetric positive definite) and the four
    positive scalars of the velocity laws.

    k_b1 and k_b2 must dominate the leader's acceleration bounds; that
    check lives in the scenario validation where the path is known.
    """

    k: np.ndarray
    k_a1: float
    k_b1: float
    k_a2: float
    k_b2: float

    def __post_init__(self) -> None:
        k = np.array(self.k, dtype=float)
        if k.shape != (3, 3):
            raise ValueError("estimator gain k must be 3x3")
        if not np.allclose(k, k.T, atol=1e-12):
            raise ValueError("estimator gain k must be symmetric")
        try:
            np.linalg.cholesky(k)
        except np.linalg.LinAlgError as exc:
            raise ValueError("estimator gain k must be positive definite") from exc
        for name in ("k_a1", "k_b1", "k_a2", "k_b2"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"estimator gain {name} must be strictly positive")
        object.__setattr__(self, "k", _readonly(k))


@dataclass(frozen=True)
class EstimatorState:
    """One follower's estimate of the leader: posture, cached posture
    derivative (what neighbors receive), and velocities."""

    p_ir: np.ndarray
    p_ir_dot: np.ndarray
    v_ir: float
    omega_ir: float

    def __post_init__(self) -> None:
        p = np.array(self.p_ir, dtype=float)
        d = np.array(self.p_ir_dot, dtype=float)
        if p.shape != (3,) or d.shape != (3,):
            raise ValueError("estimator posture and derivative must be 3-vectors")
        p[2] = wrap_angle(p[2])
        object.__setattr__(self, "p_ir", _readonly(p))
        object.__setattr__(self, "p_ir_dot", _readonly(d))


@dataclass(frozen=True)
class LeaderInfo:
    """Leader data carried in a snapshot when the follower has a direct link."""

    posture: np.ndarray
    posture_dot: np.ndarray
    v: float
    omega: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "posture", _readonly(self.posture))
        object.__setattr__(self, "posture_dot", _readonly(self.posture_dot))


@dataclass(frozen=True)
class NeighborSnapshot:
    """Immutable view of a follower's neighborhood at a tick boundary.

    Contains exactly the neighbors named by the topology row, in index
    order, and the leader block only when the follower has a leader link.
    """

    neighbor_ids: tuple[int, ...]
    postures: np.ndarray      # (len(neighbor_ids), 3)
    posture_dots: np.ndarray  # (len(neighbor_ids), 3)
    v_estimates: np.ndarray   # (len(neighbor_ids),)
    omega_estimates: np.ndarray
    leader: LeaderInfo | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "postures", _readonly(self.postures))
        object.__setattr__(self, "posture_dots", _readonly(self.posture_dots))
        object.__setattr__(self, "v_estimates", _readonly(self.v_estimates))
        object.__setattr__(self, "omega_estimates", _readonly(self.omega_estimates))


def saturation(x: float) -> float:
    """Clamp to [-1, 1]."""
    if x > 1.0:
        return 1.0
    if x < -1.0:
        return -1.0
    return x


def _check_snapshot(snapshot: NeighborSnapshot, topo_row: np.ndarray) -> None:
    expected = tuple(int(j) for j in np.nonzero(np.asarray(topo_row))[0])
    if snapshot.neighbor_ids != expected:
        raise SnapshotMismatchError(
            f"snapshot neighbors {snapshot.neighbor_ids} do not match topology row {expected}"
        )


def _degree(snapshot: NeighborSnapshot, topo_row: np.ndarray) -> float:
    leader_link = 1.0 if snapshot.leader is not None else 0.0
    return float(np.asarray(topo_row).sum() + leader_link)


def posture_error(
    snapshot: NeighborSnapshot, own: EstimatorState, topo_row: np.ndarray
) -> np.ndarray:
    """Neighborhood posture error of one follower.

    The angle component uses shortest-arc wrapped differences so the error
    cannot accumulate whole turns.
    """
    _check_snapshot(snapshot, topo_row)
    if _degree(snapshot, topo_row) == 0.0:
        raise IsolatedFollowerError("estimator undefined for isolated follower")
    err = np.zeros(3)
    if snapshot.leader is not None:
        err[0] += own.p_ir[0] - snapshot.leader.posture[0]
        err[1] += own.p_ir[1] - snapshot.leader.posture[1]
        err[2] += wrap_angle(own.p_ir[2] - snapshot.leader.posture[2])
    for idx in range(len(snapshot.neighbor_ids)):
        err[0] += own.p_ir[0] - snapshot.postures[idx, 0]
        err[1] += own.p_ir[1] - snapshot.postures[idx, 1]
        err[2] += wrap_angle(own.p_ir[2] - snapshot.postures[idx, 2])
    return err


def posture_step(
    own: EstimatorState,
    snapshot: NeighborSnapshot,
    gains: EstimatorGains,
    topo_row: np.ndarray,
    dt: float,
    mode: str = "delayed",
) -> EstimatorState:
    """One Euler step of the posture consensus law.

    The neighbor derivatives come from the snapshot: previous-tick values
    in delayed mode, or the engine's same-tick solution of the coupled
    system in implicit mode (in which case this evaluation reproduces that
    solution exactly).  The computed derivative is cached on the returned
    state for neighbors to read next tick.
    """
    if mode not in ("delayed", "implicit"):
        raise ValueError(f"unknown posture step mode {mode!r}")
    err = posture_error(snapshot, own, topo_row)
    degree = _degree(snapshot, topo_row)
    acc = -gains.k @ err
    if snapshot.leader is not None:
        acc = acc + snapshot.leader.posture_dot
    if len(snapshot.neighbor_ids) > 0:
        acc = acc + snapshot.posture_dots.sum(axis=0)
    derivative = acc / degree
    new_p = own.p_ir + dt * derivative
    return EstimatorState(
        p_ir=new_p, p_ir_dot=derivative, v_ir=own.v_ir, omega_ir=own.omega_ir
    )


def velocity_step(
    own: EstimatorState,
    snapshot: NeighborSnapshot,
    gains: EstimatorGains,
    topo_row: np.ndarray,
    dt: float,
) -> EstimatorState:
    """One Euler step of the sliding-mode velocity estimators (linear and
    angular); needs no leader acceleration information."""
    _check_snapshot(snapshot, topo_row)
    if _degree(snapshot, topo_row) == 0.0:
        raise IsolatedFollowerError("estimator undefined for isolated follower")

    e_v = 0.0
    e_w = 0.0
    if snapshot.leader is not None:
        e_v += own.v_ir - snapshot.leader.v
        e_w += own.omega_ir - snapshot.leader.omega
    for idx in range(len(snapshot.neighbor_ids)):
        e_v += own.v_ir - float(snapshot.v_estimates[idx])
        e_w += own.omega_ir - float(snapshot.omega_estimates[idx])

    v_dot = -gains.k_a1 * e_v - gains.k_b1 * saturation(e_v)
    w_dot = -gains.k_a2 * e_w - gains.k_b2 * saturation(e_w)
    return EstimatorState(
        p_ir=own.p_ir,
        p_ir_dot=own.p_ir_dot,
        v_ir=own.v_ir + dt * v_dot,
        omega_ir=own.omega_ir + dt * w_dot,
    )


def solve_posture_derivatives(
    gm: GraphMatrices,
    leader_links: np.ndarray,
    errors: np.ndarray,
    gains: list[EstimatorGains],
    leader_dot: np.ndarray,
) -> np.ndarray:
    """Solve the coupled posture-derivative system exactly for all followers.

    Stacked over followers the law reads (H (x) I3) dP = -K e_p + a (x) dP_leader
    with K = blockdiag(k_i); H is positive definite for valid topologies so
    the solve cannot fail there.

    Args:
        errors: (n, 3) neighborhood posture errors.
        gains: per-follower gain sets.
        leader_dot: leader posture derivative (3,).

    Returns (n, 3) derivatives.
    """
    n = errors.shape[0]
    rhs = np.empty((n, 3))
    for i in range(n):
        rhs[i] = -(gains[i].k @ errors[i]) + float(leader_links[i]) * np.asarray(leader_dot)
    big = np.kron(gm.h_matrix, np.eye(3))
    try:
        flat = np.linalg.solve(big, rhs.reshape(-1))
    except np.linalg.LinAlgError as exc:
        raise ValueError("coupled posture system is singular (invalid topology)") from exc
    return flat.reshape(n, 3)
