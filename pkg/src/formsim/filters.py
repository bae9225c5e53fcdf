"""Velocity-state filters: Kalman, sliding innovation (fixed boundary),
and adaptive sliding innovation.

All three share the same predict stage over the believed discrete model

    zeta+ = A zeta + B tau,    P+ = A P A^T + Q,

where B is built from the believed mass and inertia (possibly corrupted by
a fault) and the commanded torque is the input.  They differ in the gain:

* KF    K = P H^T S^-1 with S = H P H^T + R -- optimal when the believed
        model is right, trusting its predictions when it is not.
* SIF   K = H^+ diag(sat(|z| / rho)) with a fixed boundary layer rho --
        sub-optimal but driven by the measured innovation, so model error
        saturates the gain at one and the estimate rides the measurement.
* ASIF  the SIF with the boundary layer recomputed each step,
        rho = S (S - R)^-1 diag|z|, which reproduces the Kalman gain
        while innovations are consistent with the covariances.  The layer
        is capped at a multiple of the measurement noise scale: once the
        innovation leaves the statistically plausible band (a model
        fault), the gain saturates and the filter degrades gracefully to
        measurement following instead of inheriting the KF's divergence.

Covariance updates use the Joseph form throughout, which preserves
symmetry and positive semidefiniteness for any gain.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .vehicle import TorquePair, VehicleParams

# Regularizer for inverting S - R = H P H^T when P collapses, and floor for
# boundary-layer components when the innovation vanishes.
REG_EPS = 1e-9
RHO_FLOOR = 1e-9
DEFAULT_BOUNDARY_CAP_SCALE = 15.0


def _readonly(arr) -> np.ndarray:
    out = np.array(arr, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class FilterModel:
    """Believed discrete velocity model plus noise covariances.

    believed_mass_scale / believed_inertia_scale record the fault
    multipliers baked into b_h (1.0 means healthy).  rho_cap is the
    per-component ceiling of the adaptive boundary layer.
    """

    a_h: np.ndarray
    b_h: np.ndarray
    h: np.ndarray
    q: np.ndarray
    r: np.ndarray
    believed_mass_scale: float = 1.0
    believed_inertia_scale: float = 1.0
    rho_cap: np.ndarray | None = None

    def __post_init__(self) -> None:
        for name in ("a_h", "b_h", "h", "q", "r"):
            mat = np.array(getattr(self, name), dtype=float)
            if mat.shape != (2, 2):
                raise ValueError(f"filter model {name} must be 2x2")
            if not np.all(np.isfinite(mat)):
                raise ValueError(f"filter model {name} must be finite")
            object.__setattr__(self, name, _readonly(mat))
        for name in ("q", "r"):
            mat = getattr(self, name)
            if not np.allclose(mat, mat.T, atol=1e-12):
                raise ValueError(f"filter model {name} must be symmetric")
            if np.any(np.linalg.eigvalsh(mat) <= 0.0):
                raise ValueError(f"filter model {name} must be positive definite")
        if self.rho_cap is not None:
            object.__setattr__(self, "rho_cap", _readonly(self.rho_cap))
        object.__setattr__(self, "_h_pinv", _readonly(np.linalg.pinv(self.h)))

    @property
    def h_pinv(self) -> np.ndarray:
        return self._h_pinv


def model_from_vehicle(
    params: VehicleParams,
    dt: float,
    q: np.ndarray,
    r: np.ndarray,
    mass_scale: float = 1.0,
    inertia_scale: float = 1.0,
    boundary_cap_scale: float = DEFAULT_BOUNDARY_CAP_SCALE,
) -> FilterModel:
    """Build the believed model from vehicle parameters and the time step.

    The input matrix mirrors the truth dynamics (torque sum drives the
    linear channel, difference the angular one) with the believed, possibly
    fault-scaled, mass and inertia.
    """
    m = params.mass * mass_scale
    inertia = params.inertia * inertia_scale
    rr = params.wheel_radius
    c = params.half_axle
    b_h = dt * np.array(
        [
            [1.0 / (m * rr), 1.0 / (m * rr)],
            [-c / (inertia * rr), c / (inertia * rr)],
        ]
    )
    r = np.array(r, dtype=float)
    rho_cap = boundary_cap_scale * np.sqrt(np.diag(r))
    return FilterModel(
        a_h=np.eye(2),
        b_h=b_h,
        h=np.eye(2),
        q=q,
        r=r,
        believed_mass_scale=mass_scale,
        believed_inertia_scale=inertia_scale,
        rho_cap=rho_cap,
    )


@dataclass(frozen=True)
class FilterState:
    """Velocity estimate (v, omega) and its covariance."""

    zeta: np.ndarray
    p: np.ndarray

    def __post_init__(self) -> None:
        zeta = np.array(self.zeta, dtype=float)
        p = np.array(self.p, dtype=float)
        if zeta.shape != (2,) or p.shape != (2, 2):
            raise ValueError("filter state must be a 2-vector with 2x2 covariance")
        object.__setattr__(self, "zeta", _readonly(zeta))
        object.__setattr__(self, "p", _readonly(p))


@dataclass(frozen=True)
class InnovationRecord:
    """Innovation, its covariance, the boundary layer in effect (None for
    the KF), and the gain that was applied."""

    z: np.ndarray
    s: np.ndarray
    rho: np.ndarray | None
    gain: np.ndarray


def predict(fs: FilterState, model: FilterModel, torque: TorquePair) -> FilterState:
    """Propagate the estimate through the believed model with the commanded
    torque; covariance grows by Q."""
    tau = np.array([torque.tau_left, torque.tau_right])
    zeta = model.a_h @ fs.zeta + model.b_h @ tau
    p = model.a_h @ fs.p @ model.a_h.T + model.q
    return FilterState(zeta=zeta, p=p)


def _joseph(p: np.ndarray, k: np.ndarray, h: np.ndarray, r: np.ndarray) -> np.ndarray:
    ikh = np.eye(2) - k @ h
    return ikh @ p @ ikh.T + k @ r @ k.T


def _innovation(fs: FilterState, model: FilterModel, measurement: np.ndarray) -> np.ndarray:
    return np.asarray(measurement, dtype=float) - model.h @ fs.zeta


def update_kf(
    fs: FilterState, model: FilterModel, measurement: np.ndarray
) -> tuple[FilterState, InnovationRecord]:
    """Standard Kalman update with Joseph-form covariance."""
    z = _innovation(fs, model, measurement)
    s = model.h @ fs.p @ model.h.T + model.r
    try:
        gain = np.linalg.solve(s.T, (fs.p @ model.h.T).T).T
    except np.linalg.LinAlgError as exc:
        raise ValueError("innovation covariance is singular") from exc
    zeta = fs.zeta + gain @ z
    p = _joseph(fs.p, gain, model.h, model.r)
    return FilterState(zeta=zeta, p=p), InnovationRecord(z=z, s=s, rho=None, gain=gain)


def update_sif(
    fs: FilterState, model: FilterModel, measurement: np.ndarray, rho_fixed: np.ndarray
) -> tuple[FilterState, InnovationRecord]:
    """Sliding innovation update with a fixed boundary layer."""
    rho = np.asarray(rho_fixed, dtype=float)
    if np.any(rho <= 0.0):
        raise ValueError("rho_fixed components must be strictly positive")
    z = _innovation(fs, model, measurement)
    s = model.h @ fs.p @ model.h.T + model.r
    ratios = np.clip(np.abs(z) / rho, 0.0, 1.0)
    gain = model.h_pinv @ np.diag(ratios)
    zeta = fs.zeta + gain @ z
    p = _joseph(fs.p, gain, model.h, model.r)
    return FilterState(zeta=zeta, p=p), InnovationRecord(z=z, s=s, rho=rho.copy(), gain=gain)


def update_asif(
    fs: FilterState, model: FilterModel, measurement: np.ndarray
) -> tuple[FilterState, InnovationRecord]:
    """Sliding innovation update with the adaptive boundary layer.

    rho_j = [S (S - R)^-1 diag|z|]_jj, floored, and capped at
    model.rho_cap; gain_j = |z_j| / rho_j clamped to [0, 1].  Below the
    cap this reproduces the Kalman gain (for diagonal covariances the
    ratio is exactly P / (P + R)); past it the gain saturates at one.
    """
    z = _innovation(fs, model, measurement)
    php = model.h @ fs.p @ model.h.T
    s = php + model.r
    layer = s @ np.linalg.inv(php + REG_EPS * np.eye(2)) @ np.diag(np.abs(z))
    rho = np.maximum(np.diag(layer), RHO_FLOOR)
    if model.rho_cap is not None:
        rho = np.minimum(rho, model.rho_cap)
    ratios = np.clip(np.abs(z) / rho, 0.0, 1.0)
    gain = model.h_pinv @ np.diag(ratios)
    zeta = fs.zeta + gain @ z
    p = _joseph(fs.p, gain, model.h, model.r)
    return FilterState(zeta=zeta, p=p), InnovationRecord(z=z, s=s, rho=rho, gain=gain)
