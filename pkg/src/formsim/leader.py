"""Virtual leader: analytic reference paths, desired velocities, and the
soft-start ramp.

The leader is open loop: it carries no controller and simply integrates
the unicycle kinematics along the chosen path.  Desired velocities come
from the path derivatives,

    v_d = sqrt(xd'^2 + yd'^2),
    w_d = (yd'' xd' - xd'' yd') / (xd'^2 + yd'^2),

and the linear velocity is multiplied by the soft-start ramp
1 - exp(-t / ramp_tau) so motion starts from rest.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from .angles import wrap_angle


class SingularPathError(ValueError):
    """Raised where the path speed vanishes and the heading is undefined."""


SPEED_SQ_FLOOR = 1e-12


@dataclass(frozen=True)
class LeaderState:
    """Leader pose, body velocities, and their time derivatives."""

    x_r: float
    y_r: float
    theta_r: float
    v_r: float
    omega_r: float
    v_r_dot: float
    omega_r_dot: float


@dataclass(frozen=True)
class ReferencePath:
    """Reference trajectory selection.

    kind: "paper_sine" (x = t, y = 2 + cos t), "line", "circle", or
    "waypoint_spline".  ramp_tau is the soft-start time constant; setting
    ramp_enabled False gives an un-ramped reference for equilibrium tests.
    """

    kind: str = "paper_sine"
    ramp_tau: float = 0.5
    ramp_enabled: bool = True
    speed: float = 1.0
    heading: float = 0.0
    radius: float = 2.0
    waypoint_times: tuple[float, ...] = ()
    waypoint_xs: tuple[float, ...] = ()
    waypoint_ys: tuple[float, ...] = ()
    _splines: tuple = field(default=(), repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.kind not in ("paper_sine", "line", "circle", "waypoint_spline"):
            raise ValueError(f"unknown path kind {self.kind!r}")
        if not self.ramp_tau > 0.0:
            raise ValueError("path.ramp_tau must be strictly positive")
        if self.kind == "circle" and not self.radius > 0.0:
            raise ValueError("path.radius must be strictly positive")
        if self.kind == "waypoint_spline":
            if len(self.waypoint_times) < 4:
                raise ValueError("waypoint_spline needs at least 4 waypoints")
            ts = np.asarray(self.waypoint_times, dtype=float)
            sx = CubicSpline(ts, np.asarray(self.waypoint_xs, dtype=float))
            sy = CubicSpline(ts, np.asarray(self.waypoint_ys, dtype=float))
            object.__setattr__(self, "_splines", (sx, sy))


def path_derivatives(path: ReferencePath, t: float) -> tuple[float, ...]:
    """(xd', yd', xd'', yd'', xd''', yd''') of the reference position at t."""
    if path.kind == "paper_sine":
        # x = t, y = 2 + cos t
        return 1.0, -math.sin(t), 0.0, -math.cos(t), 0.0, math.sin(t)
    if path.kind == "line":
        c, s = math.cos(path.heading), math.sin(path.heading)
        return path.speed * c, path.speed * s, 0.0, 0.0, 0.0, 0.0
    if path.kind == "circle":
        rate = path.speed / path.radius
        ang = rate * t
        sp, r = path.speed, path.radius
        return (
            -sp * math.sin(ang),
            sp * math.cos(ang),
            -sp * rate * math.cos(ang),
            -sp * rate * math.sin(ang),
            sp * rate * rate * math.sin(ang),
            -sp * rate * rate * math.cos(ang),
        )
    sx, sy = path._splines
    return (
        float(sx(t, 1)), float(sy(t, 1)),
        float(sx(t, 2)), float(sy(t, 2)),
        float(sx(t, 3)), float(sy(t, 3)),
    )


def path_position(path: ReferencePath, t: float) -> tuple[float, float]:
    if path.kind == "paper_sine":
        return t, 2.0 + math.cos(t)
    if path.kind == "line":
        return path.speed * t * math.cos(path.heading), path.speed * t * math.sin(path.heading)
    if path.kind == "circle":
        ang = path.speed / path.radius * t
        return path.radius * math.cos(ang), path.radius * math.sin(ang)
    sx, sy = path._splines
    return float(sx(t)), float(sy(t))


def desired_velocities(path: ReferencePath, t: float) -> tuple[float, float]:
    """Desired (linear, angular) velocity of the reference point at t."""
    xd, yd, xdd, ydd, _, _ = path_derivatives(path, t)
    speed_sq = xd * xd + yd * yd
    if speed_sq < SPEED_SQ_FLOOR:
        raise SingularPathError(f"singular path point at t={t}")
    return math.sqrt(speed_sq), (ydd * xd - xdd * yd) / speed_sq


def _ramp(path: ReferencePath, t: float) -> tuple[float, float]:
    """Ramp factor and its time derivative at t."""
    if not path.ramp_enabled:
        return 1.0, 0.0
    e = math.exp(-t / path.ramp_tau)
    return 1.0 - e, e / path.ramp_tau


def ramped_velocities(path: ReferencePath, t: float) -> tuple[float, float]:
    """(v_r, omega_r) after applying the soft-start ramp to v."""
    v_d, w_d = desired_velocities(path, t)
    rho, _ = _ramp(path, t)
    return v_d * rho, w_d


def ramped_accelerations(path: ReferencePath, t: float) -> tuple[float, float]:
    """Analytic (dv_r/dt, domega_r/dt) for closed-form paths."""
    xd, yd, xdd, ydd, xddd, yddd = path_derivatives(path, t)
    speed_sq = xd * xd + yd * yd
    if speed_sq < SPEED_SQ_FLOOR:
        raise SingularPathError(f"singular path point at t={t}")
    v_d = math.sqrt(speed_sq)
    v_d_dot = (xd * xdd + yd * ydd) / v_d
    w_num = ydd * xd - xdd * yd
    w_d_dot = ((yddd * xd - xddd * yd) * speed_sq - w_num * 2.0 * (xd * xdd + yd * ydd)) / (
        speed_sq * speed_sq
    )
    rho, rho_dot = _ramp(path, t)
    return v_d_dot * rho + v_d * rho_dot, w_d_dot


def path_accel_bounds(path: ReferencePath, t_end: float, samples: int = 2000) -> tuple[float, float]:
    """Max |dv_r/dt| and |domega_r/dt| over [0, t_end], sampled on a grid.

    Used at config load to check the velocity-estimator switching gains
    dominate the leader's accelerations.
    """
    iota1 = iota2 = 0.0
    for k in range(samples + 1):
        t = t_end * k / samples
        if path.kind == "waypoint_spline":
            # spline accelerations come from finite differences at run
            # time; bound them from the analytic spline derivatives instead
            v_dot, w_dot = _spline_accels(path, t)
        else:
            v_dot, w_dot = ramped_accelerations(path, t)
        iota1 = max(iota1, abs(v_dot))
        iota2 = max(iota2, abs(w_dot))
    return iota1, iota2


def _spline_accels(path: ReferencePath, t: float) -> tuple[float, float]:
    return ramped_accelerations(path, t)


def initial_leader_state(path: ReferencePath) -> LeaderState:
    """Leader at t = 0: on the path, heading along it, ramped velocities."""
    x0, y0 = path_position(path, 0.0)
    xd, yd, *_ = path_derivatives(path, 0.0)
    v_r, w_r = ramped_velocities(path, 0.0)
    v_dot, w_dot = ramped_accelerations(path, 0.0)
    return LeaderState(
        x_r=x0,
        y_r=y0,
        theta_r=wrap_angle(math.atan2(yd, xd)),
        v_r=v_r,
        omega_r=w_r,
        v_r_dot=v_dot,
        omega_r_dot=w_dot,
    )


def advance_leader(state: LeaderState, path: ReferencePath, t: float, dt: float) -> LeaderState:
    """Advance the leader from t to t + dt.

    The pose integrates one Euler step of the unicycle kinematics using the
    velocities held in `state` (the values at t); the returned velocities
    and accelerations are evaluated at t + dt.  Spline paths have no smooth
    third derivative, so their reported accelerations fall back to a
    backward difference (zero on the first step).
    """
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    x = state.x_r + dt * state.v_r * math.cos(state.theta_r)
    y = state.y_r + dt * state.v_r * math.sin(state.theta_r)
    theta = wrap_angle(state.theta_r + dt * state.omega_r)
    t_new = t + dt
    v_r, w_r = ramped_velocities(path, t_new)
    if path.kind == "waypoint_spline":
        v_dot = (v_r - state.v_r) / dt if t > 0.0 else 0.0
        w_dot = (w_r - state.omega_r) / dt if t > 0.0 else 0.0
    else:
        v_dot, w_dot = ramped_accelerations(path, t_new)
    return LeaderState(
        x_r=x, y_r=y, theta_r=theta, v_r=v_r, omega_r=w_r, v_r_dot=v_dot, omega_r_dot=w_dot
    )


def posture_derivative(state: LeaderState) -> tuple[float, float, float]:
    """Time derivative of the leader posture (unicycle kinematics)."""
    return (
        state.v_r * math.cos(state.theta_r),
        state.v_r * math.sin(state.theta_r),
        state.omega_r,
    )
