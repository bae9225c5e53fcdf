"""Formation controllers: kinematic velocity commands and dynamic wheel
torques.

Tracking errors are reference-minus-robot in the inertial frame (each
follower's reference is its leader-posture estimate shifted by the
formation offset), rotated into the body frame to give driving, lateral,
and heading errors.

Kinematic layer (two variants):
* conventional backstepping  v_c = C1 x_hat + v_est cos(theta_hat) -- a
  nonzero initial driving error produces a proportional velocity jump;
* bioinspired backstepping   v_c = C1 V_s + v_est cos(theta_hat), with
  V_s a shunting channel driven by x_hat: the command starts at zero and
  stays inside C1*B + |v_est|.

Dynamic layer (three variants) maps to wheel torques through the
(sum, difference) structure of the differential drive:
* conventional sliding mode  switching term sign(e) -- chatters under
  measurement noise;
* bioinspired sliding mode   sign(e) replaced by a shunting channel,
  giving smooth, bounded torques;
* super twisting             second-order sliding baseline
  u = k1 sqrt(|e|) sign(e) + integral(k2 sign(e)); not part of the
  reference design, included for comparison only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .angles import wrap_angle
from .estimator import EstimatorState
from .shunting import ShuntingParams, ShuntingState
from .vehicle import RobotState, TorquePair, VehicleParams

# Backward-difference command derivatives are clamped here to keep
# estimator transients from injecting huge feedforward spikes.
CMD_DERIVATIVE_LIMIT = 50.0


@dataclass(frozen=True)
class FormationOffset:
    """Desired inertial-frame displacement of a follower from the leader."""

    dx: float
    dy: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.dx) and math.isfinite(self.dy)):
            raise ValueError("formation offsets must be finite")


@dataclass(frozen=True)
class KinematicGains:
    c1: float
    c2: float
    c3: float

    def __post_init__(self) -> None:
        for name in ("c1", "c2", "c3"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"kinematic gain {name} must be strictly positive")


@dataclass(frozen=True)
class DynamicGains:
    """Torque-law gains plus the shunting parameters of the two channels."""

    c_a: float
    c_b: float
    linear_shunting: ShuntingParams
    angular_shunting: ShuntingParams

    def __post_init__(self) -> None:
        if not self.c_a > 0.0 or not self.c_b > 0.0:
            raise ValueError("dynamic gains c_a, c_b must be strictly positive")

    def disturbance_margin(self) -> tuple[float, float]:
        """Largest disturbance magnitudes the bioinspired torque law can
        reject per channel (gain times shunting output bound)."""
        return self.c_a * self.linear_shunting.upper, self.c_b * self.angular_shunting.upper


@dataclass(frozen=True)
class SuperTwistingGains:
    k1: float = 2.0
    k2: float = 1.0

    def __post_init__(self) -> None:
        if not self.k1 > 0.0 or not self.k2 > 0.0:
            raise ValueError("super-twisting gains must be strictly positive")


@dataclass(frozen=True)
class SuperTwistingState:
    """Integral terms of the two super-twisting channels."""

    w_linear: float = 0.0
    w_angular: float = 0.0


@dataclass(frozen=True)
class TrackingError:
    """Inertial errors (reference minus robot), their body-frame rotation,
    and the residual feedforward terms that vanish once the leader-posture
    estimate is consistent (position derivative matching velocity)."""

    e_x: float
    e_y: float
    e_theta: float
    x_hat: float
    y_hat: float
    theta_hat: float
    omega_x: float
    omega_y: float


@dataclass(frozen=True)
class VelocityCommand:
    v_c: float
    omega_c: float
    v_c_dot: float = 0.0
    omega_c_dot: float = 0.0


def _sign(x: float) -> float:
    """Switching term with sign(0) = 0 to avoid biased chattering at rest."""
    if x > 0.0:
        return 1.0
    if x < 0.0:
        return -1.0
    return 0.0


def tracking_error(
    robot: RobotState, est: EstimatorState, offset: FormationOffset
) -> TrackingError:
    """Formation tracking error of one follower against its own estimate of
    the leader's posture."""
    x_ref = float(est.p_ir[0]) + offset.dx
    y_ref = float(est.p_ir[1]) + offset.dy
    e_x = x_ref - robot.x
    e_y = y_ref - robot.y
    e_theta = wrap_angle(float(est.p_ir[2]) - robot.theta)

    c = math.cos(robot.theta)
    s = math.sin(robot.theta)
    x_hat = c * e_x + s * e_y
    y_hat = -s * e_x + c * e_y

    # Residuals between the estimate's cached derivative and the rigid-body
    # velocity it implies; both go to zero as the estimator converges.
    rx = float(est.p_ir_dot[0]) - est.v_ir * math.cos(float(est.p_ir[2]))
    ry = float(est.p_ir_dot[1]) - est.v_ir * math.sin(float(est.p_ir[2]))
    omega_x = c * rx + s * ry
    omega_y = -s * rx + c * ry

    return TrackingError(
        e_x=e_x,
        e_y=e_y,
        e_theta=e_theta,
        x_hat=x_hat,
        y_hat=y_hat,
        theta_hat=e_theta,
        omega_x=omega_x,
        omega_y=omega_y,
    )


def _angular_command(err: TrackingError, est: EstimatorState, gains: KinematicGains) -> float:
    return est.omega_ir + gains.c2 * est.v_ir * err.y_hat + gains.c3 * est.v_ir * math.sin(err.theta_hat)


def backstepping_conventional(
    err: TrackingError, est: EstimatorState, gains: KinematicGains
) -> VelocityCommand:
    """Proportional driving-error term: jumps by C1 * x_hat at start-up."""
    v_c = gains.c1 * err.x_hat + est.v_ir * math.cos(err.theta_hat)
    return VelocityCommand(v_c=v_c, omega_c=_angular_command(err, est, gains))


def backstepping_bioinspired(
    err: TrackingError, est: EstimatorState, gains: KinematicGains, shunt: ShuntingState
) -> VelocityCommand:
    """Driving error routed through a shunting channel: the command starts
    at zero and |v_c| <= C1 * B + |v_est| for all time."""
    v_c = gains.c1 * shunt.v_s + est.v_ir * math.cos(err.theta_hat)
    return VelocityCommand(v_c=v_c, omega_c=_angular_command(err, est, gains))


def _torques(
    params: VehicleParams,
    cmd_dot: tuple[float, float],
    linear_term: float,
    angular_term: float,
    c_a: float,
    c_b: float,
) -> TorquePair:
    half_sum = params.mass * params.wheel_radius / 2.0 * (cmd_dot[0] + c_a * linear_term)
    half_diff = (
        params.inertia * params.wheel_radius / (2.0 * params.half_axle)
        * (cmd_dot[1] + c_b * angular_term)
    )
    return TorquePair(tau_left=half_sum - half_diff, tau_right=half_sum + half_diff)


def smc_conventional(
    vel_err: tuple[float, float],
    cmd_dot: tuple[float, float],
    params: VehicleParams,
    gains: DynamicGains,
) -> TorquePair:
    """Sliding-mode torque law with hard switching terms."""
    return _torques(params, cmd_dot, _sign(vel_err[0]), _sign(vel_err[1]), gains.c_a, gains.c_b)


def smc_bioinspired(
    vel_err: tuple[float, float],
    cmd_dot: tuple[float, float],
    params: VehicleParams,
    gains: DynamicGains,
    shunts: tuple[ShuntingState, ShuntingState],
) -> TorquePair:
    """Sliding-mode torque law with the switching terms replaced by the two
    shunting channels (driven by the velocity errors)."""
    return _torques(params, cmd_dot, shunts[0].v_s, shunts[1].v_s, gains.c_a, gains.c_b)


def smc_super_twisting(
    vel_err: tuple[float, float],
    cmd_dot: tuple[float, float],
    params: VehicleParams,
    gains_st: SuperTwistingGains,
    state: SuperTwistingState,
    dt: float,
) -> tuple[TorquePair, SuperTwistingState]:
    """Second-order sliding baseline, mapped through the same torque
    structure with unit channel gains.  Returns the advanced integral state."""
    e1, e2 = vel_err
    u1 = gains_st.k1 * math.sqrt(abs(e1)) * _sign(e1) + state.w_linear
    u2 = gains_st.k1 * math.sqrt(abs(e2)) * _sign(e2) + state.w_angular
    tau = _torques(params, cmd_dot, u1, u2, 1.0, 1.0)
    new_state = SuperTwistingState(
        w_linear=state.w_linear + dt * gains_st.k2 * _sign(e1),
        w_angular=state.w_angular + dt * gains_st.k2 * _sign(e2),
    )
    return tau, new_state


def command_derivative(
    prev: VelocityCommand | None, curr: VelocityCommand, dt: float
) -> tuple[float, float]:
    """Backward-difference command derivatives; (0, 0) on the first tick,
    clamped to +/-CMD_DERIVATIVE_LIMIT."""
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    if prev is None:
        return 0.0, 0.0
    lim = CMD_DERIVATIVE_LIMIT
    v_dot = (curr.v_c - prev.v_c) / dt
    w_dot = (curr.omega_c - prev.omega_c) / dt
    return max(-lim, min(lim, v_dot)), max(-lim, min(lim, w_dot))
