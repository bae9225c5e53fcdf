"""Ground-truth differential-drive robot.

Unicycle kinematics driven by body-frame velocities, and torque-driven
dynamics for the two wheels.  With the body origin at the center of mass
the two channels decouple: the wheel-torque sum accelerates the linear
velocity, the difference the angular velocity.  Disturbance forces enter
the velocity dynamics and stay within declared bounds.

Integration is explicit Euler at a fixed step (matching the discrete
model the velocity filter assumes); an RK4 variant of the kinematics
exists for convergence checks only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .angles import wrap_angle

Pose = tuple[float, float, float]


@dataclass(frozen=True)
class RobotState:
    """Planar pose plus body-frame velocities."""

    x: float
    y: float
    theta: float
    v: float
    omega: float


@dataclass(frozen=True)
class VehicleParams:
    """Physical parameters; all strictly positive.

    mass [kg], inertia [kg m^2] about the vertical axis, wheel_radius [m],
    half_axle [m] (half the distance between the wheels).
    """

    mass: float
    inertia: float
    wheel_radius: float
    half_axle: float

    def __post_init__(self) -> None:
        for name in ("mass", "inertia", "wheel_radius", "half_axle"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"vehicle.{name} must be strictly positive")


@dataclass(frozen=True)
class TorquePair:
    tau_left: float
    tau_right: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.tau_left) and math.isfinite(self.tau_right)):
            raise ValueError("torques must be finite")


@dataclass(frozen=True)
class DisturbanceModel:
    """Bounded disturbance on the velocity dynamics.

    waveform selects the shape: "zero", "constant" (the bound values
    themselves), or "sinusoid" with the given amplitude/frequency/phase,
    clipped per channel so samples never exceed the declared bounds.
    """

    bound_linear: float = 0.0
    bound_angular: float = 0.0
    waveform: str = "zero"
    amplitude: float = 0.0
    frequency: float = 1.0
    phase: float = 0.0

    def __post_init__(self) -> None:
        if self.bound_linear < 0.0 or self.bound_angular < 0.0:
            raise ValueError("disturbance bounds must be non-negative")
        if self.waveform not in ("zero", "constant", "sinusoid"):
            raise ValueError(f"unknown disturbance waveform {self.waveform!r}")


def sample_disturbance(model: DisturbanceModel, t: float) -> tuple[float, float]:
    """Disturbance sample (force, torque) at time t, within declared bounds."""
    if model.waveform == "zero":
        return 0.0, 0.0
    if model.waveform == "constant":
        return model.bound_linear, model.bound_angular
    s = math.sin(2.0 * math.pi * model.frequency * t + model.phase)
    return (
        min(model.amplitude, model.bound_linear) * s,
        min(model.amplitude, model.bound_angular) * s,
    )


def kinematics_step(pose: Pose, v: float, omega: float, dt: float) -> Pose:
    """One Euler step of the unicycle kinematics; heading re-wrapped."""
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    x, y, theta = pose
    return (
        x + dt * v * math.cos(theta),
        y + dt * v * math.sin(theta),
        wrap_angle(theta + dt * omega),
    )


def kinematics_step_rk4(pose: Pose, v: float, omega: float, dt: float) -> Pose:
    """RK4 step of the same kinematics, for integrator-accuracy comparisons."""
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    x, y, theta = pose

    def deriv(th: float) -> tuple[float, float, float]:
        return v * math.cos(th), v * math.sin(th), omega

    k1 = deriv(theta)
    k2 = deriv(theta + 0.5 * dt * k1[2])
    k3 = deriv(theta + 0.5 * dt * k2[2])
    k4 = deriv(theta + dt * k3[2])
    x += dt / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
    y += dt / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
    theta += dt / 6.0 * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])
    return x, y, wrap_angle(theta)


def dynamics_step(
    state: RobotState,
    torque: TorquePair,
    params: VehicleParams,
    disturbance: tuple[float, float],
    dt: float,
) -> RobotState:
    """Advance velocities by Euler on the torque dynamics and the pose by
    Euler on the kinematics, using the pre-step velocities for the pose.

    The torque sum drives the linear channel, the torque difference the
    angular channel:
        dv/dt     = (tau_L + tau_R) / (m r) + d1 / m
        domega/dt = c (tau_R - tau_L) / (I r) + d2 / I
    """
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    d1, d2 = disturbance
    values = (state.x, state.y, state.theta, state.v, state.omega,
              torque.tau_left, torque.tau_right, d1, d2)
    if not all(math.isfinite(val) for val in values):
        raise ValueError("dynamics_step requires finite inputs")

    x, y, theta = kinematics_step((state.x, state.y, state.theta), state.v, state.omega, dt)
    v_dot = (torque.tau_left + torque.tau_right) / (params.mass * params.wheel_radius) + d1 / params.mass
    omega_dot = (
        params.half_axle * (torque.tau_right - torque.tau_left)
        / (params.inertia * params.wheel_radius)
        + d2 / params.inertia
    )
    return RobotState(
        x=x,
        y=y,
        theta=theta,
        v=state.v + dt * v_dot,
        omega=state.omega + dt * omega_dot,
    )
