"""Fixed-step closed-loop simulation of the full formation system.

Each tick runs, in order: leader advance, neighbor-snapshot exchange,
estimator posture and velocity steps, tracking errors and the kinematic
controller, velocity errors and the dynamic controller, truth dynamics
with disturbance, velocity measurement, and the filter predict/update.
Controllers consume the estimator outputs of the same tick and the filter
estimate produced at the end of the previous tick (the most recent
causally available one).

Determinism: measurement noise comes from one counter-based generator per
(robot, channel), keyed by the scenario seed, so identical configurations
reproduce bit-identical logs regardless of iteration order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import control, estimator, filters, leader as leader_mod, vehicle as vehicle_mod
from .angles import wrap_angle
from .control import (
    DynamicGains,
    FormationOffset,
    KinematicGains,
    SuperTwistingGains,
    SuperTwistingState,
    VelocityCommand,
)
from .estimator import EstimatorGains, EstimatorState, LeaderInfo, NeighborSnapshot
from .filters import FilterModel, FilterState
from .leader import LeaderState, ReferencePath
from .shunting import ShuntingParams, ShuntingState, shunting_step
from .topology import Topology, build_matrices, is_valid_for_estimation
from .vehicle import DisturbanceModel, RobotState, TorquePair, VehicleParams

KINEMATIC_CONTROLLERS = ("conventional", "bioinspired")
DYNAMIC_CONTROLLERS = ("conventional_smc", "bioinspired_smc", "super_twisting")
FILTER_KINDS = ("none", "kf", "sif", "asif")
ESTIMATOR_MODES = ("delayed", "implicit")
ESTIMATOR_INITS = ("leader", "own_pose_minus_offset")
ROBOT_VELOCITY_INITS = ("zero", "match_leader")


class SimulationAbort(RuntimeError):
    """Numerical failure during a run; message names the tick and robot."""


class ConfigValidationError(ValueError):
    """One message per offending field, dotted-path prefixed."""

    def __init__(self, errors: list[str]):
        super().__init__("; ".join(errors))
        self.errors = errors


@dataclass(frozen=True)
class FaultSchedule:
    """Believed-model corruption: from t_fault on, the filter's model is
    rebuilt with the scaled mass and inertia.  Truth dynamics unaffected."""

    t_fault: float
    mass_scale: float = 0.01
    inertia_scale: float = 0.1


@dataclass(frozen=True)
class RobotConfig:
    """Formation offset plus body-frame initial tracking errors (driving,
    lateral, heading), which fix the robot's starting pose."""

    offset: FormationOffset
    initial_driving_error: float = 0.0
    initial_lateral_error: float = 0.0
    initial_heading_error: float = 0.0


def _default_kin_gains() -> KinematicGains:
    return KinematicGains(c1=3.0, c2=2.0, c3=1.0)


def _default_kin_shunting() -> ShuntingParams:
    return ShuntingParams(decay=4.0, upper=2.0, lower=2.0)


def _default_dyn_gains() -> DynamicGains:
    return DynamicGains(
        c_a=3.0,
        c_b=3.0,
        linear_shunting=ShuntingParams(decay=4.0, upper=6.0, lower=6.0),
        angular_shunting=ShuntingParams(decay=4.0, upper=6.0, lower=6.0),
    )


def _default_est_gains() -> EstimatorGains:
    return EstimatorGains(k=np.eye(3), k_a1=20.0, k_b1=5.0, k_a2=20.0, k_b2=5.0)


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything a run needs; every field is config-file overridable."""

    topology: Topology
    robots: tuple[RobotConfig, ...]
    name: str = "scenario"
    dt: float = 0.01
    t_end: float = 30.0
    seed: int = 20230527
    vehicle: VehicleParams = field(
        default_factory=lambda: VehicleParams(mass=10.0, inertia=5.0, wheel_radius=0.1, half_axle=0.25)
    )
    path: ReferencePath = field(default_factory=ReferencePath)
    estimator_gains: EstimatorGains = field(default_factory=_default_est_gains)
    estimator_mode: str = "delayed"
    estimator_init: str = "leader"
    kinematic_controller: str = "bioinspired"
    kinematic_gains: KinematicGains = field(default_factory=_default_kin_gains)
    kinematic_shunting: ShuntingParams = field(default_factory=_default_kin_shunting)
    dynamic_controller: str = "bioinspired_smc"
    dynamic_gains: DynamicGains = field(default_factory=_default_dyn_gains)
    super_twisting: SuperTwistingGains = field(default_factory=SuperTwistingGains)
    filter_kind: str = "asif"
    q_diag: tuple[float, float] = (1e-4, 1e-4)
    r_diag: tuple[float, float] = (1e-4, 1e-4)
    rho_fixed: tuple[float, float] = (0.05, 0.05)
    boundary_cap_scale: float = filters.DEFAULT_BOUNDARY_CAP_SCALE
    fault: FaultSchedule | None = None
    measurement_sigma: float = 0.01
    exchange_sigma: float = 0.0
    disturbance: DisturbanceModel = field(default_factory=DisturbanceModel)
    use_true_velocities: bool = False
    initial_robot_velocities: str = "zero"
    error_thresholds: tuple[float, float, float] = (0.05, 0.05, 0.05)

    @property
    def n_robots(self) -> int:
        return self.topology.n

    @property
    def n_ticks(self) -> int:
        return int(round(self.t_end / self.dt))

    def validate(self) -> list[str]:
        """Cross-field validation; returns dotted-path error messages."""
        errors: list[str] = []
        if not self.dt > 0.0:
            errors.append("dt: must be strictly positive")
        elif not self.t_end > self.dt:
            errors.append("t_end: must exceed dt")
        ok, reason = is_valid_for_estimation(self.topology)
        if not ok:
            errors.append(f"topology: {reason}")
        if len(self.robots) != self.topology.n:
            errors.append(
                f"robots: expected {self.topology.n} entries to match topology, got {len(self.robots)}"
            )
        if self.estimator_mode not in ESTIMATOR_MODES:
            errors.append(f"estimator_mode: unknown mode {self.estimator_mode!r}")
        if self.estimator_init not in ESTIMATOR_INITS:
            errors.append(f"estimator_init: unknown init {self.estimator_init!r}")
        if self.kinematic_controller not in KINEMATIC_CONTROLLERS:
            errors.append(f"controllers.kinematic: unknown controller {self.kinematic_controller!r}")
        if self.dynamic_controller not in DYNAMIC_CONTROLLERS:
            errors.append(f"controllers.dynamic: unknown controller {self.dynamic_controller!r}")
        if self.filter_kind not in FILTER_KINDS:
            errors.append(f"filter.kind: unknown filter {self.filter_kind!r}")
        if self.initial_robot_velocities not in ROBOT_VELOCITY_INITS:
            errors.append(
                f"initial_robot_velocities: unknown option {self.initial_robot_velocities!r}"
            )
        if any(q <= 0.0 for q in self.q_diag):
            errors.append("filter.q_diag: entries must be strictly positive")
        if any(r <= 0.0 for r in self.r_diag):
            errors.append("filter.r_diag: entries must be strictly positive")
        if self.filter_kind == "sif" and any(r <= 0.0 for r in self.rho_fixed):
            errors.append("filter.rho_fixed: entries must be strictly positive")
        if not self.boundary_cap_scale > 0.0:
            errors.append("filter.boundary_cap_scale: must be strictly positive")
        if self.measurement_sigma < 0.0:
            errors.append("noise.measurement_sigma: must be non-negative")
        if self.exchange_sigma < 0.0:
            errors.append("noise.exchange_sigma: must be non-negative")
        if any(th <= 0.0 for th in self.error_thresholds):
            errors.append("error_thresholds: must be strictly positive")

        # Switching gains of the velocity estimator must dominate the
        # leader's acceleration bounds along the configured path.
        if self.dt > 0.0 and self.t_end > self.dt:
            try:
                iota1, iota2 = leader_mod.path_accel_bounds(self.path, self.t_end)
            except leader_mod.SingularPathError as exc:
                errors.append(f"path: {exc}")
            else:
                if self.estimator_gains.k_b1 + 1e-9 < iota1:
                    errors.append(
                        f"estimator.k_b1: {self.estimator_gains.k_b1} is below the leader "
                        f"linear-acceleration bound {iota1:.3f} for this path"
                    )
                if self.estimator_gains.k_b2 + 1e-9 < iota2:
                    errors.append(
                        f"estimator.k_b2: {self.estimator_gains.k_b2} is below the leader "
                        f"angular-acceleration bound {iota2:.3f} for this path"
                    )

        margin_lin, margin_ang = self.dynamic_gains.disturbance_margin()
        if margin_lin < self.disturbance.bound_linear:
            errors.append(
                "controllers.dynamic_gains: c_a times the linear shunting bound "
                f"({margin_lin}) cannot reject disturbance bound {self.disturbance.bound_linear}"
            )
        if margin_ang < self.disturbance.bound_angular:
            errors.append(
                "controllers.dynamic_gains: c_b times the angular shunting bound "
                f"({margin_ang}) cannot reject disturbance bound {self.disturbance.bound_angular}"
            )
        return errors


@dataclass(frozen=True)
class TickRecord:
    """One follower's log entry for one tick."""

    t: float
    robot_id: int
    x: float
    y: float
    theta: float
    v_true: float
    omega_true: float
    est_x: float
    est_y: float
    est_theta: float
    est_v: float
    est_omega: float
    e_x: float
    e_y: float
    e_theta: float
    x_hat: float
    y_hat: float
    theta_hat: float
    v_cmd: float
    omega_cmd: float
    tau_l: float
    tau_r: float
    v_meas: float
    omega_meas: float
    v_filt: float
    omega_filt: float


ROBOT_FIELDS = (
    "x", "y", "theta", "v_true", "omega_true",
    "est_x", "est_y", "est_theta", "est_v", "est_omega",
    "e_x", "e_y", "e_theta", "x_hat", "y_hat", "theta_hat",
    "v_cmd", "omega_cmd", "tau_l", "tau_r",
    "v_meas", "omega_meas", "v_filt", "omega_filt",
)

CSV_COLUMNS = (
    "t", "robot_id", "x", "y", "theta", "v_true", "omega_true",
    "v_meas", "omega_meas", "v_filt", "omega_filt", "v_cmd", "omega_cmd",
    "tau_l", "tau_r", "e_x", "e_y", "e_theta", "x_hat", "y_hat", "theta_hat",
)


@dataclass
class RunResult:
    """Columnar log of a run: time vector, leader arrays, and one
    (n_robots, n_ticks) array per robot field, plus the stacked
    posture-estimation error norm per tick."""

    config: ScenarioConfig
    time: np.ndarray
    leader: dict[str, np.ndarray]
    robots: dict[str, np.ndarray]
    ep_norm: np.ndarray

    @property
    def n_ticks(self) -> int:
        return len(self.time)

    @property
    def n_robots(self) -> int:
        return self.config.n_robots

    def tick_records(self, robot: int) -> list[TickRecord]:
        """All tick records of one follower (1-based id)."""
        idx = robot - 1
        out = []
        for k in range(self.n_ticks):
            out.append(
                TickRecord(
                    t=float(self.time[k]),
                    robot_id=robot,
                    **{name: float(self.robots[name][idx, k]) for name in ROBOT_FIELDS},
                )
            )
        return out


def apply_fault(model: FilterModel, schedule: FaultSchedule | None, t: float,
                params: VehicleParams, dt: float) -> FilterModel:
    """Believed model in effect at time t: past t_fault the input matrix is
    rebuilt with the scaled mass and inertia."""
    if schedule is None or t < schedule.t_fault:
        return model
    return filters.model_from_vehicle(
        params,
        dt,
        q=model.q,
        r=model.r,
        mass_scale=schedule.mass_scale,
        inertia_scale=schedule.inertia_scale,
        boundary_cap_scale=(
            float(model.rho_cap[0] / math.sqrt(model.r[0, 0])) if model.rho_cap is not None
            else filters.DEFAULT_BOUNDARY_CAP_SCALE
        ),
    )


def _initial_states(
    config: ScenarioConfig, leader0: LeaderState
) -> tuple[list[RobotState], list[EstimatorState]]:
    """Place robots from their configured body-frame tracking errors and
    initialize the leader estimates per the configured mode."""
    leader_posture = np.array([leader0.x_r, leader0.y_r, leader0.theta_r])
    leader_dot = np.array(leader_mod.posture_derivative(leader0))
    robots: list[RobotState] = []
    estimates: list[EstimatorState] = []
    if config.initial_robot_velocities == "match_leader":
        v0, w0 = leader0.v_r, leader0.omega_r
    else:
        v0, w0 = 0.0, 0.0
    for rc in config.robots:
        theta_i = wrap_angle(leader0.theta_r - rc.initial_heading_error)
        c, s = math.cos(theta_i), math.sin(theta_i)
        # Body errors rotate back to inertial errors (reference minus robot).
        e_x = c * rc.initial_driving_error - s * rc.initial_lateral_error
        e_y = s * rc.initial_driving_error + c * rc.initial_lateral_error
        x_i = leader0.x_r + rc.offset.dx - e_x
        y_i = leader0.y_r + rc.offset.dy - e_y
        robots.append(RobotState(x=x_i, y=y_i, theta=theta_i, v=v0, omega=w0))
        if config.estimator_init == "leader":
            estimates.append(
                EstimatorState(
                    p_ir=leader_posture.copy(),
                    p_ir_dot=leader_dot.copy(),
                    v_ir=leader0.v_r,
                    omega_ir=leader0.omega_r,
                )
            )
        else:
            estimates.append(
                EstimatorState(
                    p_ir=np.array([x_i - rc.offset.dx, y_i - rc.offset.dy, theta_i]),
                    p_ir_dot=np.zeros(3),
                    v_ir=0.0,
                    omega_ir=0.0,
                )
            )
    return robots, estimates


def _build_snapshots(
    config: ScenarioConfig,
    estimates: list[EstimatorState],
    leader_state: LeaderState,
    leader_dot: np.ndarray,
    dots: list[np.ndarray],
    exchange_noise: list[np.ndarray] | None,
) -> list[NeighborSnapshot]:
    adj = config.topology.adjacency
    links = config.topology.leader_links
    leader_posture = np.array([leader_state.x_r, leader_state.y_r, leader_state.theta_r])
    snaps = []
    for i in range(config.n_robots):
        ids = tuple(int(j) for j in np.nonzero(adj[i])[0])
        postures = np.array([estimates[j].p_ir for j in ids]).reshape(len(ids), 3)
        pdots = np.array([dots[j] for j in ids]).reshape(len(ids), 3)
        vs = np.array([estimates[j].v_ir for j in ids])
        ws = np.array([estimates[j].omega_ir for j in ids])
        if exchange_noise is not None and len(ids) > 0:
            noise = exchange_noise[i]
            postures = postures + noise[: 3 * len(ids)].reshape(len(ids), 3)
            pdots = pdots + noise[3 * len(ids): 6 * len(ids)].reshape(len(ids), 3)
            vs = vs + noise[6 * len(ids): 7 * len(ids)]
            ws = ws + noise[7 * len(ids): 8 * len(ids)]
        leader_info = None
        if links[i] > 0:
            leader_info = LeaderInfo(
                posture=leader_posture,
                posture_dot=leader_dot,
                v=leader_state.v_r,
                omega=leader_state.omega_r,
            )
        snaps.append(
            NeighborSnapshot(
                neighbor_ids=ids,
                postures=postures,
                posture_dots=pdots,
                v_estimates=vs,
                omega_estimates=ws,
                leader=leader_info,
            )
        )
    return snaps


def run(config: ScenarioConfig) -> RunResult:
    """Execute the scenario; deterministic for a fixed (config, seed)."""
    errors = config.validate()
    if errors:
        raise ConfigValidationError(errors)

    n = config.n_robots
    n_ticks = config.n_ticks
    dt = config.dt
    adj = config.topology.adjacency
    gm = build_matrices(config.topology)
    gains = config.estimator_gains
    gains_list = [gains] * n

    # Counter-based per-(robot, channel) noise streams.
    def stream(robot: int, channel: int) -> np.random.Generator:
        return np.random.Generator(
            np.random.Philox(np.random.SeedSequence([config.seed, robot, channel]))
        )

    sigma = config.measurement_sigma
    if sigma > 0.0:
        meas_noise = np.stack(
            [
                np.stack([stream(i + 1, 0).standard_normal(n_ticks + 1),
                          stream(i + 1, 1).standard_normal(n_ticks + 1)])
                for i in range(n)
            ]
        ) * sigma
    else:
        meas_noise = np.zeros((n, 2, n_ticks + 1))
    exchange_streams = (
        [stream(i + 1, 2) for i in range(n)] if config.exchange_sigma > 0.0 else None
    )

    leader_state = leader_mod.initial_leader_state(config.path)
    robots, estimates = _initial_states(config, leader_state)

    q = np.diag(config.q_diag)
    r = np.diag(config.r_diag)
    healthy_model = filters.model_from_vehicle(
        config.vehicle, dt, q=q, r=r, boundary_cap_scale=config.boundary_cap_scale
    )
    faulted_model = (
        apply_fault(healthy_model, config.fault, config.fault.t_fault, config.vehicle, dt)
        if config.fault is not None
        else healthy_model
    )

    # Filter state starts from the t=0 measurement with covariance R.
    v_meas = [
        (robots[i].v + meas_noise[i, 0, 0], robots[i].omega + meas_noise[i, 1, 0])
        for i in range(n)
    ]
    filter_states = [
        FilterState(zeta=np.array(v_meas[i]), p=r.copy()) for i in range(n)
    ]
    v_filt = [
        (float(filter_states[i].zeta[0]), float(filter_states[i].zeta[1])) for i in range(n)
    ]

    shunt_kin = [ShuntingState() for _ in range(n)]
    shunt_lin = [ShuntingState() for _ in range(n)]
    shunt_ang = [ShuntingState() for _ in range(n)]
    st_states = [SuperTwistingState() for _ in range(n)]
    prev_cmds: list[VelocityCommand | None] = [None] * n

    time = np.arange(n_ticks) * dt
    leader_log = {name: np.empty(n_ticks) for name in ("x", "y", "theta", "v", "omega")}
    robot_log = {name: np.empty((n, n_ticks)) for name in ROBOT_FIELDS}
    ep_norm = np.empty(n_ticks)

    for k in range(n_ticks):
        t = float(time[k])
        if k > 0:
            leader_state = leader_mod.advance_leader(leader_state, config.path, t - dt, dt)
        leader_dot = np.array(leader_mod.posture_derivative(leader_state))

        leader_log["x"][k] = leader_state.x_r
        leader_log["y"][k] = leader_state.y_r
        leader_log["theta"][k] = leader_state.theta_r
        leader_log["v"][k] = leader_state.v_r
        leader_log["omega"][k] = leader_state.omega_r

        exchange_noise = None
        if exchange_streams is not None:
            exchange_noise = [
                exchange_streams[i].standard_normal(8 * int(adj[i].sum())) * config.exchange_sigma
                for i in range(n)
            ]

        prev_dots = [np.asarray(estimates[i].p_ir_dot) for i in range(n)]
        snaps = _build_snapshots(config, estimates, leader_state, leader_dot, prev_dots, exchange_noise)
        err_stack = np.array(
            [estimator.posture_error(snaps[i], estimates[i], adj[i]) for i in range(n)]
        )
        ep_norm[k] = float(np.linalg.norm(err_stack))
        if config.estimator_mode == "implicit":
            solved = estimator.solve_posture_derivatives(
                gm, config.topology.leader_links, err_stack, gains_list, leader_dot
            )
            snaps = _build_snapshots(
                config, estimates, leader_state, leader_dot,
                [solved[i] for i in range(n)], exchange_noise,
            )

        # The estimator phase integrates toward the next tick; controllers
        # below consume the tick-start states, which are time-aligned with
        # the robot poses (the closed loop is an exact fixed point when
        # everything starts converged).
        new_estimates = []
        for i in range(n):
            est = estimator.posture_step(
                estimates[i], snaps[i], gains, adj[i], dt, mode=config.estimator_mode
            )
            est = estimator.velocity_step(est, snaps[i], gains, adj[i], dt)
            new_estimates.append(est)

        for i in range(n):
            rb = robots[i]
            est = estimates[i]
            err = control.tracking_error(rb, est, config.robots[i].offset)

            # Commands and torques consume the shunting states at the tick
            # boundary (zero at t=0, hence no start-up jump); the steps
            # below advance them for the next tick.
            if config.kinematic_controller == "bioinspired":
                cmd = control.backstepping_bioinspired(
                    err, est, config.kinematic_gains, shunt_kin[i]
                )
                shunt_kin[i] = shunting_step(
                    shunt_kin[i], config.kinematic_shunting, err.x_hat, dt
                )
            else:
                cmd = control.backstepping_conventional(err, est, config.kinematic_gains)
            cmd_dot = control.command_derivative(prev_cmds[i], cmd, dt)
            cmd = replace(cmd, v_c_dot=cmd_dot[0], omega_c_dot=cmd_dot[1])
            prev_cmds[i] = cmd

            if config.use_true_velocities:
                fb = (rb.v, rb.omega)
            else:
                fb = v_filt[i]
            vel_err = (cmd.v_c - fb[0], cmd.omega_c - fb[1])

            try:
                if config.dynamic_controller == "bioinspired_smc":
                    tau = control.smc_bioinspired(
                        vel_err, cmd_dot, config.vehicle, config.dynamic_gains,
                        (shunt_lin[i], shunt_ang[i]),
                    )
                    shunt_lin[i] = shunting_step(
                        shunt_lin[i], config.dynamic_gains.linear_shunting, vel_err[0], dt
                    )
                    shunt_ang[i] = shunting_step(
                        shunt_ang[i], config.dynamic_gains.angular_shunting, vel_err[1], dt
                    )
                elif config.dynamic_controller == "conventional_smc":
                    tau = control.smc_conventional(
                        vel_err, cmd_dot, config.vehicle, config.dynamic_gains
                    )
                else:
                    tau, st_states[i] = control.smc_super_twisting(
                        vel_err, cmd_dot, config.vehicle, config.super_twisting, st_states[i], dt
                    )
            except ValueError as exc:
                raise SimulationAbort(
                    f"non-finite state at tick {k} (t={t:.3f}s), robot {i + 1}: {exc}"
                ) from exc

            robot_log["x"][i, k] = rb.x
            robot_log["y"][i, k] = rb.y
            robot_log["theta"][i, k] = rb.theta
            robot_log["v_true"][i, k] = rb.v
            robot_log["omega_true"][i, k] = rb.omega
            robot_log["est_x"][i, k] = est.p_ir[0]
            robot_log["est_y"][i, k] = est.p_ir[1]
            robot_log["est_theta"][i, k] = est.p_ir[2]
            robot_log["est_v"][i, k] = est.v_ir
            robot_log["est_omega"][i, k] = est.omega_ir
            robot_log["e_x"][i, k] = err.e_x
            robot_log["e_y"][i, k] = err.e_y
            robot_log["e_theta"][i, k] = err.e_theta
            robot_log["x_hat"][i, k] = err.x_hat
            robot_log["y_hat"][i, k] = err.y_hat
            robot_log["theta_hat"][i, k] = err.theta_hat
            robot_log["v_cmd"][i, k] = cmd.v_c
            robot_log["omega_cmd"][i, k] = cmd.omega_c
            robot_log["tau_l"][i, k] = tau.tau_left
            robot_log["tau_r"][i, k] = tau.tau_right
            robot_log["v_meas"][i, k] = v_meas[i][0]
            robot_log["omega_meas"][i, k] = v_meas[i][1]
            robot_log["v_filt"][i, k] = v_filt[i][0]
            robot_log["omega_filt"][i, k] = v_filt[i][1]

            d = vehicle_mod.sample_disturbance(config.disturbance, t)
            rb = vehicle_mod.dynamics_step(rb, tau, config.vehicle, d, dt)
            robots[i] = rb

            meas = (
                rb.v + meas_noise[i, 0, k + 1],
                rb.omega + meas_noise[i, 1, k + 1],
            )
            v_meas[i] = meas
            if config.filter_kind == "none":
                v_filt[i] = meas
            else:
                model = faulted_model if (
                    config.fault is not None and t >= config.fault.t_fault
                ) else healthy_model
                fs = filters.predict(filter_states[i], model, tau)
                if config.filter_kind == "kf":
                    fs, _ = filters.update_kf(fs, model, np.array(meas))
                elif config.filter_kind == "sif":
                    fs, _ = filters.update_sif(fs, model, np.array(meas), np.array(config.rho_fixed))
                else:
                    fs, _ = filters.update_asif(fs, model, np.array(meas))
                filter_states[i] = fs
                v_filt[i] = (float(fs.zeta[0]), float(fs.zeta[1]))

            finite = (
                math.isfinite(rb.x) and math.isfinite(rb.y) and math.isfinite(rb.theta)
                and math.isfinite(rb.v) and math.isfinite(rb.omega)
                and math.isfinite(v_filt[i][0]) and math.isfinite(v_filt[i][1])
                and math.isfinite(cmd.v_c) and math.isfinite(cmd.omega_c)
                and math.isfinite(tau.tau_left) and math.isfinite(tau.tau_right)
                and math.isfinite(new_estimates[i].v_ir)
                and math.isfinite(new_estimates[i].omega_ir)
                and bool(np.all(np.isfinite(new_estimates[i].p_ir)))
            )
            if not finite:
                raise SimulationAbort(f"non-finite state at tick {k} (t={t:.3f}s), robot {i + 1}")

        estimates = new_estimates

    result = RunResult(
        config=config, time=time, leader=leader_log, robots=robot_log, ep_norm=ep_norm
    )
    _check_command_bound(result)
    return result


def _check_command_bound(result: RunResult) -> None:
    """The bioinspired kinematic command is bounded by construction; verify
    it on every run as a guard against wiring mistakes."""
    cfg = result.config
    if cfg.kinematic_controller != "bioinspired":
        return
    bound = (
        cfg.kinematic_gains.c1 * cfg.kinematic_shunting.upper
        + float(np.max(np.abs(result.robots["est_v"])))
        + 1e-9
    )
    worst = float(np.max(np.abs(result.robots["v_cmd"])))
    if worst > bound:
        raise SimulationAbort(
            f"bioinspired command bound violated: |v_cmd|={worst:.6f} > {bound:.6f}"
        )


def write_csv(result: RunResult, path) -> None:
    """Write the engine log: one row per robot per tick, leader rows with
    robot_id 0 and the non-truth columns empty."""
    import csv

    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        n = result.n_robots
        for k in range(result.n_ticks):
            t = repr(float(result.time[k]))
            writer.writerow(
                [
                    t, 0,
                    repr(float(result.leader["x"][k])),
                    repr(float(result.leader["y"][k])),
                    repr(float(result.leader["theta"][k])),
                    repr(float(result.leader["v"][k])),
                    repr(float(result.leader["omega"][k])),
                ]
                + [""] * 14
            )
            for i in range(n):
                row = [t, i + 1]
                for name in (
                    "x", "y", "theta", "v_true", "omega_true",
                    "v_meas", "omega_meas", "v_filt", "omega_filt",
                    "v_cmd", "omega_cmd", "tau_l", "tau_r",
                    "e_x", "e_y", "e_theta", "x_hat", "y_hat", "theta_hat",
                ):
                    row.append(repr(float(result.robots[name][i, k])))
                writer.writerow(row)
