"""Scenario config files: YAML parsing, canonical serialization, stable
hashing, and dotted-path overrides.

The on-disk format is a single nested YAML document.  Serialization is
canonical (normalized shapes, sorted-key JSON for hashing) so that
parse -> dump round-trips are hash-stable regardless of key order in the
source file.
"""

from __future__ import annotations

import hashlib
import json
from typing import Any

import numpy as np
import yaml

from .control import DynamicGains, FormationOffset, KinematicGains, SuperTwistingGains
from .engine import FaultSchedule, RobotConfig, ScenarioConfig
from .estimator import EstimatorGains
from .leader import ReferencePath
from .shunting import ShuntingParams
from .topology import Topology, TopologyError
from .vehicle import DisturbanceModel, VehicleParams


class ConfigError(ValueError):
    """Parse/validation failure; message starts with the dotted field path."""


def _get(d: dict, key: str, default: Any, path: str) -> Any:
    if not isinstance(d, dict):
        raise ConfigError(f"{path}: expected a mapping")
    return d.get(key, default)


def _require(d: dict, key: str, path: str) -> Any:
    if not isinstance(d, dict) or key not in d:
        raise ConfigError(f"{path}.{key}: missing required field")
    return d[key]


def _shunting(d: dict, path: str) -> ShuntingParams:
    try:
        return ShuntingParams(
            decay=float(_get(d, "decay", 4.0, path)),
            upper=float(_get(d, "upper", 2.0, path)),
            lower=float(_get(d, "lower", 2.0, path)),
        )
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def _normalize_k(raw: Any) -> np.ndarray:
    if isinstance(raw, (int, float)):
        return float(raw) * np.eye(3)
    arr = np.array(raw, dtype=float)
    if arr.shape == (3,):
        return np.diag(arr)
    return arr


def config_from_dict(data: dict) -> ScenarioConfig:
    """Build a ScenarioConfig from a parsed YAML mapping, mapping every
    construction failure to a dotted-path ConfigError."""
    if not isinstance(data, dict):
        raise ConfigError("config: expected a mapping at top level")

    topo_raw = _require(data, "topology", "config")
    try:
        adjacency = np.array(_require(topo_raw, "adjacency", "topology"), dtype=float)
        leader_links = np.array(_require(topo_raw, "leader_links", "topology"), dtype=float)
        topology = Topology(n=len(leader_links), adjacency=adjacency, leader_links=leader_links)
    except TopologyError as exc:
        raise ConfigError(f"topology.adjacency: {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"topology: {exc}") from exc

    try:
        veh_raw = _get(data, "vehicle", {}, "config")
        vehicle = VehicleParams(
            mass=float(_get(veh_raw, "mass", 10.0, "vehicle")),
            inertia=float(_get(veh_raw, "inertia", 5.0, "vehicle")),
            wheel_radius=float(_get(veh_raw, "wheel_radius", 0.1, "vehicle")),
            half_axle=float(_get(veh_raw, "half_axle", 0.25, "vehicle")),
        )
    except ValueError as exc:
        raise ConfigError(f"vehicle: {exc}") from exc

    robots_raw = _require(data, "robots", "config")
    robots = []
    for idx, rr in enumerate(robots_raw):
        path = f"robots.{idx}"
        try:
            off = _require(rr, "offset", path)
            robots.append(
                RobotConfig(
                    offset=FormationOffset(dx=float(off[0]), dy=float(off[1])),
                    initial_driving_error=float(_get(rr, "initial_driving_error", 0.0, path)),
                    initial_lateral_error=float(_get(rr, "initial_lateral_error", 0.0, path)),
                    initial_heading_error=float(_get(rr, "initial_heading_error", 0.0, path)),
                )
            )
        except (TypeError, ValueError, IndexError) as exc:
            raise ConfigError(f"{path}: {exc}") from exc

    path_raw = _get(data, "path", {}, "config")
    try:
        waypoints = _get(path_raw, "waypoints", [], "path")
        ref_path = ReferencePath(
            kind=str(_get(path_raw, "kind", "paper_sine", "path")),
            ramp_tau=float(_get(path_raw, "ramp_tau", 0.5, "path")),
            ramp_enabled=bool(_get(path_raw, "ramp_enabled", True, "path")),
            speed=float(_get(path_raw, "speed", 1.0, "path")),
            heading=float(_get(path_raw, "heading", 0.0, "path")),
            radius=float(_get(path_raw, "radius", 2.0, "path")),
            waypoint_times=tuple(float(w[0]) for w in waypoints),
            waypoint_xs=tuple(float(w[1]) for w in waypoints),
            waypoint_ys=tuple(float(w[2]) for w in waypoints),
        )
    except ValueError as exc:
        raise ConfigError(f"path: {exc}") from exc

    est_raw = _get(data, "estimator", {}, "config")
    try:
        est_gains = EstimatorGains(
            k=_normalize_k(_get(est_raw, "k", 1.0, "estimator")),
            k_a1=float(_get(est_raw, "k_a1", 20.0, "estimator")),
            k_b1=float(_get(est_raw, "k_b1", 5.0, "estimator")),
            k_a2=float(_get(est_raw, "k_a2", 20.0, "estimator")),
            k_b2=float(_get(est_raw, "k_b2", 5.0, "estimator")),
        )
    except ValueError as exc:
        raise ConfigError(f"estimator.k: {exc}") from exc

    ctrl_raw = _get(data, "controllers", {}, "config")
    try:
        kin_gains = KinematicGains(
            c1=float(_get(_get(ctrl_raw, "gains", {}, "controllers"), "c1", 3.0, "controllers.gains")),
            c2=float(_get(_get(ctrl_raw, "gains", {}, "controllers"), "c2", 2.0, "controllers.gains")),
            c3=float(_get(_get(ctrl_raw, "gains", {}, "controllers"), "c3", 1.0, "controllers.gains")),
        )
    except ValueError as exc:
        raise ConfigError(f"controllers.gains: {exc}") from exc
    kin_shunt = _shunting(_get(ctrl_raw, "kinematic_shunting", {}, "controllers"), "controllers.kinematic_shunting")
    dg_raw = _get(ctrl_raw, "dynamic_gains", {}, "controllers")
    try:
        dyn_gains = DynamicGains(
            c_a=float(_get(dg_raw, "c_a", 3.0, "controllers.dynamic_gains")),
            c_b=float(_get(dg_raw, "c_b", 3.0, "controllers.dynamic_gains")),
            linear_shunting=_shunting(
                _get(dg_raw, "linear_shunting", {"decay": 4.0, "upper": 6.0, "lower": 6.0},
                     "controllers.dynamic_gains"),
                "controllers.dynamic_gains.linear_shunting",
            ),
            angular_shunting=_shunting(
                _get(dg_raw, "angular_shunting", {"decay": 4.0, "upper": 6.0, "lower": 6.0},
                     "controllers.dynamic_gains"),
                "controllers.dynamic_gains.angular_shunting",
            ),
        )
    except ValueError as exc:
        raise ConfigError(f"controllers.dynamic_gains: {exc}") from exc
    st_raw = _get(ctrl_raw, "super_twisting", {}, "controllers")
    try:
        st_gains = SuperTwistingGains(
            k1=float(_get(st_raw, "k1", 2.0, "controllers.super_twisting")),
            k2=float(_get(st_raw, "k2", 1.0, "controllers.super_twisting")),
        )
    except ValueError as exc:
        raise ConfigError(f"controllers.super_twisting: {exc}") from exc

    filt_raw = _get(data, "filter", {}, "config")
    fault_raw = _get(data, "fault", None, "config")
    fault = None
    if fault_raw is not None:
        try:
            fault = FaultSchedule(
                t_fault=float(_require(fault_raw, "t_fault", "fault")),
                mass_scale=float(_get(fault_raw, "mass_scale", 0.01, "fault")),
                inertia_scale=float(_get(fault_raw, "inertia_scale", 0.1, "fault")),
            )
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"fault: {exc}") from exc

    noise_raw = _get(data, "noise", {}, "config")
    dist_raw = _get(data, "disturbance", {}, "config")
    try:
        disturbance = DisturbanceModel(
            bound_linear=float(_get(dist_raw, "bound_linear", 0.0, "disturbance")),
            bound_angular=float(_get(dist_raw, "bound_angular", 0.0, "disturbance")),
            waveform=str(_get(dist_raw, "waveform", "zero", "disturbance")),
            amplitude=float(_get(dist_raw, "amplitude", 0.0, "disturbance")),
            frequency=float(_get(dist_raw, "frequency", 1.0, "disturbance")),
            phase=float(_get(dist_raw, "phase", 0.0, "disturbance")),
        )
    except ValueError as exc:
        raise ConfigError(f"disturbance: {exc}") from exc

    thresholds = _get(data, "error_thresholds", [0.05, 0.05, 0.05], "config")

    try:
        return ScenarioConfig(
            name=str(_get(data, "name", "scenario", "config")),
            dt=float(_get(data, "dt", 0.01, "config")),
            t_end=float(_get(data, "t_end", 30.0, "config")),
            seed=int(_get(data, "seed", 20230527, "config")),
            topology=topology,
            vehicle=vehicle,
            robots=tuple(robots),
            path=ref_path,
            estimator_gains=est_gains,
            estimator_mode=str(_get(est_raw, "mode", "delayed", "estimator")),
            estimator_init=str(_get(est_raw, "init", "leader", "estimator")),
            kinematic_controller=str(_get(ctrl_raw, "kinematic", "bioinspired", "controllers")),
            kinematic_gains=kin_gains,
            kinematic_shunting=kin_shunt,
            dynamic_controller=str(_get(ctrl_raw, "dynamic", "bioinspired_smc", "controllers")),
            dynamic_gains=dyn_gains,
            super_twisting=st_gains,
            filter_kind=str(_get(filt_raw, "kind", "asif", "filter")),
            q_diag=tuple(float(v) for v in _get(filt_raw, "q_diag", [1e-4, 1e-4], "filter")),
            r_diag=tuple(float(v) for v in _get(filt_raw, "r_diag", [1e-4, 1e-4], "filter")),
            rho_fixed=tuple(float(v) for v in _get(filt_raw, "rho_fixed", [0.05, 0.05], "filter")),
            boundary_cap_scale=float(_get(filt_raw, "boundary_cap_scale", 15.0, "filter")),
            fault=fault,
            measurement_sigma=float(_get(noise_raw, "measurement_sigma", 0.01, "noise")),
            exchange_sigma=float(_get(noise_raw, "exchange_sigma", 0.0, "noise")),
            disturbance=disturbance,
            use_true_velocities=bool(_get(ctrl_raw, "use_true_velocities", False, "controllers")),
            initial_robot_velocities=str(_get(data, "initial_robot_velocities", "zero", "config")),
            error_thresholds=tuple(float(v) for v in thresholds),
        )
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"config: {exc}") from exc


def config_to_dict(cfg: ScenarioConfig) -> dict:
    """Canonical plain-dict form; round-trips through config_from_dict."""
    d: dict[str, Any] = {
        "name": cfg.name,
        "dt": cfg.dt,
        "t_end": cfg.t_end,
        "seed": cfg.seed,
        "topology": {
            "adjacency": [[int(v) for v in row] for row in cfg.topology.adjacency],
            "leader_links": [int(v) for v in cfg.topology.leader_links],
        },
        "vehicle": {
            "mass": cfg.vehicle.mass,
            "inertia": cfg.vehicle.inertia,
            "wheel_radius": cfg.vehicle.wheel_radius,
            "half_axle": cfg.vehicle.half_axle,
        },
        "robots": [
            {
                "offset": [rc.offset.dx, rc.offset.dy],
                "initial_driving_error": rc.initial_driving_error,
                "initial_lateral_error": rc.initial_lateral_error,
                "initial_heading_error": rc.initial_heading_error,
            }
            for rc in cfg.robots
        ],
        "path": {
            "kind": cfg.path.kind,
            "ramp_tau": cfg.path.ramp_tau,
            "ramp_enabled": cfg.path.ramp_enabled,
            "speed": cfg.path.speed,
            "heading": cfg.path.heading,
            "radius": cfg.path.radius,
            "waypoints": [
                [t, x, y]
                for t, x, y in zip(cfg.path.waypoint_times, cfg.path.waypoint_xs, cfg.path.waypoint_ys)
            ],
        },
        "estimator": {
            "k": [[float(v) for v in row] for row in cfg.estimator_gains.k],
            "k_a1": cfg.estimator_gains.k_a1,
            "k_b1": cfg.estimator_gains.k_b1,
            "k_a2": cfg.estimator_gains.k_a2,
            "k_b2": cfg.estimator_gains.k_b2,
            "mode": cfg.estimator_mode,
            "init": cfg.estimator_init,
        },
        "controllers": {
            "kinematic": cfg.kinematic_controller,
            "dynamic": cfg.dynamic_controller,
            "gains": {
                "c1": cfg.kinematic_gains.c1,
                "c2": cfg.kinematic_gains.c2,
                "c3": cfg.kinematic_gains.c3,
            },
            "kinematic_shunting": {
                "decay": cfg.kinematic_shunting.decay,
                "upper": cfg.kinematic_shunting.upper,
                "lower": cfg.kinematic_shunting.lower,
            },
            "dynamic_gains": {
                "c_a": cfg.dynamic_gains.c_a,
                "c_b": cfg.dynamic_gains.c_b,
                "linear_shunting": {
                    "decay": cfg.dynamic_gains.linear_shunting.decay,
                    "upper": cfg.dynamic_gains.linear_shunting.upper,
                    "lower": cfg.dynamic_gains.linear_shunting.lower,
                },
                "angular_shunting": {
                    "decay": cfg.dynamic_gains.angular_shunting.decay,
                    "upper": cfg.dynamic_gains.angular_shunting.upper,
                    "lower": cfg.dynamic_gains.angular_shunting.lower,
                },
            },
            "super_twisting": {"k1": cfg.super_twisting.k1, "k2": cfg.super_twisting.k2},
            "use_true_velocities": cfg.use_true_velocities,
        },
        "filter": {
            "kind": cfg.filter_kind,
            "q_diag": list(cfg.q_diag),
            "r_diag": list(cfg.r_diag),
            "rho_fixed": list(cfg.rho_fixed),
            "boundary_cap_scale": cfg.boundary_cap_scale,
        },
        "fault": (
            None
            if cfg.fault is None
            else {
                "t_fault": cfg.fault.t_fault,
                "mass_scale": cfg.fault.mass_scale,
                "inertia_scale": cfg.fault.inertia_scale,
            }
        ),
        "noise": {
            "measurement_sigma": cfg.measurement_sigma,
            "exchange_sigma": cfg.exchange_sigma,
        },
        "disturbance": {
            "waveform": cfg.disturbance.waveform,
            "bound_linear": cfg.disturbance.bound_linear,
            "bound_angular": cfg.disturbance.bound_angular,
            "amplitude": cfg.disturbance.amplitude,
            "frequency": cfg.disturbance.frequency,
            "phase": cfg.disturbance.phase,
        },
        "initial_robot_velocities": cfg.initial_robot_velocities,
        "error_thresholds": list(cfg.error_thresholds),
    }
    return d


def config_hash(cfg: ScenarioConfig) -> str:
    """SHA-256 of the canonical JSON form; stable under key reordering of
    the source file."""
    canon = json.dumps(config_to_dict(cfg), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()


def load_config(path) -> ScenarioConfig:
    with open(path) as fh:
        data = yaml.safe_load(fh)
    return config_from_dict(data)


def save_config(cfg: ScenarioConfig, path) -> None:
    with open(path, "w") as fh:
        yaml.safe_dump(config_to_dict(cfg), fh, sort_keys=False, default_flow_style=None)


def apply_overrides(data: dict, overrides: list[str]) -> dict:
    """Apply dotted-path overrides like filter.kind=kf or
    robots.3.initial_driving_error=5 to a raw config mapping.  Values are
    parsed as YAML scalars; the path must already exist (except the final
    key, which may be new inside an existing mapping)."""
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r}: expected dotted.path=value")
        dotted, raw_value = item.split("=", 1)
        keys = dotted.split(".")
        node: Any = data
        for key in keys[:-1]:
            if isinstance(node, list):
                try:
                    node = node[int(key)]
                except (ValueError, IndexError) as exc:
                    raise ConfigError(f"override {dotted}: bad list index {key!r}") from exc
            elif isinstance(node, dict):
                if key not in node:
                    node[key] = {}
                node = node[key]
            else:
                raise ConfigError(f"override {dotted}: {key!r} is not a container")
        value = yaml.safe_load(raw_value)
        last = keys[-1]
        if isinstance(node, list):
            try:
                node[int(last)] = value
            except (ValueError, IndexError) as exc:
                raise ConfigError(f"override {dotted}: bad list index {last!r}") from exc
        elif isinstance(node, dict):
            node[last] = value
        else:
            raise ConfigError(f"override {dotted}: cannot set on a scalar")
    return data
