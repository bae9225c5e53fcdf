"""Run metrics: filter accuracy, command peaks, torque smoothness, and
formation settling, summarized into a JSON-serializable report."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .engine import RunResult

CHANNELS = {"linear": ("v_filt", "v_true"), "angular": ("omega_filt", "omega_true")}
ERROR_AXES = {"x": "e_x", "y": "e_y", "theta": "e_theta"}


def _window_mask(result: RunResult, window: tuple[float, float] | None) -> np.ndarray:
    if window is None:
        return np.ones(result.n_ticks, dtype=bool)
    t0, t1 = window
    if t0 < 0.0 or t1 > result.config.t_end or t1 < t0:
        raise ValueError(f"window {window} outside [0, {result.config.t_end}]")
    mask = (result.time >= t0) & (result.time <= t1)
    if not mask.any():
        raise ValueError(f"window {window} selects no ticks")
    return mask


def rmse(
    result: RunResult, robot: int, channel: str, window: tuple[float, float] | None = None
) -> float:
    """Root-mean-square filtered-vs-true velocity error for one follower."""
    filt_name, true_name = CHANNELS[channel]
    mask = _window_mask(result, window)
    diff = result.robots[filt_name][robot - 1, mask] - result.robots[true_name][robot - 1, mask]
    return float(np.sqrt(np.mean(diff * diff)))


def total_variation(result: RunResult, robot: int, signal: str) -> float:
    """Sum of absolute per-tick changes of one logged signal (the
    chattering measure for torques)."""
    series = result.robots[signal][robot - 1]
    if len(series) < 2:
        raise ValueError("total variation needs at least 2 ticks")
    return float(np.sum(np.abs(np.diff(series))))


def max_abs(result: RunResult, robot: int, signal: str) -> float:
    return float(np.max(np.abs(result.robots[signal][robot - 1])))


def settling_time(result: RunResult, robot: int, axis: str, threshold: float) -> float | None:
    """First time from which |error| stays below threshold through the end
    of the run; None when it never settles."""
    series = np.abs(result.robots[ERROR_AXES[axis]][robot - 1])
    above = np.nonzero(series >= threshold)[0]
    if len(above) == 0:
        return float(result.time[0])
    last = int(above[-1])
    if last == result.n_ticks - 1:
        return None
    return float(result.time[last + 1])


def estimator_decay_rate(result: RunResult, t_max: float = 5.0) -> float | None:
    """Log-linear decay rate of the stacked posture-error norm over the
    initial transient; None when there is no transient to fit."""
    norm = result.ep_norm
    if norm[0] < 1e-9:
        return None
    mask = (result.time <= t_max) & (norm > max(1e-10, norm[0] * 1e-8))
    if mask.sum() < 10:
        return None
    slope = np.polyfit(result.time[mask], np.log(norm[mask]), 1)[0]
    return float(-slope)


@dataclass(frozen=True)
class MetricsReport:
    """Per-robot metrics plus run-level estimator diagnostics."""

    scenario: str
    seed: int
    dt: float
    t_end: float
    per_robot: dict[str, dict]
    estimator_decay_rate: float | None
    fault_window: tuple[float, float] | None

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "seed": self.seed,
            "dt": self.dt,
            "t_end": self.t_end,
            "per_robot": self.per_robot,
            "estimator_decay_rate": self.estimator_decay_rate,
            "fault_window": list(self.fault_window) if self.fault_window else None,
        }


def build_report(result: RunResult) -> MetricsReport:
    cfg = result.config
    fault_window = None
    if cfg.fault is not None and cfg.fault.t_fault < cfg.t_end:
        fault_window = (cfg.fault.t_fault, cfg.t_end)
    thr_x, thr_y, thr_theta = cfg.error_thresholds
    per_robot: dict[str, dict] = {}
    for robot in range(1, cfg.n_robots + 1):
        entry = {
            "rmse_linear": rmse(result, robot, "linear"),
            "rmse_angular": rmse(result, robot, "angular"),
            "max_abs_v_cmd": max_abs(result, robot, "v_cmd"),
            "tau_l_total_variation": total_variation(result, robot, "tau_l"),
            "tau_r_total_variation": total_variation(result, robot, "tau_r"),
            "settling_time_x": settling_time(result, robot, "x", thr_x),
            "settling_time_y": settling_time(result, robot, "y", thr_y),
            "settling_time_theta": settling_time(result, robot, "theta", thr_theta),
        }
        if fault_window is not None:
            entry["rmse_linear_fault_window"] = rmse(result, robot, "linear", fault_window)
            entry["rmse_angular_fault_window"] = rmse(result, robot, "angular", fault_window)
        per_robot[str(robot)] = entry
    return MetricsReport(
        scenario=cfg.name,
        seed=cfg.seed,
        dt=cfg.dt,
        t_end=cfg.t_end,
        per_robot=per_robot,
        estimator_decay_rate=estimator_decay_rate(result),
        fault_window=fault_window,
    )
