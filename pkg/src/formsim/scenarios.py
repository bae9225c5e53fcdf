"""Canned scenarios.

The default scenario is the benchmark setup this package reproduces:
four followers around a virtual leader on a sine reference path with a
soft-start ramp, square formation offsets, and nonzero initial driving
errors.  The exact communication edge set of the benchmark is not
published; the default here has the leader talking to the two near
followers and each far follower listening to both near ones (a 4-cycle),
which keeps the augmented-Laplacian spectrum well conditioned for the
published estimator gains.  A single-link chain variant ships as an
alternative; both choices are recorded in the README.

Variant builders derive comparison runs (controller and filter swaps,
believed-model fault, equilibrium sanity check) from the same base.
"""

from __future__ import annotations

from dataclasses import replace

import numpy as np

from .control import FormationOffset
from .engine import FaultSchedule, RobotConfig, ScenarioConfig
from .leader import ReferencePath
from .topology import Topology

DEFAULT_SEED = 20230527

DEFAULT_ADJACENCY = (
    (0, 0, 1, 1),
    (0, 0, 1, 1),
    (1, 1, 0, 0),
    (1, 1, 0, 0),
)
DEFAULT_LEADER_LINKS = (1, 1, 0, 0)

CHAIN_ADJACENCY = (
    (0, 1, 0, 0),
    (1, 0, 1, 0),
    (0, 1, 0, 1),
    (0, 0, 1, 0),
)
CHAIN_LEADER_LINKS = (1, 0, 0, 0)

DEFAULT_OFFSETS = ((4.0, -4.0), (4.0, 4.0), (7.0, -7.0), (7.0, 7.0))
DEFAULT_DRIVING_ERRORS = (-1.0, 2.0, 2.0, 5.0)


def default_topology() -> Topology:
    return Topology(
        n=4,
        adjacency=np.array(DEFAULT_ADJACENCY, dtype=float),
        leader_links=np.array(DEFAULT_LEADER_LINKS, dtype=float),
    )


def chain_topology() -> Topology:
    """Single-leader-link chain; weaker connectivity, kept as an alternative."""
    return Topology(
        n=4,
        adjacency=np.array(CHAIN_ADJACENCY, dtype=float),
        leader_links=np.array(CHAIN_LEADER_LINKS, dtype=float),
    )


def default_scenario(seed: int = DEFAULT_SEED) -> ScenarioConfig:
    robots = tuple(
        RobotConfig(offset=FormationOffset(dx, dy), initial_driving_error=err)
        for (dx, dy), err in zip(DEFAULT_OFFSETS, DEFAULT_DRIVING_ERRORS)
    )
    return ScenarioConfig(
        name="default",
        topology=default_topology(),
        robots=robots,
        seed=seed,
    )


def speed_jump_scenario(kinematic: str, seed: int = DEFAULT_SEED) -> ScenarioConfig:
    """Short run for the initial-command comparison between the kinematic
    controllers; everything else matches the default scenario."""
    return replace(
        default_scenario(seed),
        name=f"speed-jump-{kinematic}",
        kinematic_controller=kinematic,
        t_end=10.0,
    )


def chattering_scenario(dynamic: str, seed: int = DEFAULT_SEED) -> ScenarioConfig:
    """Torque-smoothness comparison under measurement noise."""
    return replace(
        default_scenario(seed),
        name=f"chattering-{dynamic}",
        dynamic_controller=dynamic,
        t_end=10.0,
    )


def filter_scenario(kind: str, fault: bool, seed: int = DEFAULT_SEED) -> ScenarioConfig:
    schedule = FaultSchedule(t_fault=10.0, mass_scale=0.01, inertia_scale=0.1) if fault else None
    suffix = "fault" if fault else "normal"
    return replace(
        default_scenario(seed),
        name=f"filter-{kind}-{suffix}",
        filter_kind=kind,
        fault=schedule,
    )


def equilibrium_scenario(seed: int = DEFAULT_SEED) -> ScenarioConfig:
    """Closed-loop fixed point: constant-speed line, no ramp, robots on
    station with matching velocities, no noise or disturbance.  Formation
    errors must stay at zero to round-off."""
    robots = tuple(
        RobotConfig(offset=FormationOffset(dx, dy)) for (dx, dy) in DEFAULT_OFFSETS
    )
    return ScenarioConfig(
        name="equilibrium",
        topology=default_topology(),
        robots=robots,
        seed=seed,
        t_end=10.0,
        path=ReferencePath(kind="line", ramp_enabled=False, speed=1.0),
        measurement_sigma=0.0,
        initial_robot_velocities="match_leader",
    )


NAMED_SCENARIOS = {
    "default": default_scenario,
    "equilibrium": equilibrium_scenario,
}
