"""formsim: deterministic leader-follower formation control simulation.

Distributed leader-state estimation over a communication graph, shunting
neural dynamics, backstepping and sliding-mode controllers (conventional
and bioinspired variants), and Kalman / sliding-innovation velocity
filters, orchestrated by a fixed-step engine with seeded noise injection.
"""

__version__ = "0.1.0"

from .control import (
    DynamicGains,
    FormationOffset,
    KinematicGains,
    SuperTwistingGains,
    TrackingError,
    VelocityCommand,
)
from .engine import (
    ConfigValidationError,
    FaultSchedule,
    RobotConfig,
    RunResult,
    ScenarioConfig,
    SimulationAbort,
    TickRecord,
    run,
    write_csv,
)
from .estimator import EstimatorGains, EstimatorState, NeighborSnapshot
from .filters import FilterModel, FilterState, InnovationRecord
from .leader import LeaderState, ReferencePath
from .shunting import ShuntingParams, ShuntingState
from .topology import GraphMatrices, Topology
from .vehicle import DisturbanceModel, RobotState, TorquePair, VehicleParams

__all__ = [
    "__version__",
    "ConfigValidationError",
    "DisturbanceModel",
    "DynamicGains",
    "EstimatorGains",
    "EstimatorState",
    "FaultSchedule",
    "FilterModel",
    "FilterState",
    "FormationOffset",
    "GraphMatrices",
    "InnovationRecord",
    "KinematicGains",
    "LeaderState",
    "NeighborSnapshot",
    "ReferencePath",
    "RobotConfig",
    "RobotState",
    "RunResult",
    "ScenarioConfig",
    "ShuntingParams",
    "ShuntingState",
    "SimulationAbort",
    "SuperTwistingGains",
    "TickRecord",
    "Topology",
    "TorquePair",
    "TrackingError",
    "VehicleParams",
    "VelocityCommand",
    "run",
    "write_csv",
]
