"""rcacpilot: deterministic quadcopter simulation with a retrospective-cost
adaptive cascaded autopilot, plus an experiment harness and figure tools."""

from .autopilot import (Autopilot, AutopilotStageError, MODE_ADAPTIVE,
                        MODE_FIXED, StockGains, euler_rates_to_body_rates,
                        force_yaw_to_attitude, mix)
from .dynamics import (NonFiniteStateError, PitchSingularityError, QuadParams,
                       RigidBodyState, Wrench, derivatives,
                       euler_to_rotation, motor_speeds_to_wrench, step,
                       wrap_angle)
from .harness import (ConfigError, RunMetrics, ScenarioConfig,
                      TELEMETRY_COLUMNS, compare_inertia, compute_metrics,
                      parse_config, read_telemetry, run_scenario, sweep)
from .mission import (Mission, MissionTracker, Waypoint,
                      default_square_mission, load_mission)
from .rcac import (ControllerKind, RcacController, RcacDivergenceError,
                   retrospective_cost)

__version__ = "0.1.0"

__all__ = [
    "Autopilot", "AutopilotStageError", "MODE_ADAPTIVE", "MODE_FIXED",
    "StockGains", "euler_rates_to_body_rates", "force_yaw_to_attitude", "mix",
    "NonFiniteStateError", "PitchSingularityError", "QuadParams",
    "RigidBodyState", "Wrench", "derivatives", "euler_to_rotation",
    "motor_speeds_to_wrench", "step", "wrap_angle",
    "ConfigError", "RunMetrics", "ScenarioConfig", "TELEMETRY_COLUMNS",
    "compare_inertia", "compute_metrics", "parse_config", "read_telemetry",
    "run_scenario", "sweep",
    "Mission", "MissionTracker", "Waypoint", "default_square_mission",
    "load_mission",
    "ControllerKind", "RcacController", "RcacDivergenceError",
    "retrospective_cost",
    "__version__",
]
