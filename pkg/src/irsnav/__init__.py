"""IRS-aware channel power gain maps and gain-constrained robot path planning."""
from .channel import (LosChannel, channel_context, expected_gain, los_components,
                      monte_carlo_gain, path_loss_los, path_loss_nlos)
from .config import load_scenario, scenario_from_dict, with_elements
from .errors import (ConfigError, DomainError, InfeasibleEndpointError,
                     InfeasibleLocationError, IrsNavError, NoPathError, OutOfRegionError,
                     ParseError, ShapeError, StaleMapWarning)
from .geometry import GridSpec, IrsLayout, ObstacleBox, Point3, Scenario, cell_center, cell_of
from .kernels import BACKEND
from .phases import PhaseConfig, achieved_gain, optimal_phases, quantize_phases
from .planner import PlannedPath, max_feasible_gamma, plan, shortest_path, validate_path
from .radiomap import FeasibleMap, RadioMap, build_map, feasible_map, import_map, export_map

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "ConfigError", "DomainError", "FeasibleMap", "GridSpec",
    "InfeasibleEndpointError", "InfeasibleLocationError", "IrsLayout", "IrsNavError",
    "LosChannel", "NoPathError", "ObstacleBox", "OutOfRegionError", "ParseError",
    "PhaseConfig", "PlannedPath", "Point3", "RadioMap", "Scenario", "ShapeError",
    "StaleMapWarning", "achieved_gain", "build_map", "cell_center", "cell_of",
    "channel_context", "expected_gain", "export_map", "feasible_map", "import_map",
    "load_scenario", "los_components", "max_feasible_gamma", "monte_carlo_gain",
    "optimal_phases", "path_loss_los", "path_loss_nlos", "plan", "quantize_phases",
    "scenario_from_dict", "shortest_path", "validate_path", "with_elements",
]
