"""Congestion-aware query scheduling for entities with uncertain positions."""

from .geometry import Configuration, InvalidRegimeError, dim_constants, x_separations
from .motion import Scenario, Trajectory, configuration_at, validate
from .uncertainty import PerceptionState, apply_query

__version__ = "0.1.0"

__all__ = [
    "Configuration",
    "InvalidRegimeError",
    "PerceptionState",
    "Scenario",
    "Trajectory",
    "apply_query",
    "configuration_at",
    "dim_constants",
    "validate",
    "x_separations",
]
