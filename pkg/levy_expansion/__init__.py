"""
Levy Expansion

Small-noise expansions of dissipative reaction-diffusion systems driven by
Levy noise: deterministic limit, expansion terms u_1..u_n, remainder order
studies and property checks.
"""

__version__ = "0.1.0"

from levy_expansion.core.data_structures import (
    Field,
    FieldLayout,
    OperatorBundle,
    SpatialGrid,
    Trajectory,
    ValidationResult,
)
from levy_expansion.core.exceptions import (
    BlowUpError,
    ConfigError,
    InvalidInputError,
    LevyExpansionError,
)

__all__ = [
    "Field",
    "FieldLayout",
    "OperatorBundle",
    "SpatialGrid",
    "Trajectory",
    "ValidationResult",
    "BlowUpError",
    "ConfigError",
    "InvalidInputError",
    "LevyExpansionError",
]
