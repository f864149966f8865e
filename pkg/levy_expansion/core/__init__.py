"""Core data structures and types for levy_expansion."""

from levy_expansion.core.data_structures import (
    EmbeddingKind,
    Field,
    FieldLayout,
    FieldLike,
    MarkLawKind,
    OperatorBundle,
    PresetName,
    Scheme,
    SpatialGrid,
    Trajectory,
    ValidationResult,
    values_of,
)
from levy_expansion.core.exceptions import (
    BlowUpError,
    CompositionRangeError,
    ConfigError,
    DimensionMismatchError,
    GridMismatchError,
    InvalidInputError,
    LevyExpansionError,
    OrderFitError,
    SamplerContractError,
)

__all__ = [
    "BlowUpError",
    "CompositionRangeError",
    "ConfigError",
    "DimensionMismatchError",
    "EmbeddingKind",
    "Field",
    "FieldLayout",
    "FieldLike",
    "GridMismatchError",
    "InvalidInputError",
    "LevyExpansionError",
    "MarkLawKind",
    "OperatorBundle",
    "OrderFitError",
    "PresetName",
    "SamplerContractError",
    "Scheme",
    "SpatialGrid",
    "Trajectory",
    "ValidationResult",
    "values_of",
]
