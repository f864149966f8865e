"""Property validation for expansion problems."""

from levy_expansion.validation.validator import (
    CombinatoricsChecker,
    CouplingChecker,
    DecayChecker,
    DissipativityChecker,
    LevyMomentChecker,
    OracleChecker,
    PropertyValidator,
    TaylorChecker,
)

__all__ = [
    "CombinatoricsChecker",
    "CouplingChecker",
    "DecayChecker",
    "DissipativityChecker",
    "LevyMomentChecker",
    "OracleChecker",
    "PropertyValidator",
    "TaylorChecker",
]
