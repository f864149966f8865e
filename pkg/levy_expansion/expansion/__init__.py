"""Small-noise expansion hierarchy."""

from levy_expansion.expansion.hierarchy import (
    CompositionEntry,
    CompositionTable,
    ExpansionSet,
    enumerate_compositions,
    expand,
    phi_k_forcing,
    solve_u1,
    solve_uk,
)

__all__ = [
    "CompositionEntry",
    "CompositionTable",
    "ExpansionSet",
    "enumerate_compositions",
    "expand",
    "phi_k_forcing",
    "solve_u1",
    "solve_uk",
]
