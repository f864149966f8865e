"""Mild-solution time steppers."""

from levy_expansion.solvers.mild import (
    BlowUpGuard,
    linearized_recursion,
    noise_injections,
    solve_deterministic,
    solve_sde,
    solve_shifted,
    stochastic_convolution,
)

__all__ = [
    "BlowUpGuard",
    "linearized_recursion",
    "noise_injections",
    "solve_deterministic",
    "solve_sde",
    "solve_shifted",
    "stochastic_convolution",
]
