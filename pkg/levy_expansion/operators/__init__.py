"""Linear operators, propagators and dissipativity rates."""

from levy_expansion.operators.linear import (
    apply_semigroup,
    assemble_fhn_operator,
    assemble_neumann_diffusion,
    assemble_scalar_operator,
    build_propagators,
    dissipativity_rate,
    nodal_values,
)

__all__ = [
    "apply_semigroup",
    "assemble_fhn_operator",
    "assemble_neumann_diffusion",
    "assemble_scalar_operator",
    "build_propagators",
    "dissipativity_rate",
    "nodal_values",
]
