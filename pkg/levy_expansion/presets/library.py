"""
Preset problem library.

Provides ready-to-run problem instances for:
- FitzHugh-Nagumo (v, w) with cubic reaction on v
- A scalar cubic ODE on one node (oracle checks)
- A single-component Neumann reaction-diffusion equation with any odd-degree g
"""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from levy_expansion.core.data_structures import (
    Field,
    FieldLayout,
    MarkLawKind,
    OperatorBundle,
    PresetName,
    SpatialGrid,
)
from levy_expansion.core.exceptions import InvalidInputError
from levy_expansion.levy.noise import JumpEmbedding, JumpMeasureSpec, MarkLaw, QOperator
from levy_expansion.nonlinearity.polynomial import PolynomialMap
from levy_expansion.operators.linear import (
    Coefficient,
    assemble_fhn_operator,
    assemble_neumann_diffusion,
    assemble_scalar_operator,
    build_propagators,
    nodal_values,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Problem:
    """
    Everything a solver needs for one experiment, shared read-only by workers.

    Attributes:
        name: Preset the problem was built from
        layout: Field layout and inner product
        bundle: Propagators for the run step
        nonlinearity: F
        q: Covariance
        jump_spec: Jump measure of L
        u0: Initial state
    """

    name: PresetName
    layout: FieldLayout
    bundle: OperatorBundle
    nonlinearity: PolynomialMap
    q: QOperator
    jump_spec: JumpMeasureSpec
    u0: Field

    @property
    def omega(self) -> float:
        return self.bundle.omega_est

    @property
    def eta(self) -> float:
        return self.nonlinearity.eta

    @property
    def gap(self) -> float:
        """omega - eta; positive for a dissipative drift."""
        return self.omega - self.eta

    def __repr__(self) -> str:
        return (
            f"Problem({self.name.value}, size={self.layout.size}, "
            f"omega={self.omega:.4g}, eta={self.eta:.4g})"
        )


def _default_marks() -> MarkLaw:
    return MarkLaw(MarkLawKind.TWO_POINT, 1.0)


class PresetLibrary:
    """
    Library of preset problems.

    Each factory assembles the operator, builds the propagators for `dt` and
    attaches a jump measure, covariance and initial state.
    """

    @staticmethod
    def create_fhn(
        n_nodes: int = 32,
        dt: float = 1e-3,
        xi: float = 0.5,
        c: Coefficient = 1.0,
        p: Coefficient = 1.0,
        gamma: float = 1.0,
        alpha: float = 1.0,
        intensity: float = 5.0,
        mark_law: Optional[MarkLaw] = None,
        embedding: Optional[JumpEmbedding] = None,
        q_trace: float = 1.0,
        noise_components: Sequence[int] = (0,),
        u0: Optional[Field] = None,
        allow_zero_potential: bool = False,
    ) -> Problem:
        """
        FitzHugh-Nagumo system on [0, 1] with Neumann conditions.

        The inner product weights w by 1/gamma, which makes the coupling block
        skew and A dissipative with rate min p.

        Args:
            n_nodes: Grid nodes per component
            dt: Time step
            xi: Threshold in g(v) = -v(v - 1)(v - xi), in (0, 1)
            c: Diffusivity
            p: Potential
            gamma: Coupling constant
            alpha: Recovery rate
            intensity: Jump intensity lambda
            mark_law: Jump-size law (default two-point +-1)
            embedding: Jump directions (default unit-norm constant profile on v)
            q_trace: Tr Q, spread over `noise_components`
            noise_components: Components Q acts on
            u0: Initial state (default v = 0.6, w = 0)
            allow_zero_potential: Accept p = 0

        Returns:
            Problem
        """
        grid = SpatialGrid(n_nodes)
        layout = FieldLayout.on_grid(grid, (1.0, 1.0 / gamma))
        a_matrix = assemble_fhn_operator(grid, c, p, gamma, alpha, allow_zero_potential)
        bundle = build_propagators(a_matrix, dt, layout)
        nonlinearity = PolynomialMap.fhn(xi, components=2)

        if embedding is None:
            embedding = JumpEmbedding.fixed_profile(Field.constant(layout, (1.0, 0.0)))
        if u0 is None:
            u0 = Field.constant(layout, (0.6, 0.0))

        p_min = float(np.min(nodal_values(p, grid, "p")))
        if xi * xi - xi + 1.0 > 3.0 * p_min:
            logger.warning(
                "xi^2 - xi + 1 = %.4g exceeds 3 min p = %.4g; expansion estimates may not hold",
                xi * xi - xi + 1.0,
                3.0 * p_min,
            )

        return Problem(
            name=PresetName.FHN,
            layout=layout,
            bundle=bundle,
            nonlinearity=nonlinearity,
            q=QOperator.uniform(layout, q_trace, noise_components),
            jump_spec=JumpMeasureSpec(intensity, mark_law or _default_marks(), embedding),
            u0=u0,
        )

    @staticmethod
    def create_scalar(
        rate: float = 1.0,
        xi: float = 0.5,
        dt: float = 1e-3,
        intensity: float = 5.0,
        mark_law: Optional[MarkLaw] = None,
        q_scale: float = 1.0,
        u0: float = 0.0,
    ) -> Problem:
        """
        Scalar ODE du = (-rate u + g(u)) dt + sqrt(q) dL on one node.

        Args:
            rate: Linear decay rate (A = -rate)
            xi: Cubic threshold
            dt: Time step
            intensity: Jump intensity
            mark_law: Jump-size law
            q_scale: Q
            u0: Initial value

        Returns:
            Problem
        """
        layout = FieldLayout.scalar()
        bundle = build_propagators(assemble_scalar_operator(rate), dt, layout)
        return Problem(
            name=PresetName.SCALAR,
            layout=layout,
            bundle=bundle,
            nonlinearity=PolynomialMap.fhn(xi, components=1),
            q=QOperator(np.array([q_scale])),
            jump_spec=JumpMeasureSpec(
                intensity,
                mark_law or _default_marks(),
                JumpEmbedding.fixed_profile(Field.constant(layout, (1.0,))),
            ),
            u0=Field.constant(layout, (u0,)),
        )

    @staticmethod
    def create_reaction_diffusion(
        polynomial: Sequence[float],
        n_nodes: int = 32,
        dt: float = 1e-3,
        c: Coefficient = 1.0,
        p: Coefficient = 1.0,
        intensity: float = 5.0,
        mark_law: Optional[MarkLaw] = None,
        modes: int = 1,
        q_trace: float = 1.0,
        u0_value: float = 0.0,
    ) -> Problem:
        """
        du = [d/dx(c du/dx) - p u + g(u)] dt + sqrt(Q) dL with Neumann conditions.

        Args:
            polynomial: Ascending coefficients of g, odd degree, negative leading term
            n_nodes: Grid nodes
            dt: Time step
            c: Diffusivity
            p: Potential (>= 0)
            intensity: Jump intensity
            mark_law: Jump-size law
            modes: Jumps spread uniformly over cos(j pi x), j < modes
            q_trace: Tr Q
            u0_value: Constant initial value

        Returns:
            Problem
        """
        if modes < 1:
            raise InvalidInputError(f"modes must be >= 1, got {modes}")
        grid = SpatialGrid(n_nodes)
        layout = FieldLayout.on_grid(grid, (1.0,))
        p_nodes = nodal_values(p, grid, "p")
        if np.any(p_nodes < 0):
            raise InvalidInputError("Potential p must be non-negative")
        a_matrix = assemble_neumann_diffusion(grid, c) - np.diag(p_nodes)
        bundle = build_propagators(a_matrix, dt, layout)

        return Problem(
            name=PresetName.REACTION_DIFFUSION,
            layout=layout,
            bundle=bundle,
            nonlinearity=PolynomialMap((np.asarray(polynomial, dtype=float),)),
            q=QOperator.uniform(layout, q_trace),
            jump_spec=JumpMeasureSpec(
                intensity,
                mark_law or _default_marks(),
                JumpEmbedding.cosine_modes(layout, modes),
            ),
            u0=Field.constant(layout, (u0_value,)),
        )
