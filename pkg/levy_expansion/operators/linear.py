"""
Linear part of the evolution equation.

This module implements:
- Conservative finite-difference assembly of d/dx(c d/dx) with Neumann ghost points
- The FitzHugh-Nagumo block generator [[A0 - p, -I], [gamma I, -alpha I]]
- One-step propagators E = exp(dt A) and P1 = int_0^dt exp(s A) ds
- The dissipativity rate omega in a weighted inner product
- Repeated application of the semigroup
"""

import logging
from typing import Callable, Union

import numpy as np
import scipy.linalg

from levy_expansion.core.data_structures import (
    Field,
    FieldLayout,
    OperatorBundle,
    SpatialGrid,
)
from levy_expansion.core.exceptions import DimensionMismatchError, InvalidInputError

logger = logging.getLogger(__name__)

Coefficient = Union[float, np.ndarray, Callable[[np.ndarray], np.ndarray]]
Weights = Union[None, np.ndarray, FieldLayout]


def nodal_values(coefficient: Coefficient, grid: SpatialGrid, name: str) -> np.ndarray:
    """Evaluate a constant, table or function at the grid nodes."""
    if callable(coefficient):
        values = np.asarray(coefficient(grid.nodes), dtype=float)
    else:
        values = np.asarray(coefficient, dtype=float)
    values = np.broadcast_to(values, (grid.n_nodes,)).astype(float)
    if not np.all(np.isfinite(values)):
        raise InvalidInputError(f"{name} has non-finite values at grid nodes")
    return values


def assemble_neumann_diffusion(grid: SpatialGrid, c: Coefficient) -> np.ndarray:
    """
    Assemble A0 = d/dx(c d/dx) with homogeneous Neumann conditions.

    Interface coefficients are c_{i+1/2} = (c_i + c_{i+1})/2. Boundary rows use a
    mirrored ghost node, giving [-2c, 2c]/h^2. Rows sum to zero (flux form), so
    constants are in the kernel.

    Args:
        grid: Spatial grid
        c: Diffusivity (constant, nodal table or function of x), strictly positive

    Returns:
        Dense (n_nodes, n_nodes) matrix
    """
    c_nodes = nodal_values(c, grid, "c")
    if np.any(c_nodes <= 0):
        raise InvalidInputError("Diffusivity c must be strictly positive at every node")

    n = grid.n_nodes
    inv_h2 = float((n - 1) ** 2)
    c_half = 0.5 * (c_nodes[:-1] + c_nodes[1:]) * inv_h2

    lower = np.zeros(n - 1)
    upper = np.zeros(n - 1)
    upper[:] = c_half
    lower[:] = c_half
    upper[0] = 2.0 * c_half[0]
    lower[-1] = 2.0 * c_half[-1]

    matrix = np.diag(upper, 1) + np.diag(lower, -1)
    matrix -= np.diag(matrix.sum(axis=1))
    return matrix


def assemble_fhn_operator(
    grid: SpatialGrid,
    c: Coefficient,
    p: Coefficient,
    gamma: float,
    alpha: float,
    allow_zero_potential: bool = False,
) -> np.ndarray:
    """
    Assemble the FitzHugh-Nagumo generator on (v, w).

    The w-row follows dw/dt = gamma v - alpha w.

    Args:
        grid: Spatial grid
        c: Diffusivity, strictly positive
        p: Potential, strictly positive (zero allowed with allow_zero_potential)
        gamma: Coupling constant, positive
        alpha: Recovery rate, positive
        allow_zero_potential: Accept p = 0 at nodes (Neumann-kernel test cases)

    Returns:
        Dense (2n, 2n) matrix [[A0 - diag(p), -I], [gamma I, -alpha I]]
    """
    if gamma <= 0 or alpha <= 0:
        raise InvalidInputError(f"gamma and alpha must be positive, got {gamma}, {alpha}")

    p_nodes = nodal_values(p, grid, "p")
    if np.any(p_nodes < 0) or (not allow_zero_potential and np.any(p_nodes <= 0)):
        raise InvalidInputError("Potential p must be strictly positive at every node")

    a0 = assemble_neumann_diffusion(grid, c)
    identity = np.eye(grid.n_nodes)
    return np.block(
        [
            [a0 - np.diag(p_nodes), -identity],
            [gamma * identity, -alpha * identity],
        ]
    )


def assemble_scalar_operator(rate: float) -> np.ndarray:
    """1x1 generator [[-rate]]."""
    if not np.isfinite(rate):
        raise InvalidInputError("rate must be finite")
    return np.array([[-float(rate)]])


def _entry_weights(weights: Weights, size: int) -> np.ndarray:
    if weights is None:
        return np.ones(size)
    if isinstance(weights, FieldLayout):
        weights = weights.entry_weights
    weights = np.asarray(weights, dtype=float)
    if weights.shape != (size,):
        raise DimensionMismatchError(f"{weights.shape[0]} weights for a {size}x{size} matrix")
    if np.any(weights <= 0):
        raise InvalidInputError("weights must be strictly positive")
    return weights


def _check_square(a_matrix: np.ndarray) -> np.ndarray:
    a_matrix = np.asarray(a_matrix, dtype=float)
    if a_matrix.ndim != 2 or a_matrix.shape[0] != a_matrix.shape[1]:
        raise DimensionMismatchError(f"Generator must be square, got shape {a_matrix.shape}")
    if not np.all(np.isfinite(a_matrix)):
        raise InvalidInputError("Generator has non-finite entries")
    return a_matrix


def dissipativity_rate(a_matrix: np.ndarray, weights: Weights = None) -> float:
    """
    Dissipativity rate omega of A in the weighted inner product.

    With D = diag(weights), A~ = D^{1/2} A D^{-1/2}; omega is minus the largest
    eigenvalue of (A~ + A~^T)/2, so <Ax, x>_w <= -omega |x|_w^2.

    Args:
        a_matrix: Square generator
        weights: Per-entry weights, a FieldLayout, or None for the Euclidean product

    Returns:
        omega; values <= 0 are logged as "not strictly dissipative"
    """
    a_matrix = _check_square(a_matrix)
    root = np.sqrt(_entry_weights(weights, a_matrix.shape[0]))
    a_tilde = root[:, None] * a_matrix / root[None, :]
    symmetric = 0.5 * (a_tilde + a_tilde.T)
    omega = -float(scipy.linalg.eigvalsh(symmetric)[-1])
    if omega <= 0:
        logger.warning("Generator is not strictly dissipative (omega = %.3e)", omega)
    return omega


def build_propagators(a_matrix: np.ndarray, dt: float, weights: Weights = None) -> OperatorBundle:
    """
    Precompute E = exp(dt A) and P1 = int_0^dt exp(s A) ds.

    Both come from scaling-and-squaring; P1 is the top-right block of the
    exponential of dt [[A, I], [0, 0]], so A is never inverted.

    Args:
        a_matrix: Square generator
        dt: Positive time step
        weights: Inner-product weights used for omega_est

    Returns:
        Immutable OperatorBundle
    """
    a_matrix = _check_square(a_matrix)
    if not dt > 0:
        raise InvalidInputError(f"dt must be positive, got {dt}")

    size = a_matrix.shape[0]
    entry_weights = _entry_weights(weights, size)

    augmented = np.zeros((2 * size, 2 * size))
    augmented[:size, :size] = a_matrix
    augmented[:size, size:] = np.eye(size)
    block = scipy.linalg.expm(dt * augmented)

    e_step = scipy.linalg.expm(dt * a_matrix)
    p1_step = block[:size, size:].copy()

    omega = dissipativity_rate(a_matrix, entry_weights)
    for matrix in (e_step, p1_step):
        matrix.flags.writeable = False

    logger.debug("Built propagators: size=%d dt=%g omega=%.4g", size, dt, omega)
    return OperatorBundle(
        a_matrix=a_matrix,
        dt=float(dt),
        e_step=e_step,
        p1_step=p1_step,
        omega_est=max(omega, 0.0),
        weights=entry_weights,
    )


def apply_semigroup(bundle: OperatorBundle, x: Field, steps: int) -> Field:
    """
    Apply E `steps` times to x, i.e. S(steps * dt) x.

    Args:
        bundle: Propagators
        x: Initial field
        steps: Non-negative step count

    Returns:
        Propagated field
    """
    if steps < 0:
        raise InvalidInputError(f"steps must be non-negative, got {steps}")
    if x.layout.size != bundle.size:
        raise DimensionMismatchError(f"Field of size {x.layout.size} vs operator of size {bundle.size}")

    values = x.values
    for _ in range(steps):
        values = bundle.e_step @ values
    return Field(x.layout, values)
