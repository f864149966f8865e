"""Tests for the linear operator assembly and propagators."""

import numpy as np
import pytest
import scipy.integrate
import scipy.linalg

from levy_expansion.core.data_structures import Field, FieldLayout, SpatialGrid
from levy_expansion.core.exceptions import DimensionMismatchError, InvalidInputError
from levy_expansion.operators.linear import (
    apply_semigroup,
    assemble_fhn_operator,
    assemble_neumann_diffusion,
    assemble_scalar_operator,
    build_propagators,
    dissipativity_rate,
    nodal_values,
)


class TestNeumannDiffusion:
    """Test the conservative Neumann stencil."""

    def test_three_node_stencil(self):
        """Test the assembled matrix on the smallest grid."""
        matrix = assemble_neumann_diffusion(SpatialGrid(3), 1.0)
        np.testing.assert_allclose(matrix, [[-8, 8, 0], [4, -8, 4], [0, 8, -8]])

    def test_constants_in_kernel(self):
        """Test that rows sum to zero."""
        matrix = assemble_neumann_diffusion(SpatialGrid(16), lambda x: 1.0 + x**2)
        np.testing.assert_allclose(matrix @ np.ones(16), 0.0, atol=1e-9)

    def test_self_adjoint_in_trapezoid_product(self):
        """Test that W A is symmetric for the trapezoid weights W."""
        grid = SpatialGrid(12)
        matrix = assemble_neumann_diffusion(grid, np.linspace(1.0, 2.0, 12))
        weighted = np.diag(grid.trapezoid_weights()) @ matrix
        np.testing.assert_allclose(weighted, weighted.T, atol=1e-10)

    def test_non_positive_diffusivity(self):
        """Test that c must be strictly positive."""
        with pytest.raises(InvalidInputError):
            assemble_neumann_diffusion(SpatialGrid(5), np.array([1, 1, 0, 1, 1.0]))

    def test_nodal_values_shapes(self):
        """Test constant, table and callable coefficients."""
        grid = SpatialGrid(4)
        np.testing.assert_array_equal(nodal_values(2.0, grid, "c"), np.full(4, 2.0))
        np.testing.assert_allclose(nodal_values(lambda x: x, grid, "c"), grid.nodes)
        with pytest.raises(InvalidInputError):
            nodal_values(np.array([1.0, np.inf, 1.0, 1.0]), grid, "c")


class TestFhnOperator:
    """Test the FitzHugh-Nagumo block generator."""

    def test_block_structure(self):
        """Test the coupling and recovery blocks."""
        grid = SpatialGrid(4)
        matrix = assemble_fhn_operator(grid, 1.0, 1.0, gamma=2.0, alpha=1.5)
        np.testing.assert_allclose(matrix[:4, 4:], -np.eye(4))
        np.testing.assert_allclose(matrix[4:, :4], 2.0 * np.eye(4))
        np.testing.assert_allclose(matrix[4:, 4:], -1.5 * np.eye(4))

    def test_weighted_rate_is_min_of_p_and_alpha(self):
        """Test omega in the product weighted by 1/gamma on w."""
        grid = SpatialGrid(10)
        layout = FieldLayout.on_grid(grid, (1.0, 0.5))
        matrix = assemble_fhn_operator(grid, 1.0, 1.0, gamma=2.0, alpha=1.5)
        assert dissipativity_rate(matrix, layout) == pytest.approx(1.0, abs=1e-9)

    def test_zero_potential_needs_flag(self):
        """Test that p = 0 is only accepted with allow_zero_potential."""
        grid = SpatialGrid(5)
        with pytest.raises(InvalidInputError):
            assemble_fhn_operator(grid, 1.0, 0.0, 1.0, 1.0)
        matrix = assemble_fhn_operator(grid, 1.0, 0.0, 1.0, 1.0, allow_zero_potential=True)
        assert matrix.shape == (10, 10)

    def test_invalid_coupling(self):
        """Test that gamma and alpha must be positive."""
        with pytest.raises(InvalidInputError):
            assemble_fhn_operator(SpatialGrid(5), 1.0, 1.0, gamma=0.0, alpha=1.0)


class TestPropagators:
    """Test E = exp(dt A) and P1."""

    def test_scalar_closed_form(self):
        """Test E and P1 for A = -2."""
        bundle = build_propagators(assemble_scalar_operator(2.0), 0.1)
        assert bundle.e_step[0, 0] == pytest.approx(np.exp(-0.2))
        assert bundle.p1_step[0, 0] == pytest.approx((1.0 - np.exp(-0.2)) / 2.0)
        assert bundle.omega_est == pytest.approx(2.0)

    def test_zero_generator(self):
        """Test that A = 0 gives E = I and P1 = dt I without inverting A."""
        bundle = build_propagators(assemble_scalar_operator(0.0), 0.01)
        assert bundle.e_step[0, 0] == 1.0
        assert bundle.p1_step[0, 0] == pytest.approx(0.01)
        assert bundle.omega_est == 0.0

    def test_p1_matches_quadrature(self):
        """Test P1 against adaptive quadrature of exp(sA)."""
        grid = SpatialGrid(6)
        matrix = assemble_fhn_operator(grid, 1.0, 1.0, 1.0, 1.0)
        dt = 0.05
        bundle = build_propagators(matrix, dt)
        reference, _ = scipy.integrate.quad_vec(
            lambda t: scipy.linalg.expm(t * matrix), 0.0, dt, epsabs=1e-13, epsrel=1e-12
        )
        np.testing.assert_allclose(bundle.p1_step, reference, atol=1e-10)

    def test_contraction(self):
        """Test |E|_w <= exp(-omega dt)."""
        grid = SpatialGrid(16)
        layout = FieldLayout.on_grid(grid, (1.0, 1.0 / 3.0))
        matrix = assemble_fhn_operator(grid, 1.0, 2.0, gamma=3.0, alpha=1.0)
        bundle = build_propagators(matrix, 1e-2, layout)
        assert bundle.weighted_norm(bundle.e_step) <= np.exp(-bundle.omega_est * 1e-2) + 1e-12

    def test_propagators_are_read_only(self):
        """Test that shared propagators cannot be mutated."""
        bundle = build_propagators(assemble_scalar_operator(1.0), 0.1)
        with pytest.raises(ValueError):
            bundle.e_step[0, 0] = 0.0

    def test_invalid_dt(self):
        """Test that dt must be positive."""
        with pytest.raises(InvalidInputError):
            build_propagators(assemble_scalar_operator(1.0), 0.0)

    def test_non_square(self):
        """Test that the generator must be square."""
        with pytest.raises(DimensionMismatchError):
            build_propagators(np.zeros((2, 3)), 0.1)


class TestApplySemigroup:
    """Test repeated application of E."""

    def test_matches_matrix_exponential(self):
        """Test S(10 dt) x against expm."""
        grid = SpatialGrid(8)
        layout = FieldLayout.on_grid(grid, (1.0, 1.0))
        matrix = assemble_fhn_operator(grid, 1.0, 1.0, 1.0, 1.0)
        bundle = build_propagators(matrix, 0.01, layout)
        x = Field.random(layout, np.random.default_rng(1))

        result = apply_semigroup(bundle, x, 10)
        expected = scipy.linalg.expm(0.1 * matrix) @ x.values
        np.testing.assert_allclose(result.values, expected, rtol=1e-10, atol=1e-12)

    def test_zero_steps_is_identity(self):
        """Test that zero steps return the input."""
        bundle = build_propagators(assemble_scalar_operator(1.0), 0.1)
        x = Field.constant(FieldLayout.scalar(), (3.0,))
        assert apply_semigroup(bundle, x, 0).values[0] == 3.0

    def test_negative_steps(self):
        """Test that negative step counts are rejected."""
        bundle = build_propagators(assemble_scalar_operator(1.0), 0.1)
        with pytest.raises(InvalidInputError):
            apply_semigroup(bundle, Field.zeros(FieldLayout.scalar()), -1)

    def test_semigroup_law(self):
        """Test E^j E^k = E^(j+k) entrywise for j + k <= 64."""
        grid = SpatialGrid(8)
        layout = FieldLayout.on_grid(grid, (1.0, 1.0))
        bundle = build_propagators(assemble_fhn_operator(grid, 1.0, 1.0, 1.0, 1.0), 0.01, layout)
        powers = [np.linalg.matrix_power(bundle.e_step, m) for m in range(65)]
        for j in range(0, 33, 4):
            for k in range(0, 65 - j, 6):
                np.testing.assert_allclose(
                    powers[j] @ powers[k], powers[j + k], rtol=0, atol=1e-12
                )

        x = Field.random(layout, np.random.default_rng(4))
        stepped = apply_semigroup(bundle, apply_semigroup(bundle, x, 24), 40)
        np.testing.assert_allclose(stepped.values, powers[64] @ x.values, rtol=0, atol=1e-12)
