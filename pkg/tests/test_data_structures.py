"""Tests for core data structures."""

import dataclasses

import numpy as np
import pytest

from levy_expansion.core.data_structures import (
    Field,
    FieldLayout,
    Scheme,
    SpatialGrid,
    Trajectory,
    ValidationResult,
    values_of,
)
from levy_expansion.core.exceptions import DimensionMismatchError, InvalidInputError
from levy_expansion.operators.linear import build_propagators


class TestSpatialGrid:
    """Test SpatialGrid class."""

    def test_spacing_and_nodes(self):
        """Test uniform nodes on [0, 1]."""
        grid = SpatialGrid(5)
        assert grid.spacing == 0.25
        np.testing.assert_allclose(grid.nodes, [0.0, 0.25, 0.5, 0.75, 1.0])
        np.testing.assert_allclose(grid.midpoints, [0.125, 0.375, 0.625, 0.875])

    def test_trapezoid_weights_integrate_constants(self):
        """Test that quadrature weights sum to the interval length."""
        weights = SpatialGrid(17).trapezoid_weights()
        assert weights[0] == weights[-1] == pytest.approx(0.5 / 16)
        assert weights.sum() == pytest.approx(1.0)

    def test_too_few_nodes(self):
        """Test that fewer than 3 nodes is rejected."""
        with pytest.raises(InvalidInputError):
            SpatialGrid(2)


class TestFieldLayout:
    """Test FieldLayout class."""

    def test_entry_weights_are_component_major(self):
        """Test Kronecker layout of the inner-product weights."""
        layout = FieldLayout.on_grid(SpatialGrid(3), (1.0, 0.5))
        np.testing.assert_allclose(
            layout.entry_weights, [0.25, 0.5, 0.25, 0.125, 0.25, 0.125]
        )
        assert layout.size == 6

    def test_norm_of_constant(self):
        """Test weighted norm of a constant field."""
        layout = FieldLayout.on_grid(SpatialGrid(9), (1.0, 1.0))
        ones = Field.constant(layout, (1.0, 1.0))
        assert ones.norm() == pytest.approx(np.sqrt(2.0))

    def test_norms_rowwise(self):
        """Test that norms() matches norm() row by row."""
        layout = FieldLayout.on_grid(SpatialGrid(5), (1.0, 2.0))
        rows = np.random.default_rng(0).standard_normal((4, layout.size))
        expected = [layout.norm(r) for r in rows]
        np.testing.assert_allclose(layout.norms(rows), expected)

    def test_lp_norm_of_constant(self):
        """Test that the quadrature L^r norm of a constant is the constant."""
        layout = FieldLayout.on_grid(SpatialGrid(11), (1.0,))
        assert layout.lp_norm(np.full(11, 2.0), 6) == pytest.approx(2.0)

    def test_weight_count_mismatch(self):
        """Test that weights must match the component count."""
        with pytest.raises(DimensionMismatchError):
            FieldLayout(components=2, n_nodes=3, component_weights=(1.0,), quadrature=(1, 1, 1))

    def test_non_positive_weight(self):
        """Test that weights must be positive."""
        with pytest.raises(InvalidInputError):
            FieldLayout(components=1, n_nodes=2, component_weights=(0.0,), quadrature=(1, 1))


class TestField:
    """Test Field class."""

    @pytest.fixture
    def layout(self):
        return FieldLayout.on_grid(SpatialGrid(4), (1.0, 1.0))

    def test_constant_and_components(self, layout):
        """Test per-component constants."""
        x = Field.constant(layout, (0.6, 0.0))
        np.testing.assert_array_equal(x.component(0), np.full(4, 0.6))
        np.testing.assert_array_equal(x.component(1), np.zeros(4))

    def test_arithmetic(self, layout):
        """Test addition, subtraction and scaling."""
        x = Field.constant(layout, (1.0, 2.0))
        y = Field.constant(layout, (0.5, 0.5))
        np.testing.assert_allclose((x + y).values, np.repeat([1.5, 2.5], 4))
        np.testing.assert_allclose((x - y).values, np.repeat([0.5, 1.5], 4))
        np.testing.assert_allclose((2.0 * x).values, np.repeat([2.0, 4.0], 4))
        np.testing.assert_allclose((-x).values, np.repeat([-1.0, -2.0], 4))

    def test_inner_product_symmetric_and_bilinear(self):
        """Test <x, y>_w = <y, x>_w and linearity in each slot."""
        layout = FieldLayout.on_grid(SpatialGrid(9), (1.0, 0.25))
        rng = np.random.default_rng(6)
        for _ in range(20):
            x, y, z = (Field.random(layout, rng) for _ in range(3))
            a, b = (float(v) for v in rng.standard_normal(2))
            assert x.inner(y) == pytest.approx(y.inner(x), rel=1e-14, abs=1e-14)
            assert (a * x + b * z).inner(y) == pytest.approx(
                a * x.inner(y) + b * z.inner(y), rel=1e-12, abs=1e-12
            )
            assert x.inner(a * y + b * z) == pytest.approx(
                a * x.inner(y) + b * x.inner(z), rel=1e-12, abs=1e-12
            )
            assert x.inner(x) == pytest.approx(x.norm() ** 2, rel=1e-12)
            assert x.inner(x) > 0

    def test_immutability(self, layout):
        """Test that Field is immutable."""
        x = Field.zeros(layout)
        with pytest.raises(dataclasses.FrozenInstanceError):
            x.values = np.ones(layout.size)
        with pytest.raises(ValueError):
            x.values[0] = 1.0

    def test_non_finite_rejected(self, layout):
        """Test that NaN entries are rejected."""
        values = np.zeros(layout.size)
        values[3] = np.nan
        with pytest.raises(InvalidInputError):
            Field(layout, values)

    def test_size_mismatch(self, layout):
        """Test that mixing layouts of different size fails."""
        other = FieldLayout.on_grid(SpatialGrid(5), (1.0, 1.0))
        with pytest.raises(DimensionMismatchError):
            Field.zeros(layout) + Field.zeros(other)

    def test_values_of(self, layout):
        """Test raw value extraction from fields and arrays."""
        x = Field.constant(layout, (1.0, 0.0))
        assert values_of(x) is x.values
        np.testing.assert_array_equal(values_of([1, 2]), [1.0, 2.0])


class TestOperatorBundle:
    """Test OperatorBundle step counting."""

    def test_steps_for(self):
        """Test that dt must divide the horizon."""
        bundle = build_propagators(np.array([[-1.0]]), 0.1)
        assert bundle.steps_for(1.0) == 10
        with pytest.raises(InvalidInputError):
            bundle.steps_for(0.25)


class TestTrajectory:
    """Test Trajectory class."""

    def test_shape_check(self):
        """Test that states must match times and layout."""
        layout = FieldLayout.scalar()
        with pytest.raises(DimensionMismatchError):
            Trajectory(np.arange(3.0), np.zeros((2, 1)), layout, 1.0, 2.0)

    def test_norms_and_grid(self):
        """Test sup norm and grid comparison."""
        layout = FieldLayout.scalar()
        times = Trajectory.time_grid(0.5, 4)
        states = np.array([[0.0], [-3.0], [1.0], [2.0], [0.5]])
        traj = Trajectory(times, states, layout, 0.5, 2.0, Scheme.REMAINDER)

        assert traj.n_steps == 4
        assert traj.sup_norm() == 3.0
        assert traj.final().values[0] == 0.5
        assert traj.same_grid(Trajectory(times, np.zeros((5, 1)), layout, 0.5, 2.0))
        assert not traj.same_grid(
            Trajectory(Trajectory.time_grid(0.25, 8), np.zeros((9, 1)), layout, 0.25, 2.0)
        )


class TestValidationResult:
    """Test ValidationResult class."""

    def test_valid_result(self):
        """Test valid result."""
        result = ValidationResult(is_valid=True)
        assert result.is_valid
        assert bool(result) is True
        assert len(result.errors) == 0

    def test_add_error(self):
        """Test adding error."""
        result = ValidationResult(is_valid=True)
        result.add_error("Test error")

        assert not result.is_valid
        assert "Test error" in result.errors

    def test_add_warning(self):
        """Test adding warning."""
        result = ValidationResult(is_valid=True)
        result.add_warning("Test warning")

        assert result.is_valid  # Warnings don't invalidate
        assert "Test warning" in result.warnings

    def test_merge_prefixes_metrics(self):
        """Test folding a suite result into a combined one."""
        combined = ValidationResult(is_valid=True)
        suite = ValidationResult(is_valid=True, metrics={"omega": 1.0})
        suite.add_error("contraction failed")

        combined.merge(suite, prefix="contraction")
        assert not combined.is_valid
        assert combined.metrics == {"contraction.omega": 1.0}
        assert combined.errors == ["contraction failed"]
