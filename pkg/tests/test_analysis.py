"""Tests for remainders, moments, order fits and order studies."""

import dataclasses

import numpy as np
import pytest

from levy_expansion.analysis import (
    OrderStudyConfig,
    expansion_statistics,
    fd_oracle,
    fit_order,
    moment_of_sups,
    path_remainder_sups,
    remainder,
    summarize_order_study,
    sup_moment,
)
from levy_expansion.core.exceptions import (
    GridMismatchError,
    InvalidInputError,
    OrderFitError,
)
from levy_expansion.expansion import expand
from levy_expansion.levy import LevyPath, path_generator, sample_path
from levy_expansion.nonlinearity.polynomial import PolynomialMap
from levy_expansion.presets import PresetLibrary
from levy_expansion.solvers import solve_sde


@pytest.fixture
def scalar():
    return PresetLibrary.create_scalar(rate=1.0, xi=0.5, dt=1e-3)


@pytest.fixture
def two_jumps(scalar):
    return LevyPath.from_jumps(scalar.layout, 0.5, [0.1, 0.3], [[1.0], [-0.5]])


class TestRemainder:
    """Test remainders of the truncated expansion."""

    def test_zero_at_eps_zero(self, scalar, two_jumps):
        """Test R_n = 0 exactly when eps = 0."""
        exp_set = expand(scalar.bundle, scalar.nonlinearity, scalar.q, scalar.u0, two_jumps, 2)
        u0 = solve_sde(scalar.bundle, scalar.nonlinearity, scalar.q, 0.0, scalar.u0, two_jumps)
        assert not np.any(remainder(u0, exp_set, 0.0).states)

    def test_grid_mismatch(self, scalar, two_jumps):
        """Test that u^eps must share the expansion grid."""
        exp_set = expand(scalar.bundle, scalar.nonlinearity, scalar.q, scalar.u0, two_jumps, 1)
        shorter = LevyPath.from_jumps(scalar.layout, 0.4, [0.1], [[1.0]])
        u = solve_sde(scalar.bundle, scalar.nonlinearity, scalar.q, 0.1, scalar.u0, shorter)
        with pytest.raises(GridMismatchError):
            remainder(u, exp_set, 0.1)

    @pytest.mark.parametrize("n", [1, 2])
    def test_single_path_order(self, scalar, two_jumps, n):
        """Test sup |R_n| ~ eps^(n + 1) on a fixed path."""
        exp_set = expand(scalar.bundle, scalar.nonlinearity, scalar.q, scalar.u0, two_jumps, n)
        epsilons = [0.02, 0.01, 0.005, 0.0025]
        sups = []
        for epsilon in epsilons:
            u = solve_sde(
                scalar.bundle, scalar.nonlinearity, scalar.q, epsilon, scalar.u0, two_jumps
            )
            sups.append(remainder(u, exp_set, epsilon).sup_norm())
        fit = fit_order(epsilons, sups, target=n + 1)
        assert fit.slope == pytest.approx(n + 1, abs=0.1)
        assert fit.r_squared > 0.999


class TestMoments:
    """Test Monte Carlo moment estimates."""

    def test_moment_and_standard_error(self):
        """Test E[sup^2] and its standard error on three paths."""
        values = np.array([1.0, 4.0, 9.0])
        estimate, se = moment_of_sups(np.array([1.0, 2.0, 3.0]), 2)
        assert estimate == pytest.approx(14.0 / 3.0)
        assert se == pytest.approx(values.std(ddof=1) / np.sqrt(3))

    def test_single_path_rejected(self):
        """Test that M = 1 has no standard error."""
        with pytest.raises(InvalidInputError):
            moment_of_sups(np.array([1.0]), 2)

    def test_zero_remainders(self, scalar, two_jumps):
        """Test that identically zero remainders give (0, 0)."""
        exp_set = expand(scalar.bundle, scalar.nonlinearity, scalar.q, scalar.u0, two_jumps, 1)
        u0 = solve_sde(scalar.bundle, scalar.nonlinearity, scalar.q, 0.0, scalar.u0, two_jumps)
        zero = remainder(u0, exp_set, 0.0)
        assert sup_moment([zero, zero, zero], 4) == (0.0, 0.0)


class TestFitOrder:
    """Test log-log regressions."""

    def test_exact_power_law(self):
        """Test slope, intercept and r^2 on C eps^4."""
        eps = 0.2 / 2.0 ** np.arange(5)
        fit = fit_order(eps, 3.0 * eps**4, target=4.0)
        assert fit.slope == pytest.approx(4.0)
        assert fit.intercept == pytest.approx(np.log(3.0))
        assert fit.r_squared == pytest.approx(1.0)
        assert fit.deficit == pytest.approx(0.0, abs=1e-9)

    def test_bounded_noise(self):
        """Test that +-15% multiplicative noise moves the slope by less than 0.15."""
        rng = np.random.default_rng(42)
        eps = 0.2 / 2.0 ** np.arange(6)
        moments = 2.0 * eps**4 * (1.0 + 0.15 * rng.uniform(-1.0, 1.0, eps.size))
        assert abs(fit_order(eps, moments).slope - 4.0) < 0.15

    def test_non_positive_points_dropped(self):
        """Test that zero estimates are excluded from the fit."""
        eps = [0.4, 0.2, 0.1, 0.05]
        fit = fit_order(eps, [0.16, 0.04, 0.01, 0.0])
        assert fit.dropped == [0.05]
        assert fit.slope == pytest.approx(2.0)

    def test_too_few_points(self):
        """Test that fewer than 3 usable points raise."""
        with pytest.raises(OrderFitError):
            fit_order([0.2, 0.1, 0.05], [1.0, 0.0, -1.0])

    def test_weighted_needs_standard_errors(self):
        """Test the fallback to an unweighted fit when an error is zero."""
        eps = [0.4, 0.2, 0.1]
        fit = fit_order(eps, [0.16, 0.04, 0.01], [0.01, 0.0, 0.001], weighted=True)
        assert not fit.weighted
        assert fit.slope == pytest.approx(2.0)

    def test_length_mismatch(self):
        """Test that inputs must have equal length."""
        with pytest.raises(InvalidInputError):
            fit_order([0.2, 0.1, 0.05], [1.0, 2.0])


class TestOracle:
    """Test divided-difference oracles on the scalar instance."""

    @pytest.fixture
    def setting(self, scalar):
        path = LevyPath.from_jumps(scalar.layout, 1.0, [0.1], [[1.0]])
        exp_set = expand(scalar.bundle, scalar.nonlinearity, scalar.q, scalar.u0, path, 2)
        return scalar, path, exp_set

    @staticmethod
    def _relative(estimate, reference):
        return np.max(np.abs(estimate - reference)) / np.max(np.abs(reference))

    def test_first_order(self, setting):
        """Test (u^eps - phi) / eps against u_1 at eps = 1e-4."""
        problem, path, exp_set = setting
        oracle = fd_oracle(
            problem.bundle, problem.nonlinearity, problem.q, problem.u0, path, 1, 1e-4
        )
        assert self._relative(oracle.states, exp_set.term(1).states) <= 1e-3

    def test_second_order(self, setting):
        """Test (u^eps - phi - eps u_1) / eps^2 against u_2 at eps = 1e-3."""
        problem, path, exp_set = setting
        oracle = fd_oracle(
            problem.bundle, problem.nonlinearity, problem.q, problem.u0, path, 2, 1e-3
        )
        assert self._relative(oracle.states, exp_set.term(2).states) <= 5e-3

    def test_first_order_error_is_linear_in_eps(self, setting):
        """Test that |u_1 - (u^eps0 - phi) / eps0| shrinks like eps0."""
        problem, path, exp_set = setting
        steps = np.array([1e-2, 1e-3, 1e-4])
        errors = [
            np.max(
                np.abs(
                    fd_oracle(
                        problem.bundle,
                        problem.nonlinearity,
                        problem.q,
                        problem.u0,
                        path,
                        1,
                        float(eps0),
                        phi=exp_set.phi,
                    ).states
                    - exp_set.term(1).states
                )
            )
            for eps0 in steps
        ]
        slope = np.polyfit(np.log(steps), np.log(errors), 1)[0]
        assert slope == pytest.approx(1.0, abs=0.05)

    def test_unsupported_order(self, setting):
        """Test that only k in {1, 2} is offered."""
        problem, path, _ = setting
        with pytest.raises(InvalidInputError):
            fd_oracle(problem.bundle, problem.nonlinearity, problem.q, problem.u0, path, 3, 1e-3)


class TestOrderStudy:
    """Test order-study configuration and aggregation."""

    def test_targets(self):
        """Test n + 1 and p (n + 1)."""
        study = OrderStudyConfig(n=2, p=4)
        assert study.sup_target == 3.0
        assert study.moment_target == 12.0

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"epsilons": (0.1, 0.2, 0.05)},
            {"epsilons": (0.2, 0.1)},
            {"epsilons": (2.0, 0.1, 0.05)},
            {"p": 3},
            {"n": 0},
            {"paths": 1},
        ],
    )
    def test_invalid_parameters(self, kwargs):
        """Test rejected study parameters."""
        with pytest.raises(InvalidInputError):
            OrderStudyConfig(**kwargs)

    def test_summary_of_exact_power_law(self):
        """Test fits and diagnostics on sups = c_i eps^2."""
        study = OrderStudyConfig(epsilons=(0.2, 0.1, 0.05, 0.025), n=1, p=2, paths=10)
        scales = np.random.default_rng(0).uniform(0.5, 2.0, 10)
        sups = scales[:, None] * np.asarray(study.epsilons)[None, :] ** 2

        result = summarize_order_study(sups, study)
        assert result.median_fit.slope == pytest.approx(2.0)
        assert result.moment_fit.slope == pytest.approx(4.0)
        assert result.moment_fit.weighted
        assert result.monotone_violation == 0.0
        assert result.loo_sensitivity == pytest.approx(0.0, abs=1e-9)
        assert result.quantiles.shape == (4, 3)
        assert [row["epsilon"] for row in result.rows()] == list(study.epsilons)
        assert result.to_dict()["slope"] == pytest.approx(2.0)

    def test_monotone_violation(self):
        """Test the fraction of sups growing as eps shrinks."""
        study = OrderStudyConfig(epsilons=(0.2, 0.1, 0.05), paths=2)
        sups = np.array([[1e-2, 2.5e-3, 6e-4], [1e-2, 3e-2, 1e-3]])
        assert summarize_order_study(sups, study).monotone_violation == pytest.approx(0.25)

    def test_path_sups_are_reproducible(self):
        """Test that a path index always replays the same noise."""
        problem = PresetLibrary.create_fhn(n_nodes=6, dt=1e-2, intensity=50.0)
        study = OrderStudyConfig(
            epsilons=(0.1, 0.05, 0.025), n=1, paths=2, horizon=0.2, dt=1e-2, master_seed=9
        )
        first = path_remainder_sups(problem, 1, study)
        second = path_remainder_sups(problem, 1, study)
        np.testing.assert_array_equal(first, second)
        assert np.all(first > 0)
        assert not np.array_equal(first, path_remainder_sups(problem, 0, study))


class TestExpansionStatistics:
    """Test mean and variance against the expansion."""

    def test_exact_for_linear_f(self, scalar):
        """Test zero discrepancy when u^eps = phi + eps u_1 exactly."""
        linear = dataclasses.replace(scalar, nonlinearity=PolynomialMap.linear(-0.5))
        expansions, solutions = [], []
        for index in range(5):
            path = sample_path(linear.jump_spec, 0.5, path_generator(1, index), dt=1e-3)
            expansions.append(
                expand(linear.bundle, linear.nonlinearity, linear.q, linear.u0, path, 2)
            )
            solutions.append(
                solve_sde(linear.bundle, linear.nonlinearity, linear.q, 0.1, linear.u0, path)
            )
        stats = expansion_statistics(expansions, solutions, 0.1)
        assert stats.paths == 5
        assert stats.mean_error < 1e-12
        assert stats.variance_error < 1e-12

    def test_needs_two_paths(self, scalar, two_jumps):
        """Test that statistics need matching inputs over two paths."""
        exp_set = expand(scalar.bundle, scalar.nonlinearity, scalar.q, scalar.u0, two_jumps, 1)
        u = solve_sde(scalar.bundle, scalar.nonlinearity, scalar.q, 0.1, scalar.u0, two_jumps)
        with pytest.raises(InvalidInputError):
            expansion_statistics([exp_set], [u], 0.1)
