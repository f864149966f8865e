"""
Property validation for expansion problems.

This module implements:
- Dissipativity of F and contraction of the semigroup in the weighted product
- Taylor exactness of the polynomial nonlinearity
- Composition combinatorics and the Phi_2 closed form
- Deterministic decay and two-trajectory absorption
- Solver coupling (exact zero remainder at eps = 0, linear-F remainder)
- Jump-measure moment calibration
- Divided-difference oracles for u_1 and u_2 on a scalar instance
"""

import logging
import math
from typing import Optional, Tuple

import numpy as np

from levy_expansion.analysis.order_study import fd_oracle, remainder
from levy_expansion.config import Config
from levy_expansion.core.data_structures import Field, FieldLayout, ValidationResult
from levy_expansion.expansion.hierarchy import (
    enumerate_compositions,
    expand,
    phi_k_forcing,
)
from levy_expansion.levy.noise import LevyPath, nu_moment, sample_path
from levy_expansion.levy.seeding import path_generator
from levy_expansion.nonlinearity.polynomial import PolynomialMap
from levy_expansion.operators.linear import dissipativity_rate
from levy_expansion.presets.library import PresetLibrary, Problem
from levy_expansion.solvers.mild import solve_deterministic, solve_sde

logger = logging.getLogger(__name__)

REMAINDER_FLOOR = 1e-10


def _relative_sup(estimate: np.ndarray, reference: np.ndarray) -> float:
    scale = float(np.max(np.abs(reference)))
    return float(np.max(np.abs(estimate - reference))) / scale if scale > 0 else 0.0


class DissipativityChecker:
    """
    Checks the one-sided Lipschitz bound of F and the contraction of E.

    Both are the hypotheses that make the drift A + F dissipative.
    """

    def check_nonlinearity(
        self, problem: Problem, rng: np.random.Generator, pairs: int = 1000, scale: float = 1.5
    ) -> ValidationResult:
        """
        <F(u) - F(v) - eta (u - v), u - v>_w <= 1e-10 over random pairs.

        Args:
            problem: Problem to check
            rng: Seeded generator
            pairs: Number of random (u, v) pairs
            scale: Standard deviation of the random fields

        Returns:
            ValidationResult with the worst value as a metric
        """
        result = ValidationResult(is_valid=True)
        f, layout = problem.nonlinearity, problem.layout
        u = scale * rng.standard_normal((pairs, layout.size))
        v = scale * rng.standard_normal((pairs, layout.size))
        difference = u - v
        excess = f.evaluate(u) - f.evaluate(v) - f.eta * difference
        worst = float(np.max(np.sum(layout.entry_weights * excess * difference, axis=1)))

        result.metrics["eta"] = f.eta
        result.metrics["worst_monotonicity"] = worst
        if worst > 1e-10:
            result.add_error(f"F - eta I is not dissipative: worst pairing {worst:.3e} > 1e-10")
        return result

    def check_semigroup(
        self, problem: Problem, rng: np.random.Generator, samples: int = 1000
    ) -> ValidationResult:
        """|E x|_w <= exp(-omega dt) |x|_w + 1e-9 over random x."""
        result = ValidationResult(is_valid=True)
        bundle, layout = problem.bundle, problem.layout
        omega = dissipativity_rate(bundle.a_matrix, layout)
        x = rng.standard_normal((samples, layout.size))
        ratio_bound = math.exp(-omega * bundle.dt)
        excess = layout.norms(x @ bundle.e_step.T) - ratio_bound * layout.norms(x)
        worst = float(np.max(excess))

        result.metrics["omega"] = omega
        result.metrics["worst_contraction_excess"] = worst
        if omega <= 0:
            result.add_warning(f"Generator is not strictly dissipative (omega = {omega:.3e})")
        if worst > 1e-9:
            result.add_error(f"Semigroup exceeds exp(-omega dt) by {worst:.3e}")
        return result


class TaylorChecker:
    """Checks that the polynomial Taylor formula terminates at the degree."""

    def check(
        self, f: PolynomialMap, rng: np.random.Generator, samples: int = 100
    ) -> ValidationResult:
        """
        taylor_eval at the degree equals F(w + h), and the order-2 remainder
        scales like |h|^3.

        Remainders at or below REMAINDER_FLOOR are roundoff and stay out of
        the slope fit.

        Args:
            f: Nonlinearity
            rng: Seeded generator
            samples: Number of random (w, h)

        Returns:
            ValidationResult with the measured remainder slope
        """
        result = ValidationResult(is_valid=True)
        size = 4 * f.components
        degree = f.degree
        w = rng.standard_normal((samples, size))
        h = rng.standard_normal((samples, size))

        exact = f.evaluate(w + h)
        taylor = f.taylor_eval(w, h, degree)
        worst = float(np.max(np.abs(taylor - exact)) / max(float(np.max(np.abs(exact))), 1e-300))
        result.metrics["taylor_relative_error"] = worst
        if worst > 1e-12:
            result.add_error(f"Taylor formula at order {degree} misses F(w + h) by {worst:.3e}")

        if degree >= 3:
            order = 2
            scales = 2.0 ** -np.arange(4, 13)
            residuals = np.array(
                [
                    np.linalg.norm(
                        f.taylor_eval(w[0], s * h[0], order) - f.evaluate(w[0] + s * h[0])
                    )
                    for s in scales
                ]
            )
            kept = residuals > REMAINDER_FLOOR
            result.metrics["taylor_remainder_order"] = float(order)
            if int(np.sum(kept)) < 3:
                result.add_warning(
                    f"Only {int(np.sum(kept))} Taylor remainders above {REMAINDER_FLOOR:.0e}; "
                    "slope not measured"
                )
                return result
            slope = float(np.polyfit(np.log(scales[kept]), np.log(residuals[kept]), 1)[0])
            result.metrics["taylor_remainder_slope"] = slope
            if abs(slope - (order + 1)) > 0.1:
                result.add_error(f"Taylor remainder slope {slope:.3f}, expected {order + 1}")
        return result


class CombinatoricsChecker:
    """Checks the composition tables and the Phi_2 closed form."""

    @staticmethod
    def _brute_force_count(k: int) -> int:
        """Count ordered tuples of positive parts summing to k, with at least two parts."""

        def sequences(remaining: int) -> int:
            if remaining == 0:
                return 1
            return sum(sequences(remaining - part) for part in range(1, remaining + 1))

        # the single-part tuple (k,) is excluded
        return sequences(k) - 1

    def check(
        self, f: PolynomialMap, rng: np.random.Generator, max_order: int = 8
    ) -> ValidationResult:
        result = ValidationResult(is_valid=True)
        for k in range(2, min(max_order, Config.MAX_COMPOSITION_ORDER) + 1):
            table = enumerate_compositions(k)
            expected = 2 ** (k - 1) - 1
            if len(table) != expected or self._brute_force_count(k) != expected:
                result.add_error(f"Composition count for k={k} is {len(table)}, expected {expected}")

        phi = rng.standard_normal((100, f.components * 4))
        u1 = rng.standard_normal(phi.shape)
        generic = phi_k_forcing(f, enumerate_compositions(2), phi, [u1])
        closed = 0.5 * f.derivative_values(2, phi) * u1 * u1
        worst = float(np.max(np.abs(generic - closed)) / max(float(np.max(np.abs(closed))), 1.0))
        result.metrics["phi2_relative_error"] = worst
        if worst > 1e-12:
            result.add_error(f"Phi_2 differs from g''(phi) u1^2 / 2 by {worst:.3e}")
        return result


class DecayChecker:
    """Checks deterministic decay and absorption of two trajectories."""

    @staticmethod
    def default_pair(layout: FieldLayout) -> Tuple[Field, Field]:
        """Zero state and a perturbation 0.3 cos(pi x) on the first component, 0.1 elsewhere."""
        nodes = np.linspace(0.0, 1.0, layout.n_nodes)
        blocks = [0.3 * np.cos(np.pi * nodes)] + [np.full(layout.n_nodes, 0.1)] * (
            layout.components - 1
        )
        return Field.zeros(layout), Field.from_components(layout, blocks)

    def check(self, problem: Problem, horizon: float) -> ValidationResult:
        """
        |phi(t_m)|_w <= exp(-(omega - eta) t_m) |u0|_w + 1e-8.

        The measured rate -log(|phi(T)| / |u0|) / T is reported next to both
        omega - eta and 2 (omega - eta).
        """
        result = ValidationResult(is_valid=True)
        gap = problem.gap
        result.metrics["gap"] = gap
        if gap <= 0:
            result.add_warning(f"omega - eta = {gap:.3e} <= 0; decay is not guaranteed")
            return result

        phi = solve_deterministic(problem.bundle, problem.nonlinearity, problem.u0, horizon)
        result.metrics["solves"] = 1.0
        norms = phi.norms()
        bound = np.exp(-gap * phi.times) * norms[0] + 1e-8
        excess = float(np.max(norms - bound))
        result.metrics["decay_excess"] = excess
        if norms[0] > 0 and norms[-1] > 0:
            result.metrics["measured_rate"] = float(-np.log(norms[-1] / norms[0]) / horizon)
        result.metrics["stated_rate"] = 2.0 * gap
        if excess > 0:
            result.add_error(f"|phi| exceeds the exp(-(omega - eta) t) envelope by {excess:.3e}")
        return result

    def check_absorption(
        self, problem: Problem, horizon: float, initial: Field, other: Field
    ) -> ValidationResult:
        """|y_m - y~_m|_w <= exp(-(omega - eta) t_m) |y_0 - y~_0|_w + 1e-8."""
        result = ValidationResult(is_valid=True)
        gap = problem.gap
        if gap <= 0:
            result.add_warning("Absorption skipped: omega - eta <= 0")
            return result
        first = solve_deterministic(problem.bundle, problem.nonlinearity, initial, horizon)
        second = solve_deterministic(problem.bundle, problem.nonlinearity, other, horizon)
        result.metrics["solves"] = 2.0
        distance = problem.layout.norms(first.states - second.states)
        excess = float(np.max(distance - (np.exp(-gap * first.times) * distance[0] + 1e-8)))
        result.metrics["absorption_excess"] = excess
        if excess > 0:
            result.add_error(f"Trajectories separate faster than allowed by {excess:.3e}")
        return result


class CouplingChecker:
    """Checks that all solvers share one scheme and one path."""

    def check(self, problem: Problem, horizon: float, seed: int) -> ValidationResult:
        result = ValidationResult(is_valid=True)
        bundle, q, u0 = problem.bundle, problem.q, problem.u0
        path = sample_path(problem.jump_spec, horizon, path_generator(seed, 0), dt=bundle.dt)

        exp_set = expand(bundle, problem.nonlinearity, q, u0, path, 1)
        u_zero = solve_sde(bundle, problem.nonlinearity, q, 0.0, u0, path)
        if np.any(remainder(u_zero, exp_set, 0.0).states != 0.0):
            result.add_error("Remainder at eps = 0 is not identically zero")

        linear = PolynomialMap.linear(-0.5, components=problem.layout.components)
        linear_set = expand(bundle, linear, q, u0, path, 1)
        u_eps = solve_sde(bundle, linear, q, 0.1, u0, path)
        linear_sup = float(np.max(np.abs(remainder(u_eps, linear_set, 0.1).states)))
        result.metrics["linear_remainder_sup"] = linear_sup
        result.metrics["solves"] = 6.0
        result.metrics["jumps"] = float(path.n_jumps)
        if linear_sup > 1e-10:
            result.add_error(f"Linear-F remainder {linear_sup:.3e} exceeds 1e-10")
        return result


class LevyMomentChecker:
    """Checks sampled jump paths against the closed-form moments of nu."""

    def check(self, problem: Problem, seed: int, paths: int = 10_000) -> ValidationResult:
        """
        E|L(1)|_w^2 and E L(1) within 4 standard errors of lambda E|S|^2 E|d|^2 and 0.
        """
        result = ValidationResult(is_valid=True)
        spec, layout = problem.jump_spec, problem.layout
        totals = np.empty((paths, layout.size))
        jumps = 0
        for i in range(paths):
            path = sample_path(spec, 1.0, path_generator(seed, i))
            totals[i] = path.total().values
            jumps += path.n_jumps
        result.metrics["paths"] = float(paths)
        result.metrics["jumps"] = float(jumps)

        squared = layout.norms(totals) ** 2
        expected = nu_moment(spec, 2)
        se = float(np.std(squared, ddof=1) / np.sqrt(paths))
        result.metrics["second_moment"] = float(np.mean(squared))
        result.metrics["second_moment_expected"] = expected
        if abs(float(np.mean(squared)) - expected) > 4.0 * se:
            result.add_error(
                f"E|L(1)|^2 = {np.mean(squared):.4g} is more than 4 SE from {expected:.4g}"
            )

        mean = totals.mean(axis=0)
        mean_se = totals.std(axis=0, ddof=1) / np.sqrt(paths)
        if np.any(np.abs(mean) > 4.0 * mean_se + 1e-12):
            result.add_error("Empirical mean of L(1) is more than 4 SE from 0")
        return result


class OracleChecker:
    """
    Compares u_1 and u_2 with divided differences on a scalar instance.

    The instance is A = -1, g(v) = -v(v - 1)(v - 1/2), u0 = 0 and one unit jump
    at t = 0.1 on [0, 1].
    """

    def check(self, dt: float = 1e-3) -> ValidationResult:
        result = ValidationResult(is_valid=True)
        problem = PresetLibrary.create_scalar(rate=1.0, xi=0.5, dt=dt)
        path = LevyPath.from_jumps(problem.layout, 1.0, [0.1], [np.ones(1)])
        bundle, f, q, u0 = problem.bundle, problem.nonlinearity, problem.q, problem.u0

        exp_set = expand(bundle, f, q, u0, path, 2)
        first = fd_oracle(bundle, f, q, u0, path, 1, 1e-4, phi=exp_set.phi)
        second = fd_oracle(
            bundle, f, q, u0, path, 2, 1e-3, phi=exp_set.phi, u1=exp_set.term(1)
        )
        error_1 = _relative_sup(first.states, exp_set.term(1).states)
        error_2 = _relative_sup(second.states, exp_set.term(2).states)
        result.metrics["oracle_u1"] = error_1
        result.metrics["oracle_u2"] = error_2
        result.metrics["solves"] = 5.0
        result.metrics["jumps"] = float(path.n_jumps)
        if error_1 > 1e-3:
            result.add_error(f"u_1 differs from its divided difference by {error_1:.3e}")
        if error_2 > 5e-3:
            result.add_error(f"u_2 differs from its divided difference by {error_2:.3e}")
        return result


class PropertyValidator:
    """
    Main validation class that coordinates all property suites.

    Runs dissipativity, contraction, Taylor, combinatorics, decay, coupling,
    moment and oracle checks and folds them into one ValidationResult.
    """

    def __init__(self) -> None:
        self.dissipativity_checker = DissipativityChecker()
        self.taylor_checker = TaylorChecker()
        self.combinatorics_checker = CombinatoricsChecker()
        self.decay_checker = DecayChecker()
        self.coupling_checker = CouplingChecker()
        self.moment_checker = LevyMomentChecker()
        self.oracle_checker = OracleChecker()

    def validate_problem(
        self,
        problem: Problem,
        horizon: float,
        seed: int = 0,
        moment_paths: int = 10_000,
        absorption_pair: Optional[Tuple[Field, Field]] = None,
    ) -> ValidationResult:
        """
        Run every property suite on a problem.

        Args:
            problem: Problem to validate
            horizon: T for the trajectory checks (dt must divide it)
            seed: Master seed for random fields and paths
            moment_paths: Paths for the moment calibration
            absorption_pair: Two initial states for the absorption check

        Returns:
            Combined ValidationResult; metrics are prefixed by suite
        """
        result = ValidationResult(is_valid=True)
        rng = np.random.default_rng(seed)

        suites = [
            ("dissipativity", lambda: self.dissipativity_checker.check_nonlinearity(problem, rng)),
            ("contraction", lambda: self.dissipativity_checker.check_semigroup(problem, rng)),
            ("taylor", lambda: self.taylor_checker.check(problem.nonlinearity, rng)),
            ("combinatorics", lambda: self.combinatorics_checker.check(problem.nonlinearity, rng)),
            ("decay", lambda: self.decay_checker.check(problem, horizon)),
            ("coupling", lambda: self.coupling_checker.check(problem, horizon, seed)),
            ("moments", lambda: self.moment_checker.check(problem, seed, moment_paths)),
            ("oracle", lambda: self.oracle_checker.check()),
        ]
        if absorption_pair is not None:
            suites.append(
                (
                    "absorption",
                    lambda: self.decay_checker.check_absorption(problem, horizon, *absorption_pair),
                )
            )

        for name, run in suites:
            suite_result = run()
            status = "passed" if suite_result.is_valid else "FAILED"
            logger.info("Property suite %s %s", name, status)
            result.merge(suite_result, prefix=name)
        return result
