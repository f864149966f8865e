"""
Remainders, Monte Carlo moments and order-in-eps regression.

An order study fixes one noise path per Monte Carlo index, computes one
ExpansionSet per path and replays the full solution for every eps on that same
path. sup_t |R_n| then isolates the eps-dependence of the remainder.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from levy_expansion.core.data_structures import (
    Field,
    OperatorBundle,
    Scheme,
    Trajectory,
)
from levy_expansion.core.exceptions import (
    GridMismatchError,
    InvalidInputError,
    OrderFitError,
)
from levy_expansion.expansion.hierarchy import ExpansionSet, expand, solve_u1
from levy_expansion.levy.noise import LevyPath, QOperator, sample_path
from levy_expansion.levy.seeding import path_generator
from levy_expansion.nonlinearity.polynomial import PolynomialMap
from levy_expansion.presets.library import Problem
from levy_expansion.solvers.mild import solve_deterministic, solve_sde

logger = logging.getLogger(__name__)

QUANTILE_LEVELS = (0.05, 0.5, 0.95)


# ===== Remainders and moments =====


def remainder(
    u_eps: Trajectory, exp_set: ExpansionSet, epsilon: float, order: Optional[int] = None
) -> Trajectory:
    """
    R_n = u^eps - phi - sum_{k=1}^{n} eps^k u_k on the shared grid.

    Args:
        u_eps: Full solution on the path of `exp_set`
        exp_set: Expansion terms
        epsilon: Noise amplitude u_eps was computed with
        order: Truncation n (default: exp_set.order)

    Returns:
        Remainder trajectory

    Raises:
        GridMismatchError: u_eps not on the grid of the expansion
    """
    if not u_eps.same_grid(exp_set.phi):
        raise GridMismatchError(f"{u_eps!r} is not on the grid of the expansion")
    states = u_eps.states - exp_set.partial_sum(epsilon, order)
    return Trajectory(
        u_eps.times, states, u_eps.layout, u_eps.dt, u_eps.horizon, Scheme.REMAINDER
    )


def moment_of_sups(sups: np.ndarray, p: float) -> Tuple[float, float]:
    """Mean of sups**p with the standard error of the mean."""
    sups = np.asarray(sups, dtype=float)
    if sups.ndim != 1 or sups.size < 2:
        raise InvalidInputError(f"At least 2 paths are needed for a standard error, got {sups.size}")
    values = sups**p
    # np.sum reduces pairwise
    estimate = float(np.sum(values) / values.size)
    spread = float(np.sqrt(np.sum((values - estimate) ** 2) / (values.size - 1)))
    return estimate, spread / float(np.sqrt(values.size))


def sup_moment(remainders: Sequence[Trajectory], p: float) -> Tuple[float, float]:
    """
    Estimate E[sup_t |R|_w^p] over paths.

    Args:
        remainders: One remainder trajectory per path (M >= 2)
        p: Moment exponent

    Returns:
        (estimate, standard_error)
    """
    return moment_of_sups(np.array([r.sup_norm() for r in remainders]), p)


# ===== Order fits =====


@dataclass
class OrderFitResult:
    """
    Log-log regression of a moment against eps.

    Attributes:
        epsilons: eps values that entered the fit
        moments: Moment estimate per eps
        standard_errors: Standard error per eps (zeros when unknown)
        slope: Measured exponent
        intercept: log C
        r_squared: Coefficient of determination in [0, 1]
        target: Exponent the theory predicts, if any
        dropped: eps values excluded for non-positive estimates
        weighted: Whether the fit used standard-error weights
    """

    epsilons: List[float]
    moments: List[float]
    standard_errors: List[float]
    slope: float
    intercept: float
    r_squared: float
    target: Optional[float] = None
    dropped: List[float] = field(default_factory=list)
    weighted: bool = False

    @property
    def deficit(self) -> Optional[float]:
        """target - slope."""
        return None if self.target is None else self.target - self.slope

    def to_dict(self) -> Dict:
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "r_squared": self.r_squared,
            "target": self.target,
            "weighted": self.weighted,
            "epsilons": list(self.epsilons),
            "moments": list(self.moments),
            "standard_errors": list(self.standard_errors),
            "dropped": list(self.dropped),
        }


def fit_order(
    epsilons: Sequence[float],
    moments: Sequence[float],
    standard_errors: Optional[Sequence[float]] = None,
    weighted: bool = False,
    target: Optional[float] = None,
) -> OrderFitResult:
    """
    Least squares of log(moment) against log(eps).

    Non-positive or non-finite estimates are dropped with a warning. With
    `weighted`, each point is weighted by moment / standard_error, the inverse
    standard deviation of log(moment) to first order.

    Raises:
        OrderFitError: fewer than 3 usable points
    """
    eps = np.asarray(epsilons, dtype=float)
    values = np.asarray(moments, dtype=float)
    errors = (
        np.zeros_like(values) if standard_errors is None else np.asarray(standard_errors, float)
    )
    if not eps.shape == values.shape == errors.shape:
        raise InvalidInputError("epsilons, moments and standard errors must have equal length")

    usable = np.isfinite(values) & (values > 0) & (eps > 0)
    dropped = [float(e) for e in eps[~usable]]
    for e in dropped:
        logger.warning("Dropping eps = %g from the order fit (non-positive moment)", e)
    if int(usable.sum()) < 3:
        raise OrderFitError(f"Only {int(usable.sum())} usable points; at least 3 are required")

    eps, values, errors = eps[usable], values[usable], errors[usable]
    x, y = np.log(eps), np.log(values)

    weights = None
    if weighted:
        if np.all(errors > 0):
            weights = values / errors
        else:
            logger.warning("Zero standard error in the order fit; falling back to unweighted")
            weighted = False

    slope, intercept = np.polyfit(x, y, 1, w=weights)
    w2 = np.ones_like(y) if weights is None else weights**2
    fitted = slope * x + intercept
    mean = float(np.sum(w2 * y) / np.sum(w2))
    ss_res = float(np.sum(w2 * (y - fitted) ** 2))
    ss_tot = float(np.sum(w2 * (y - mean) ** 2))
    if ss_tot > 0:
        r_squared = 1.0 - ss_res / ss_tot
    else:
        r_squared = 1.0 if ss_res == 0 else 0.0

    return OrderFitResult(
        epsilons=[float(e) for e in eps],
        moments=[float(v) for v in values],
        standard_errors=[float(s) for s in errors],
        slope=float(slope),
        intercept=float(intercept),
        r_squared=float(np.clip(r_squared, 0.0, 1.0)),
        target=target,
        dropped=dropped,
        weighted=weighted,
    )


# ===== Divided-difference oracle =====


def fd_oracle(
    bundle: OperatorBundle,
    f: PolynomialMap,
    q: QOperator,
    u0: Field,
    path: LevyPath,
    k: int,
    eps0: float,
    phi: Optional[Trajectory] = None,
    u1: Optional[Trajectory] = None,
) -> Trajectory:
    """
    Divided differences in eps on a common path.

    k = 1: (u^eps0 - phi) / eps0
    k = 2: (u^eps0 - phi - eps0 u_1) / eps0^2

    Both tend to u_k as eps0 -> 0 and are computed independently of the
    composition machinery.
    """
    if k not in (1, 2):
        raise InvalidInputError(f"fd_oracle supports k in {{1, 2}}, got {k}")
    if not eps0 > 0:
        raise InvalidInputError(f"eps0 must be positive, got {eps0}")
    if phi is None:
        phi = solve_deterministic(bundle, f, u0, path.horizon)
    u_eps = solve_sde(bundle, f, q, eps0, u0, path)

    difference = u_eps.states - phi.states
    if k == 2:
        if u1 is None:
            u1 = solve_u1(bundle, f, q, phi, path)
        difference = difference - eps0 * u1.states
    states = difference / eps0**k
    return Trajectory(phi.times, states, phi.layout, phi.dt, phi.horizon, Scheme.ORACLE)


# ===== Order studies =====


@dataclass(frozen=True)
class OrderStudyConfig:
    """
    Parameters of one order-in-eps study.

    Attributes:
        epsilons: Strictly decreasing, in (0, 1], at least 3 values
        n: Expansion order
        p: Moment exponent (even, >= 2)
        paths: Monte Carlo paths M
        horizon: T
        dt: Time step
        master_seed: Seed of the per-path streams
    """

    epsilons: Tuple[float, ...] = (0.2, 0.1, 0.05, 0.025)
    n: int = 1
    p: int = 2
    paths: int = 100
    horizon: float = 0.5
    dt: float = 1e-3
    master_seed: int = 0

    def __post_init__(self) -> None:
        eps = np.asarray(self.epsilons, dtype=float)
        if eps.size < 3:
            raise InvalidInputError("An order study needs at least 3 epsilons")
        if np.any(eps <= 0) or np.any(eps > 1):
            raise InvalidInputError("epsilons must lie in (0, 1]")
        if np.any(np.diff(eps) >= 0):
            raise InvalidInputError("epsilons must be strictly decreasing")
        if self.n < 1:
            raise InvalidInputError(f"Expansion order must be >= 1, got {self.n}")
        if self.p < 2 or self.p % 2:
            raise InvalidInputError(f"Moment exponent must be an even integer >= 2, got {self.p}")
        if self.paths < 2:
            raise InvalidInputError(f"An order study needs at least 2 paths, got {self.paths}")
        object.__setattr__(self, "epsilons", tuple(float(e) for e in eps))

    @property
    def sup_target(self) -> float:
        return float(self.n + 1)

    @property
    def moment_target(self) -> float:
        return float(self.p * (self.n + 1))


def path_remainder_sups(
    problem: Problem,
    path_index: int,
    study: OrderStudyConfig,
    phi: Optional[Trajectory] = None,
    path: Optional[LevyPath] = None,
) -> np.ndarray:
    """
    sup_t |R_n|_w for every eps of the study on one path.

    The path is drawn from the stream of `path_index` unless the caller already
    sampled it, so every eps and every rerun sees the same noise.

    Returns:
        Array (len(study.epsilons),)
    """
    if path is None:
        rng = path_generator(study.master_seed, path_index)
        path = sample_path(problem.jump_spec, study.horizon, rng, dt=study.dt)
    exp_set = expand(
        problem.bundle, problem.nonlinearity, problem.q, problem.u0, path, study.n, phi=phi
    )
    sups = np.empty(len(study.epsilons))
    for j, epsilon in enumerate(study.epsilons):
        u_eps = solve_sde(
            problem.bundle, problem.nonlinearity, problem.q, epsilon, problem.u0, path
        )
        sups[j] = remainder(u_eps, exp_set, epsilon).sup_norm()
    return sups


@dataclass
class OrderStudyResult:
    """
    Aggregated order study.

    Attributes:
        study: Study parameters
        sups: Array (paths, len(epsilons)) of per-path sup_t |R_n|_w
        median_fit: Fit of the median sup against eps (target n + 1)
        moment_fit: Weighted fit of E[sup^p] against eps (target p(n + 1))
        quantiles: Array (len(epsilons), 3) at QUANTILE_LEVELS
        monotone_violation: Fraction of (path, eps) pairs where sup grows as eps shrinks
        loo_slopes: Median-fit slope with each eps left out (empty with 3 epsilons)
    """

    study: OrderStudyConfig
    sups: np.ndarray
    median_fit: OrderFitResult
    moment_fit: OrderFitResult
    moments: List[float]
    moment_errors: List[float]
    quantiles: np.ndarray
    monotone_violation: float
    loo_slopes: List[float] = field(default_factory=list)

    @property
    def loo_sensitivity(self) -> float:
        """Largest slope change from leaving one eps out."""
        if not self.loo_slopes:
            return 0.0
        return float(max(abs(s - self.median_fit.slope) for s in self.loo_slopes))

    def rows(self) -> List[Dict[str, float]]:
        """One CSV row per eps."""
        rows = []
        for j, epsilon in enumerate(self.study.epsilons):
            rows.append(
                {
                    "epsilon": epsilon,
                    "moment_estimate": self.moments[j],
                    "std_error": self.moment_errors[j],
                    "sup_q05": float(self.quantiles[j, 0]),
                    "sup_q50": float(self.quantiles[j, 1]),
                    "sup_q95": float(self.quantiles[j, 2]),
                }
            )
        return rows

    def to_dict(self) -> Dict:
        return {
            "n": self.study.n,
            "p": self.study.p,
            "paths": int(self.sups.shape[0]),
            "median_sup_fit": self.median_fit.to_dict(),
            "moment_fit": self.moment_fit.to_dict(),
            "slope": self.median_fit.slope,
            "intercept": self.median_fit.intercept,
            "r_squared": self.median_fit.r_squared,
            "monotone_violation": self.monotone_violation,
            "loo_slopes": list(self.loo_slopes),
            "loo_sensitivity": self.loo_sensitivity,
        }


def summarize_order_study(sups: np.ndarray, study: OrderStudyConfig) -> OrderStudyResult:
    """
    Aggregate per-path sups into fits and diagnostics.

    Args:
        sups: Array (paths, len(study.epsilons)); row order is irrelevant
        study: Study parameters

    Returns:
        OrderStudyResult
    """
    sups = np.asarray(sups, dtype=float)
    if sups.ndim != 2 or sups.shape[1] != len(study.epsilons):
        raise InvalidInputError(
            f"Expected sups of shape (paths, {len(study.epsilons)}), got {sups.shape}"
        )
    epsilons = list(study.epsilons)

    medians = np.median(sups, axis=0)
    median_fit = fit_order(epsilons, medians, target=study.sup_target)

    stats = [moment_of_sups(sups[:, j], study.p) for j in range(len(epsilons))]
    moments = [s[0] for s in stats]
    errors = [s[1] for s in stats]
    moment_fit = fit_order(epsilons, moments, errors, weighted=True, target=study.moment_target)

    quantiles = np.quantile(sups, QUANTILE_LEVELS, axis=0).T
    # epsilons decrease along axis 1, so sups should not increase
    violation = float(np.mean(np.diff(sups, axis=1) > 0)) if sups.shape[1] > 1 else 0.0

    loo_slopes = []
    if len(epsilons) > 3:
        for j in range(len(epsilons)):
            keep = [i for i in range(len(epsilons)) if i != j]
            loo_slopes.append(fit_order([epsilons[i] for i in keep], medians[keep]).slope)

    logger.info(
        "Order study n=%d: median-sup slope %.3f (target %g), moment slope %.3f (target %g)",
        study.n,
        median_fit.slope,
        study.sup_target,
        moment_fit.slope,
        study.moment_target,
    )
    return OrderStudyResult(
        study=study,
        sups=sups,
        median_fit=median_fit,
        moment_fit=moment_fit,
        moments=moments,
        moment_errors=errors,
        quantiles=quantiles,
        monotone_violation=violation,
        loo_slopes=loo_slopes,
    )


# ===== Mean and variance of the expansion =====


@dataclass
class ExpansionStatistics:
    """
    Monte Carlo mean/variance of u^eps(T) against the expansion's predictions.

    Attributes:
        epsilon: Noise amplitude
        paths: Number of paths
        empirical_mean: Sample mean of u^eps(T)
        predicted_mean: phi(T) + eps E[u_1(T)] + eps^2 E[u_2(T)]
        empirical_variance: Entrywise sample variance of u^eps(T)
        predicted_variance: eps^2 Var(u_1(T))
        mean_error: Weighted norm of the mean discrepancy
        variance_error: Weighted norm of the variance discrepancy
    """

    epsilon: float
    paths: int
    empirical_mean: np.ndarray
    predicted_mean: np.ndarray
    empirical_variance: np.ndarray
    predicted_variance: np.ndarray
    mean_error: float
    variance_error: float


def expansion_statistics(
    expansions: Sequence[ExpansionSet], solutions: Sequence[Trajectory], epsilon: float
) -> ExpansionStatistics:
    """
    Compare the sample law of u^eps(T) with its second-order expansion.

    Args:
        expansions: One ExpansionSet per path
        solutions: u^eps on the same paths, same order
        epsilon: Noise amplitude the solutions used

    Returns:
        ExpansionStatistics
    """
    if len(expansions) != len(solutions) or len(expansions) < 2:
        raise InvalidInputError("Need matching expansions and solutions over at least 2 paths")
    layout = solutions[0].layout

    finals = np.stack([u.states[-1] for u in solutions])
    u1 = np.stack([e.term(1).states[-1] for e in expansions])
    predicted_mean = expansions[0].phi.states[-1] + epsilon * u1.mean(axis=0)
    if all(e.order >= 2 for e in expansions):
        u2 = np.stack([e.term(2).states[-1] for e in expansions])
        predicted_mean = predicted_mean + epsilon**2 * u2.mean(axis=0)

    empirical_mean = finals.mean(axis=0)
    empirical_variance = finals.var(axis=0, ddof=1)
    predicted_variance = epsilon**2 * u1.var(axis=0, ddof=1)

    return ExpansionStatistics(
        epsilon=epsilon,
        paths=len(solutions),
        empirical_mean=empirical_mean,
        predicted_mean=predicted_mean,
        empirical_variance=empirical_variance,
        predicted_variance=predicted_variance,
        mean_error=layout.norm(empirical_mean - predicted_mean),
        variance_error=layout.norm(empirical_variance - predicted_variance),
    )
