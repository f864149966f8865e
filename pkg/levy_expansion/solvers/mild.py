"""
Exponential-Euler time steppers for mild solutions.

All solvers share one scheme on the grid t_m = m * dt:

    y_{m+1} = E y_m + P1 F(y_m) + eps * E sqrt(Q) dL_m

with E = exp(dt A), P1 = int_0^dt exp(s A) ds, F frozen at the left endpoint and
each jump of step m propagated by the full E. Sharing the scheme and the path
across solvers is what makes expansion remainders cancel exactly when they
should.
"""

import logging
from typing import Optional

import numpy as np

from levy_expansion.config import Config
from levy_expansion.core.data_structures import (
    Field,
    FieldLayout,
    OperatorBundle,
    Scheme,
    Trajectory,
)
from levy_expansion.core.exceptions import BlowUpError, DimensionMismatchError
from levy_expansion.levy.noise import LevyPath, QOperator, apply_sqrt_q
from levy_expansion.nonlinearity.polynomial import PolynomialMap

logger = logging.getLogger(__name__)


class BlowUpGuard:
    """Aborts a recursion whose weighted norm leaves [0, threshold]."""

    def __init__(
        self,
        layout: FieldLayout,
        omega: float,
        eta: float,
        threshold: Optional[float] = None,
    ) -> None:
        self.weights = layout.entry_weights
        self.omega = omega
        self.eta = eta
        self.threshold = Config.BLOWUP_THRESHOLD if threshold is None else threshold

    def check(self, step: int, values: np.ndarray) -> None:
        norm = float(np.sqrt(np.sum(self.weights * values * values)))
        if not np.isfinite(norm) or norm > self.threshold:
            logger.error("Blow-up at step %d (|u|_w = %.3e)", step, norm)
            raise BlowUpError(step, norm, self.omega, self.eta)


def _check_sizes(bundle: OperatorBundle, layout: FieldLayout, f: Optional[PolynomialMap]) -> None:
    if layout.size != bundle.size:
        raise DimensionMismatchError(f"Field of size {layout.size} vs operator of size {bundle.size}")
    if f is not None and f.components != layout.components:
        raise DimensionMismatchError(
            f"Nonlinearity has {f.components} components, field has {layout.components}"
        )


def _grid(bundle: OperatorBundle, horizon: float) -> np.ndarray:
    times = Trajectory.time_grid(bundle.dt, bundle.steps_for(horizon))
    times[-1] = horizon
    return times


def noise_injections(bundle: OperatorBundle, q: QOperator, path: LevyPath) -> np.ndarray:
    """Rows E sqrt(Q) dL_m for every step m, shape (M, size)."""
    if path.layout.size != bundle.size:
        raise DimensionMismatchError("Levy path and operator sizes differ")
    increments = path.increments_for(bundle.dt)
    return apply_sqrt_q(q, increments) @ bundle.e_step.T


def _exponential_euler(
    bundle: OperatorBundle,
    f: PolynomialMap,
    initial: np.ndarray,
    steps: int,
    guard: BlowUpGuard,
    forcing: Optional[np.ndarray] = None,
    shift: Optional[np.ndarray] = None,
) -> np.ndarray:
    """
    Semilinear recursion y_{m+1} = E y_m + P1 F(y_m + shift_m) + forcing_m.

    `forcing` has shape (M, size) and `shift` shape (M + 1, size); either may be None.
    """
    e_step, p1_step = bundle.e_step, bundle.p1_step
    states = np.empty((steps + 1, initial.shape[0]))
    states[0] = initial
    y = states[0]
    for m in range(steps):
        argument = y if shift is None else y + shift[m]
        y = e_step @ y + p1_step @ f.evaluate(argument)
        if forcing is not None:
            y = y + forcing[m]
        guard.check(m + 1, y)
        states[m + 1] = y
    return states


def linearized_recursion(
    bundle: OperatorBundle,
    jacobian: np.ndarray,
    steps: int,
    guard: BlowUpGuard,
    source: Optional[np.ndarray] = None,
    injections: Optional[np.ndarray] = None,
) -> np.ndarray:
    """
    Linear recursion from zero: v_{m+1} = E v_m + P1 (J_m v_m + source_m) + injections_m.

    `jacobian` and `source` have shape (M + 1, size) (pointwise g'(phi_m) and forcing),
    `injections` shape (M, size).
    """
    e_step, p1_step = bundle.e_step, bundle.p1_step
    states = np.zeros((steps + 1, bundle.size))
    v = states[0]
    for m in range(steps):
        drift = jacobian[m] * v
        if source is not None:
            drift = drift + source[m]
        v = e_step @ v + p1_step @ drift
        if injections is not None:
            v = v + injections[m]
        guard.check(m + 1, v)
        states[m + 1] = v
    return states


def solve_deterministic(
    bundle: OperatorBundle, f: PolynomialMap, u0: Field, horizon: float
) -> Trajectory:
    """
    Deterministic limit phi on [0, horizon].

    Args:
        bundle: Propagators (dt must divide horizon)
        f: Nonlinearity
        u0: Initial state
        horizon: T

    Returns:
        Trajectory of phi
    """
    _check_sizes(bundle, u0.layout, f)
    times = _grid(bundle, horizon)
    guard = BlowUpGuard(u0.layout, bundle.omega_est, f.eta)
    states = _exponential_euler(bundle, f, u0.values, len(times) - 1, guard)
    return Trajectory(times, states, u0.layout, bundle.dt, horizon, Scheme.EXPONENTIAL_EULER)


def stochastic_convolution(bundle: OperatorBundle, q: QOperator, path: LevyPath) -> Trajectory:
    """
    Stochastic convolution Z(t) = int_0^t exp((t-s)A) sqrt(Q) dL(s).

    Recursion Z_{m+1} = E (Z_m + sqrt(Q) dL_m), Z_0 = 0.

    Args:
        bundle: Propagators
        q: Covariance
        path: Levy path on the same horizon

    Returns:
        Trajectory of Z
    """
    _check_sizes(bundle, path.layout, None)
    times = _grid(bundle, path.horizon)
    injections = noise_injections(bundle, q, path)
    guard = BlowUpGuard(path.layout, bundle.omega_est, 0.0)

    e_step = bundle.e_step
    states = np.zeros((len(times), bundle.size))
    z = states[0]
    for m in range(len(times) - 1):
        z = e_step @ z + injections[m]
        guard.check(m + 1, z)
        states[m + 1] = z
    return Trajectory(times, states, path.layout, bundle.dt, path.horizon, Scheme.CONVOLUTION)


def solve_sde(
    bundle: OperatorBundle,
    f: PolynomialMap,
    q: QOperator,
    epsilon: float,
    u0: Field,
    path: LevyPath,
) -> Trajectory:
    """
    Full solution u^eps on a given noise path.

    With epsilon = 0 the noise term is skipped, so the result is bit-identical
    to solve_deterministic.

    Args:
        bundle: Propagators
        f: Nonlinearity
        q: Covariance
        epsilon: Noise amplitude >= 0
        u0: Initial state
        path: Levy path

    Returns:
        Trajectory of u^eps
    """
    _check_sizes(bundle, u0.layout, f)
    if epsilon < 0:
        raise ValueError(f"epsilon must be non-negative, got {epsilon}")
    times = _grid(bundle, path.horizon)
    forcing = epsilon * noise_injections(bundle, q, path) if epsilon != 0 else None
    guard = BlowUpGuard(u0.layout, bundle.omega_est, f.eta)
    states = _exponential_euler(bundle, f, u0.values, len(times) - 1, guard, forcing=forcing)
    return Trajectory(times, states, u0.layout, bundle.dt, path.horizon, Scheme.EXPONENTIAL_EULER)


def solve_shifted(
    bundle: OperatorBundle,
    f: PolynomialMap,
    q: QOperator,
    epsilon: float,
    u0: Field,
    path: LevyPath,
) -> Trajectory:
    """
    Noise-free shifted process z = u^eps - eps Z.

    z solves z' = A z + F(z + eps Z), discretized as
    z_{m+1} = E z_m + P1 F(z_m + eps Z_m); u^eps_m = z_m + eps Z_m under the
    shared scheme.

    Returns:
        Trajectory of z
    """
    _check_sizes(bundle, u0.layout, f)
    times = _grid(bundle, path.horizon)
    shift = epsilon * stochastic_convolution(bundle, q, path).states
    guard = BlowUpGuard(u0.layout, bundle.omega_est, f.eta)
    states = _exponential_euler(bundle, f, u0.values, len(times) - 1, guard, shift=shift)
    return Trajectory(times, states, u0.layout, bundle.dt, path.horizon, Scheme.SHIFTED)
