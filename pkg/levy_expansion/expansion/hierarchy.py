"""
Small-noise expansion hierarchy.

On a fixed noise path the solution is expanded as

    u^eps = phi + eps u_1 + ... + eps^n u_n + R_n

where phi is the deterministic limit, u_1 solves the linearization along phi
driven by the noise, and u_k (k >= 2) solves the same linearization forced by
Phi_k, the order-eps^k Taylor coefficient of F(phi + sum eps^i u_i) beyond
the linear term. None of these depends on eps.
"""

import itertools
import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple, Optional, Sequence, Tuple

import numpy as np

from levy_expansion.config import Config
from levy_expansion.core.data_structures import (
    Field,
    FieldLike,
    OperatorBundle,
    Scheme,
    Trajectory,
    values_of,
)
from levy_expansion.core.exceptions import (
    CompositionRangeError,
    GridMismatchError,
    InvalidInputError,
)
from levy_expansion.levy.noise import LevyPath, QOperator
from levy_expansion.nonlinearity.polynomial import PolynomialMap
from levy_expansion.solvers.mild import (
    BlowUpGuard,
    linearized_recursion,
    noise_injections,
    solve_deterministic,
)

logger = logging.getLogger(__name__)


# ===== Composition combinatorics =====


class CompositionEntry(NamedTuple):
    """One composition i_1 + ... + i_j = k with its Taylor coefficient 1/j!."""

    slots: int
    indices: Tuple[int, ...]
    coefficient: float


@dataclass(frozen=True)
class CompositionTable:
    """All compositions of `order` into at least two positive parts."""

    order: int
    entries: Tuple[CompositionEntry, ...]

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def by_slots(self, slots: int) -> Tuple[CompositionEntry, ...]:
        return tuple(e for e in self.entries if e.slots == slots)


@lru_cache(maxsize=None)
def enumerate_compositions(k: int) -> CompositionTable:
    """
    Compositions of k into j = 2..k parts, each part >= 1.

    Entries are ordered by j, then lexicographically in the parts. A composition
    into j parts is a choice of j - 1 cut points among 1..k-1.

    Raises:
        CompositionRangeError: k outside [2, Config.MAX_COMPOSITION_ORDER]
    """
    if not 2 <= k <= Config.MAX_COMPOSITION_ORDER:
        raise CompositionRangeError(
            f"Composition order must lie in [2, {Config.MAX_COMPOSITION_ORDER}], got {k}"
        )
    entries = []
    for slots in range(2, k + 1):
        coefficient = 1.0 / math.factorial(slots)
        for cuts in itertools.combinations(range(1, k), slots - 1):
            bounds = (0,) + cuts + (k,)
            parts = tuple(b - a for a, b in zip(bounds, bounds[1:]))
            entries.append(CompositionEntry(slots, parts, coefficient))
    return CompositionTable(order=k, entries=tuple(entries))


def phi_k_forcing(
    f: PolynomialMap,
    table: CompositionTable,
    phi_state: FieldLike,
    u_states: Sequence[FieldLike],
) -> FieldLike:
    """
    Phi_k = sum over table entries of (1/j!) F^{(j)}(phi)[u_{i_1}, ..., u_{i_j}].

    Arguments may be single states (Field or 1-D array) or whole trajectories
    stacked as (M + 1, size) arrays, in which case Phi_k is returned at every
    grid time at once.

    Args:
        f: Nonlinearity
        table: Compositions of k
        phi_state: Deterministic limit
        u_states: u_1, ..., u_{k-1} (at least k - 1 of them)

    Returns:
        Phi_k with the type of `phi_state`
    """
    if len(u_states) < table.order - 1:
        raise InvalidInputError(
            f"Phi_{table.order} needs u_1..u_{table.order - 1}, got {len(u_states)} states"
        )
    phi_values = values_of(phi_state)
    lower = [values_of(u) for u in u_states]
    total = np.zeros_like(phi_values)

    for slots, group in itertools.groupby(table.entries, key=lambda e: e.slots):
        if slots > f.degree:
            # derivatives beyond the degree vanish
            break
        weight = f.derivative_values(slots, phi_values)
        accumulated = np.zeros_like(phi_values)
        for entry in group:
            product = lower[entry.indices[0] - 1]
            for index in entry.indices[1:]:
                product = product * lower[index - 1]
            accumulated = accumulated + entry.coefficient * product
        total = total + weight * accumulated

    if isinstance(phi_state, Field):
        return Field(phi_state.layout, total)
    return total


# ===== Hierarchy solvers =====


def _require_grid(bundle: OperatorBundle, reference: Trajectory, *others: Trajectory) -> None:
    if reference.dt != bundle.dt:
        raise GridMismatchError(f"Trajectory dt {reference.dt} differs from bundle dt {bundle.dt}")
    for other in others:
        if not reference.same_grid(other):
            raise GridMismatchError(f"{other!r} is not on the grid of {reference!r}")


def solve_u1(
    bundle: OperatorBundle,
    f: PolynomialMap,
    q: QOperator,
    phi: Trajectory,
    path: LevyPath,
) -> Trajectory:
    """
    First-order term: du_1 = [A u_1 + F'(phi) u_1] dt + sqrt(Q) dL, u_1(0) = 0.

    Recursion v_{m+1} = E v_m + P1 g'(phi_m) v_m + E sqrt(Q) dL_m.
    """
    if path.horizon != phi.horizon:
        raise GridMismatchError(f"Path horizon {path.horizon} differs from phi horizon {phi.horizon}")
    _require_grid(bundle, phi)
    jacobian = f.derivative_values(1, phi.states)
    injections = noise_injections(bundle, q, path)
    guard = BlowUpGuard(phi.layout, bundle.omega_est, f.eta)
    states = linearized_recursion(bundle, jacobian, phi.n_steps, guard, injections=injections)
    return Trajectory(phi.times, states, phi.layout, phi.dt, phi.horizon, Scheme.EXPANSION)


def solve_uk(
    bundle: OperatorBundle,
    f: PolynomialMap,
    k: int,
    phi: Trajectory,
    lower: Sequence[Trajectory],
) -> Trajectory:
    """
    Order-k term: du_k = [A u_k + F'(phi) u_k + Phi_k] dt, u_k(0) = 0.

    Phi_k is frozen at the left endpoint of each step and enters through P1,
    i.e. the semigroup-weighted mild form.

    Args:
        bundle: Propagators
        f: Nonlinearity
        k: Order (>= 2)
        phi: Deterministic limit
        lower: u_1, ..., u_{k-1} on the grid of phi

    Returns:
        Trajectory of u_k
    """
    if k < 2:
        raise InvalidInputError(f"solve_uk handles k >= 2, got {k}")
    if len(lower) < k - 1:
        raise InvalidInputError(f"u_{k} needs {k - 1} lower-order terms, got {len(lower)}")
    _require_grid(bundle, phi, *lower[: k - 1])

    table = enumerate_compositions(k)
    source = phi_k_forcing(f, table, phi.states, [u.states for u in lower[: k - 1]])
    jacobian = f.derivative_values(1, phi.states)
    guard = BlowUpGuard(phi.layout, bundle.omega_est, f.eta)
    states = linearized_recursion(bundle, jacobian, phi.n_steps, guard, source=source)
    return Trajectory(phi.times, states, phi.layout, phi.dt, phi.horizon, Scheme.EXPANSION)


# ===== Expansion sets =====


@dataclass(frozen=True, eq=False)
class ExpansionSet:
    """
    phi and u_1..u_n on one noise path.

    Attributes:
        order: n
        phi: Deterministic limit
        u: (u_1, ..., u_n)
        path: The noise path u_1 was driven by
    """

    order: int
    phi: Trajectory
    u: Tuple[Trajectory, ...]
    path: LevyPath

    def __post_init__(self) -> None:
        if len(self.u) != self.order:
            raise InvalidInputError(f"Expected {self.order} terms, got {len(self.u)}")
        for index, term in enumerate(self.u, start=1):
            if not self.phi.same_grid(term):
                raise GridMismatchError(f"u_{index} is not on the grid of phi")
            if np.any(term.states[0] != 0.0):
                raise InvalidInputError(f"u_{index}(0) must vanish")

    @property
    def times(self) -> np.ndarray:
        return self.phi.times

    def term(self, k: int) -> Trajectory:
        """u_k for k >= 1, phi for k = 0."""
        return self.phi if k == 0 else self.u[k - 1]

    def partial_sum(self, epsilon: float, order: Optional[int] = None) -> np.ndarray:
        """States of phi + sum_{k <= order} eps^k u_k, shape (M + 1, size)."""
        order = self.order if order is None else order
        if not 0 <= order <= self.order:
            raise InvalidInputError(f"order must lie in [0, {self.order}], got {order}")
        total = self.phi.states.copy()
        power = 1.0
        for k in range(1, order + 1):
            power *= epsilon
            total = total + power * self.u[k - 1].states
        return total


def expand(
    bundle: OperatorBundle,
    f: PolynomialMap,
    q: QOperator,
    u0: Field,
    path: LevyPath,
    n: int,
    phi: Optional[Trajectory] = None,
) -> ExpansionSet:
    """
    Compute phi, u_1, ..., u_n on one path.

    Args:
        bundle: Propagators
        f: Nonlinearity
        q: Covariance
        u0: Initial state
        path: Levy path
        n: Expansion order (>= 1)
        phi: Precomputed deterministic limit; phi does not depend on the
            path, so workers can share one

    Returns:
        ExpansionSet, reusable for every eps
    """
    if n < 1:
        raise InvalidInputError(f"Expansion order must be >= 1, got {n}")
    if phi is None:
        phi = solve_deterministic(bundle, f, u0, path.horizon)

    terms = [solve_u1(bundle, f, q, phi, path)]
    for k in range(2, n + 1):
        terms.append(solve_uk(bundle, f, k, phi, terms))
    logger.debug("Expanded to order %d on a path with %d jumps", n, path.n_jumps)
    return ExpansionSet(order=n, phi=phi, u=tuple(terms), path=path)
