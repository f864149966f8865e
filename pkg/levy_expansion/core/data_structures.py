"""
Core data structures for levy_expansion.

This module defines the fundamental data types used throughout the system:
- Spatial discretization (SpatialGrid, FieldLayout)
- State vectors (Field)
- Linear propagators (OperatorBundle)
- Time-discrete solutions (Trajectory)
- Validation results (ValidationResult)
"""

from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from levy_expansion.core.exceptions import DimensionMismatchError, InvalidInputError


# ===== Enumerations =====


class MarkLawKind(str, Enum):
    """Symmetric one-dimensional jump-size laws."""

    TWO_POINT = "two_point"
    UNIFORM = "uniform"
    DOUBLE_EXPONENTIAL = "double_exponential"


class EmbeddingKind(str, Enum):
    """How a scalar jump size is placed into the discretized space."""

    FIXED_PROFILE = "fixed_profile"
    MODE_SPREAD = "mode_spread"


class PresetName(str, Enum):
    """Problem presets."""

    FHN = "fhn"
    SCALAR = "scalar"
    REACTION_DIFFUSION = "reaction_diffusion"


class Scheme(str, Enum):
    """Time-stepping scheme tags carried by trajectories."""

    EXPONENTIAL_EULER = "exponential_euler"
    SHIFTED = "shifted_exponential_euler"
    CONVOLUTION = "left_point_convolution"
    EXPANSION = "expansion_hierarchy"
    REMAINDER = "remainder"
    ORACLE = "divided_difference"


# ===== Spatial Discretization =====


@dataclass(frozen=True)
class SpatialGrid:
    """
    Uniform grid on [0, 1] with both endpoints included.

    Attributes:
        n_nodes: Number of nodes (at least 3)
    """

    n_nodes: int

    def __post_init__(self) -> None:
        if self.n_nodes < 3:
            raise InvalidInputError(f"SpatialGrid needs n_nodes >= 3, got {self.n_nodes}")

    @property
    def spacing(self) -> float:
        """Node spacing h = 1/(n_nodes - 1)."""
        return 1.0 / (self.n_nodes - 1)

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.n_nodes)

    @property
    def midpoints(self) -> np.ndarray:
        """Cell interfaces x_{i+1/2}, length n_nodes - 1."""
        nodes = self.nodes
        return 0.5 * (nodes[:-1] + nodes[1:])

    def trapezoid_weights(self) -> np.ndarray:
        """
        Trapezoidal quadrature weights.

        The conservative Neumann stencil is self-adjoint in this inner product,
        which is why it is used instead of the plain Euclidean one.
        """
        weights = np.full(self.n_nodes, self.spacing)
        weights[0] *= 0.5
        weights[-1] *= 0.5
        return weights

    def __repr__(self) -> str:
        return f"SpatialGrid({self.n_nodes} nodes, h={self.spacing:.4g})"


@dataclass(frozen=True)
class FieldLayout:
    """
    Shape and inner product of the discretized Hilbert space H_h.

    Values are stored component-major: [c0 node0..node(n-1), c1 node0.., ...].

    Attributes:
        components: Number of field components m
        n_nodes: Nodes per component
        component_weights: Positive weight per component in the inner product
        quadrature: Positive quadrature weight per node
    """

    components: int
    n_nodes: int
    component_weights: Tuple[float, ...]
    quadrature: Tuple[float, ...]

    def __post_init__(self) -> None:
        if self.components < 1 or self.n_nodes < 1:
            raise InvalidInputError("FieldLayout needs at least one component and one node")
        if len(self.component_weights) != self.components:
            raise DimensionMismatchError(
                f"{len(self.component_weights)} component weights for {self.components} components"
            )
        if len(self.quadrature) != self.n_nodes:
            raise DimensionMismatchError(
                f"{len(self.quadrature)} quadrature weights for {self.n_nodes} nodes"
            )
        if min(self.component_weights) <= 0 or min(self.quadrature) <= 0:
            raise InvalidInputError("Inner-product weights must be strictly positive")

    @staticmethod
    def on_grid(grid: SpatialGrid, component_weights: Sequence[float]) -> "FieldLayout":
        """Layout with trapezoidal quadrature on a spatial grid."""
        return FieldLayout(
            components=len(component_weights),
            n_nodes=grid.n_nodes,
            component_weights=tuple(float(w) for w in component_weights),
            quadrature=tuple(float(q) for q in grid.trapezoid_weights()),
        )

    @staticmethod
    def scalar() -> "FieldLayout":
        """One component on a single node with unit weight."""
        return FieldLayout(components=1, n_nodes=1, component_weights=(1.0,), quadrature=(1.0,))

    @property
    def size(self) -> int:
        return self.components * self.n_nodes

    @cached_property
    def entry_weights(self) -> np.ndarray:
        """Per-entry weights w such that <x, y>_w = sum(w * x * y)."""
        return np.kron(np.asarray(self.component_weights), np.asarray(self.quadrature))

    def check(self, values: np.ndarray) -> None:
        """Raise DimensionMismatchError unless the trailing axis has length `size`."""
        if values.shape[-1] != self.size:
            raise DimensionMismatchError(
                f"Expected trailing dimension {self.size}, got {values.shape[-1]}"
            )

    def inner(self, x: np.ndarray, y: np.ndarray) -> float:
        """Weighted inner product of two value vectors."""
        return float(np.sum(self.entry_weights * x * y))

    def norm(self, x: np.ndarray) -> float:
        return float(np.sqrt(np.sum(self.entry_weights * x * x)))

    def norms(self, states: np.ndarray) -> np.ndarray:
        """Weighted norm of each row of a (steps, size) array."""
        return np.sqrt(np.sum(self.entry_weights * states * states, axis=-1))

    def lp_norm(self, x: np.ndarray, r: float) -> float:
        """
        Discrete L^r quadrature norm, summed over components.

        Realizes the B = L^{2d} and K = L^{2d^2} norms in finite dimensions.
        """
        blocks = np.abs(np.asarray(x)).reshape(self.components, self.n_nodes)
        quad = np.asarray(self.quadrature)
        return float(np.sum(np.sum(quad * blocks**r, axis=1) ** (1.0 / r)))

    def split(self, values: np.ndarray) -> np.ndarray:
        """View values as (..., components, n_nodes)."""
        return values.reshape(values.shape[:-1] + (self.components, self.n_nodes))


# ===== State Vectors =====


@dataclass(frozen=True, eq=False)
class Field:
    """
    Immutable state vector in H_h.

    Attributes:
        layout: Component count, node count and inner product
        values: Real vector of length layout.size, all entries finite
    """

    layout: FieldLayout
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=float).reshape(-1)
        self.layout.check(values)
        if not np.all(np.isfinite(values)):
            raise InvalidInputError("Field values must be finite")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @staticmethod
    def zeros(layout: FieldLayout) -> "Field":
        return Field(layout, np.zeros(layout.size))

    @staticmethod
    def constant(layout: FieldLayout, per_component: Sequence[float]) -> "Field":
        """Field that is constant in space on each component."""
        if len(per_component) != layout.components:
            raise DimensionMismatchError(
                f"{len(per_component)} constants for {layout.components} components"
            )
        return Field(layout, np.repeat(np.asarray(per_component, dtype=float), layout.n_nodes))

    @staticmethod
    def from_components(layout: FieldLayout, blocks: Sequence[np.ndarray]) -> "Field":
        values = np.concatenate([np.broadcast_to(b, (layout.n_nodes,)) for b in blocks])
        return Field(layout, values)

    @staticmethod
    def random(layout: FieldLayout, rng: np.random.Generator, scale: float = 1.0) -> "Field":
        return Field(layout, scale * rng.standard_normal(layout.size))

    @property
    def components(self) -> int:
        return self.layout.components

    def component(self, index: int) -> np.ndarray:
        """Values of one component (read-only view)."""
        return self.layout.split(self.values)[index]

    def norm(self) -> float:
        return self.layout.norm(self.values)

    def inner(self, other: "Field") -> float:
        self._check_compatible(other)
        return self.layout.inner(self.values, other.values)

    def _check_compatible(self, other: "Field") -> None:
        if other.layout.size != self.layout.size:
            raise DimensionMismatchError(
                f"Field sizes differ: {self.layout.size} vs {other.layout.size}"
            )

    def __add__(self, other: "Field") -> "Field":
        self._check_compatible(other)
        return Field(self.layout, self.values + other.values)

    def __sub__(self, other: "Field") -> "Field":
        self._check_compatible(other)
        return Field(self.layout, self.values - other.values)

    def __mul__(self, scalar: float) -> "Field":
        return Field(self.layout, scalar * self.values)

    __rmul__ = __mul__

    def __neg__(self) -> "Field":
        return Field(self.layout, -self.values)

    def __repr__(self) -> str:
        return f"Field({self.layout.components}x{self.layout.n_nodes}, |.|_w={self.norm():.4g})"


FieldLike = Union[Field, np.ndarray]


def values_of(x: FieldLike) -> np.ndarray:
    """Raw values of a Field, or the array itself."""
    return x.values if isinstance(x, Field) else np.asarray(x, dtype=float)


# ===== Linear Propagators =====


@dataclass(frozen=True, eq=False)
class OperatorBundle:
    """
    Discretized generator with its one-step propagators.

    Immutable after construction; safe to share read-only across workers.

    Attributes:
        a_matrix: Dense generator A_h
        dt: Time step
        e_step: exp(dt * A_h)
        p1_step: integral of exp(s * A_h) over [0, dt]
        omega_est: Estimated dissipativity rate (clipped at 0)
        weights: Per-entry inner-product weights used for omega_est
    """

    a_matrix: np.ndarray
    dt: float
    e_step: np.ndarray
    p1_step: np.ndarray
    omega_est: float
    weights: np.ndarray

    @property
    def size(self) -> int:
        return self.a_matrix.shape[0]

    def steps_for(self, horizon: float) -> int:
        """Number of steps covering [0, horizon]; dt must divide horizon."""
        ratio = horizon / self.dt
        steps = int(round(ratio))
        if steps < 1 or abs(ratio - steps) > 1e-9 * max(1.0, ratio):
            raise InvalidInputError(f"dt = {self.dt} does not divide T = {horizon}")
        return steps

    def weighted_norm(self, matrix: np.ndarray) -> float:
        """Operator norm of `matrix` induced by the weighted inner product."""
        root = np.sqrt(self.weights)
        return float(np.linalg.norm(root[:, None] * matrix / root[None, :], 2))

    def __repr__(self) -> str:
        return f"OperatorBundle(size={self.size}, dt={self.dt:g}, omega={self.omega_est:.4g})"


# ===== Trajectories =====


@dataclass(frozen=True, eq=False)
class Trajectory:
    """
    States on the uniform time grid t_m = m * dt, m = 0..M.

    Attributes:
        times: Grid times, times[0] = 0 and times[M] = T
        states: Array of shape (M + 1, layout.size)
        layout: Layout of each state
        dt: Time step
        horizon: Final time T
        scheme: Scheme tag
    """

    times: np.ndarray
    states: np.ndarray
    layout: FieldLayout
    dt: float
    horizon: float
    scheme: Scheme = Scheme.EXPONENTIAL_EULER

    def __post_init__(self) -> None:
        if self.states.shape != (len(self.times), self.layout.size):
            raise DimensionMismatchError(
                f"states shape {self.states.shape} does not match "
                f"{len(self.times)} times x {self.layout.size} entries"
            )

    @staticmethod
    def time_grid(dt: float, steps: int) -> np.ndarray:
        return dt * np.arange(steps + 1)

    @property
    def n_steps(self) -> int:
        return len(self.times) - 1

    def state(self, m: int) -> Field:
        return Field(self.layout, self.states[m])

    def final(self) -> Field:
        return self.state(self.n_steps)

    def norms(self) -> np.ndarray:
        """Weighted norm at every grid time."""
        return self.layout.norms(self.states)

    def sup_norm(self) -> float:
        """Maximum over the time grid of the weighted norm."""
        return float(np.max(self.norms()))

    def same_grid(self, other: "Trajectory") -> bool:
        return (
            self.states.shape == other.states.shape
            and self.dt == other.dt
            and np.array_equal(self.times, other.times)
        )

    def __repr__(self) -> str:
        return (
            f"Trajectory({self.scheme.value}, {self.n_steps} steps of {self.dt:g}, "
            f"T={self.horizon:g})"
        )


# ===== Validation Results =====


@dataclass
class ValidationResult:
    """
    Result of a property or configuration check.

    Attributes:
        is_valid: Whether all checks passed
        errors: Failed checks (block success)
        warnings: Soft findings (don't block)
        suggestions: Remedies
        metrics: Named measured quantities (omega, eta, slopes, ...)
    """

    is_valid: bool
    errors: List[str] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)
    suggestions: List[str] = field(default_factory=list)
    metrics: Dict[str, float] = field(default_factory=dict)

    def add_error(self, message: str) -> None:
        """Add validation error."""
        self.errors.append(message)
        self.is_valid = False

    def add_warning(self, message: str) -> None:
        """Add validation warning."""
        self.warnings.append(message)

    def add_suggestion(self, message: str) -> None:
        """Add improvement suggestion."""
        self.suggestions.append(message)

    def merge(self, other: "ValidationResult", prefix: Optional[str] = None) -> None:
        """Fold another result into this one."""
        self.errors.extend(other.errors)
        self.warnings.extend(other.warnings)
        self.suggestions.extend(other.suggestions)
        for key, value in other.metrics.items():
            self.metrics[f"{prefix}.{key}" if prefix else key] = value
        self.is_valid = self.is_valid and other.is_valid

    def __bool__(self) -> bool:
        return self.is_valid

    def __repr__(self) -> str:
        status = "valid" if self.is_valid else "invalid"
        return f"ValidationResult({status}, {len(self.errors)} errors, {len(self.warnings)} warnings)"
