"""
Pure-jump Levy noise in the discretized space.

This module implements:
- Symmetric finite-moment mark laws (two-point, uniform, double exponential)
- Embeddings of scalar marks into H_h (fixed profile or random mode)
- Compound Poisson path sampling and right-closed binning onto a time grid
- The diagonal covariance operator Q and its square root
- Closed-form moments of the jump measure
"""

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from levy_expansion.core.data_structures import (
    EmbeddingKind,
    Field,
    FieldLayout,
    FieldLike,
    MarkLawKind,
    values_of,
)
from levy_expansion.core.exceptions import (
    DimensionMismatchError,
    InvalidInputError,
    SamplerContractError,
)


# ===== Jump Measure =====


@dataclass(frozen=True)
class MarkLaw:
    """
    Symmetric law of the scalar jump size S.

    Attributes:
        kind: Family
        scale: a for two_point(+-a) and uniform(-a, a); b for double_exponential(b)
    """

    kind: MarkLawKind
    scale: float = 1.0

    def __post_init__(self) -> None:
        if not self.scale > 0:
            raise InvalidInputError(f"Mark scale must be positive, got {self.scale}")

    @property
    def mean(self) -> float:
        """Every offered family is symmetric."""
        return 0.0

    def abs_moment(self, m: int) -> float:
        """E|S|^m in closed form."""
        if m < 1:
            raise InvalidInputError(f"Moment order must be >= 1, got {m}")
        if self.kind is MarkLawKind.TWO_POINT:
            return self.scale**m
        if self.kind is MarkLawKind.UNIFORM:
            return self.scale**m / (m + 1)
        return self.scale**m * math.factorial(m)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        if self.kind is MarkLawKind.TWO_POINT:
            return self.scale * rng.choice(np.array([-1.0, 1.0]), size=size)
        if self.kind is MarkLawKind.UNIFORM:
            return rng.uniform(-self.scale, self.scale, size=size)
        return rng.laplace(0.0, self.scale, size=size)


@dataclass(frozen=True, eq=False)
class JumpEmbedding:
    """
    Placement of scalar marks into H_h.

    A jump with size S picks direction k with probability probabilities[k] and
    contributes S * directions[k]. Directions have unit weighted norm.

    Attributes:
        kind: fixed_profile (one direction) or mode_spread
        layout: Layout of the directions
        directions: Array (k, layout.size)
        probabilities: Array (k,), sums to 1
    """

    kind: EmbeddingKind
    layout: FieldLayout
    directions: np.ndarray
    probabilities: np.ndarray

    def __post_init__(self) -> None:
        if self.directions.ndim != 2 or self.directions.shape[1] != self.layout.size:
            raise DimensionMismatchError("Embedding directions must have shape (k, layout.size)")
        if self.probabilities.shape != (self.directions.shape[0],):
            raise DimensionMismatchError("One probability per direction is required")
        if np.any(self.probabilities < 0) or not np.isclose(self.probabilities.sum(), 1.0):
            raise InvalidInputError("Direction probabilities must be non-negative and sum to 1")

    @staticmethod
    def _unit(layout: FieldLayout, direction: FieldLike) -> np.ndarray:
        values = values_of(direction)
        layout.check(values)
        norm = layout.norm(values)
        if norm == 0:
            raise InvalidInputError("Embedding direction must be non-zero")
        return values / norm

    @staticmethod
    def fixed_profile(profile: Field) -> "JumpEmbedding":
        """Every jump points along `profile`, normalized to unit weighted norm."""
        return JumpEmbedding(
            kind=EmbeddingKind.FIXED_PROFILE,
            layout=profile.layout,
            directions=JumpEmbedding._unit(profile.layout, profile)[None, :],
            probabilities=np.ones(1),
        )

    @staticmethod
    def mode_spread(
        directions: Sequence[Field], probabilities: Optional[Sequence[float]] = None
    ) -> "JumpEmbedding":
        """Each jump picks one of `directions` at random."""
        if not directions:
            raise InvalidInputError("mode_spread needs at least one direction")
        layout = directions[0].layout
        stacked = np.stack([JumpEmbedding._unit(layout, d) for d in directions])
        if probabilities is None:
            probs = np.full(len(directions), 1.0 / len(directions))
        else:
            probs = np.asarray(probabilities, dtype=float)
        return JumpEmbedding(EmbeddingKind.MODE_SPREAD, layout, stacked, probs)

    @staticmethod
    def cosine_modes(
        layout: FieldLayout, count: int, components: Sequence[int] = (0,)
    ) -> "JumpEmbedding":
        """Uniform spread over the Neumann modes cos(j pi x), j < count, on each listed component."""
        nodes = np.linspace(0.0, 1.0, layout.n_nodes) if layout.n_nodes > 1 else np.zeros(1)
        modes = []
        for component in components:
            for j in range(count):
                blocks = [np.zeros(layout.n_nodes) for _ in range(layout.components)]
                blocks[component] = np.cos(j * np.pi * nodes)
                modes.append(Field.from_components(layout, blocks))
        return JumpEmbedding.mode_spread(modes)

    @property
    def direction_norms(self) -> np.ndarray:
        return self.layout.norms(self.directions)


@dataclass(frozen=True)
class JumpMeasureSpec:
    """
    Compound Poisson jump measure nu = intensity * law(S * direction).

    Attributes:
        intensity: lambda > 0, jumps per unit time
        mark_law: Symmetric scalar law
        embedding: Placement into H_h
    """

    intensity: float
    mark_law: MarkLaw
    embedding: JumpEmbedding

    def __post_init__(self) -> None:
        if not self.intensity > 0:
            raise InvalidInputError(f"Jump intensity must be positive, got {self.intensity}")

    @property
    def layout(self) -> FieldLayout:
        return self.embedding.layout


def nu_moment(spec: JumpMeasureSpec, m: int) -> float:
    """
    int |y|_w^m nu(dy) = lambda * E|S|^m * E|direction|_w^m.

    Args:
        spec: Jump measure
        m: Moment order >= 1

    Returns:
        Closed-form moment
    """
    profile_factor = float(np.sum(spec.embedding.probabilities * spec.embedding.direction_norms**m))
    return spec.intensity * spec.mark_law.abs_moment(m) * profile_factor


def nu_signed_mean(spec: JumpMeasureSpec) -> np.ndarray:
    """int y nu(dy); zero for every offered (symmetric) law."""
    mean_direction = spec.embedding.probabilities @ spec.embedding.directions
    return spec.intensity * spec.mark_law.mean * mean_direction


# ===== Paths =====


@dataclass(frozen=True, eq=False)
class LevyPath:
    """
    One compound Poisson realization on (0, T].

    Attributes:
        horizon: T
        jump_times: Sorted times in (0, T]
        marks: Array (n_jumps, layout.size), one embedded mark per jump
        layout: Layout of the marks
        dt: Step the increments were binned with, if any
        step_increments: Array (M, layout.size) of per-step sums, if binned
    """

    horizon: float
    jump_times: np.ndarray
    marks: np.ndarray
    layout: FieldLayout
    dt: Optional[float] = None
    step_increments: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self) -> None:
        if self.marks.shape != (len(self.jump_times), self.layout.size):
            raise DimensionMismatchError(
                f"marks shape {self.marks.shape} does not match "
                f"{len(self.jump_times)} jumps x {self.layout.size} entries"
            )

    @staticmethod
    def empty(layout: FieldLayout, horizon: float) -> "LevyPath":
        return LevyPath(horizon, np.zeros(0), np.zeros((0, layout.size)), layout)

    @staticmethod
    def from_jumps(
        layout: FieldLayout, horizon: float, times: Sequence[float], marks: Sequence[FieldLike]
    ) -> "LevyPath":
        """Path with prescribed jumps (sorted on construction)."""
        times_arr = np.asarray(times, dtype=float)
        marks_arr = np.array([values_of(m) for m in marks], dtype=float).reshape(
            len(times_arr), layout.size
        )
        order = np.argsort(times_arr, kind="stable")
        return LevyPath(horizon, times_arr[order], marks_arr[order], layout)

    @property
    def n_jumps(self) -> int:
        return len(self.jump_times)

    def value_at(self, t: float) -> Field:
        """L(t) = sum of marks with jump time <= t (cadlag)."""
        count = int(np.searchsorted(self.jump_times, t, side="right"))
        return Field(self.layout, self.marks[:count].sum(axis=0))

    def left_limit(self, t: float) -> Field:
        """L(t-) = sum of marks with jump time < t."""
        count = int(np.searchsorted(self.jump_times, t, side="left"))
        return Field(self.layout, self.marks[:count].sum(axis=0))

    def total(self) -> Field:
        return Field(self.layout, self.marks.sum(axis=0))

    def binned(self, dt: float) -> "LevyPath":
        """Copy carrying step increments for `dt`."""
        return replace(self, dt=dt, step_increments=bin_increments(self, dt))

    def increments_for(self, dt: float) -> np.ndarray:
        """Per-step increments for `dt`, reusing a stored binning when it matches."""
        if self.step_increments is not None and self.dt == dt:
            return self.step_increments
        return bin_increments(self, dt)


def sample_path(
    spec: JumpMeasureSpec, horizon: float, rng: np.random.Generator, dt: Optional[float] = None
) -> LevyPath:
    """
    Draw one compound Poisson path on (0, horizon].

    N ~ Poisson(lambda T); times i.i.d. uniform on (0, T], sorted; marks i.i.d.
    S * direction. Deterministic given the generator state.

    Args:
        spec: Jump measure
        horizon: T > 0
        rng: Seeded generator
        dt: Optional step; when given the path is returned already binned

    Returns:
        LevyPath
    """
    if not horizon > 0:
        raise InvalidInputError(f"Horizon must be positive, got {horizon}")

    n_jumps = int(rng.poisson(spec.intensity * horizon))
    times = np.sort(horizon * (1.0 - rng.random(n_jumps)))
    sizes = spec.mark_law.sample(rng, n_jumps)
    directions = spec.embedding.directions
    if directions.shape[0] == 1:
        picks = np.zeros(n_jumps, dtype=int)
    else:
        picks = rng.choice(directions.shape[0], size=n_jumps, p=spec.embedding.probabilities)
    marks = sizes[:, None] * directions[picks]

    path = LevyPath(horizon, times, marks, spec.layout)
    return path.binned(dt) if dt is not None else path


def bin_increments(path: LevyPath, dt: float) -> np.ndarray:
    """
    Aggregate jumps into per-step increments on t_m = m * dt.

    Bins are right-closed: step m collects jumps with t_m < tau <= t_{m+1}, so a
    jump exactly on t_m belongs to step m - 1.

    Args:
        path: Levy path
        dt: Step dividing the horizon

    Returns:
        Array (M, layout.size)
    """
    ratio = path.horizon / dt
    steps = int(round(ratio))
    if steps < 1 or abs(ratio - steps) > 1e-9 * max(1.0, ratio):
        raise InvalidInputError(f"dt = {dt} does not divide T = {path.horizon}")

    times = path.jump_times
    if times.size and (times[0] <= 0 or times[-1] > path.horizon):
        raise SamplerContractError(
            f"Jump times must lie in (0, {path.horizon}], got [{times[0]}, {times[-1]}]"
        )

    edges = dt * np.arange(steps + 1)
    index = np.searchsorted(edges, times, side="left") - 1
    index = np.clip(index, 0, steps - 1)

    increments = np.zeros((steps, path.layout.size))
    np.add.at(increments, index, path.marks)
    return increments


# ===== Covariance =====


@dataclass(frozen=True, eq=False)
class QOperator:
    """
    Diagonal covariance operator Q in the grid/component basis.

    Attributes:
        diagonal: Non-negative q_i, one per entry
    """

    diagonal: np.ndarray

    def __post_init__(self) -> None:
        diagonal = np.array(self.diagonal, dtype=float).reshape(-1)
        if np.any(diagonal < 0) or not np.all(np.isfinite(diagonal)):
            raise InvalidInputError("Q diagonal must be finite and non-negative")
        diagonal.flags.writeable = False
        object.__setattr__(self, "diagonal", diagonal)
        object.__setattr__(self, "_sqrt", np.sqrt(diagonal))

    @staticmethod
    def identity(size: int) -> "QOperator":
        return QOperator(np.ones(size))

    @staticmethod
    def uniform(
        layout: FieldLayout, trace: float, components: Optional[Sequence[int]] = None
    ) -> "QOperator":
        """Spread `trace` evenly over the entries of the listed components."""
        if trace < 0:
            raise InvalidInputError(f"Tr Q must be non-negative, got {trace}")
        selected = list(range(layout.components)) if components is None else list(components)
        if not selected or any(not 0 <= c < layout.components for c in selected):
            raise InvalidInputError(f"Invalid Q components {selected}")
        blocks = np.zeros((layout.components, layout.n_nodes))
        blocks[selected, :] = trace / (len(selected) * layout.n_nodes)
        return QOperator(blocks.reshape(-1))

    @property
    def size(self) -> int:
        return self.diagonal.shape[0]

    @property
    def trace(self) -> float:
        return float(np.sum(self.diagonal))

    @property
    def sqrt_diagonal(self) -> np.ndarray:
        return self._sqrt  # type: ignore[attr-defined]


def apply_sqrt_q(q: QOperator, x: FieldLike) -> FieldLike:
    """Entrywise sqrt(q_i) * x_i; accepts a Field or an array (..., size)."""
    values = values_of(x)
    if values.shape[-1] != q.size:
        raise DimensionMismatchError(f"Q of size {q.size} applied to size {values.shape[-1]}")
    result = q.sqrt_diagonal * values
    if isinstance(x, Field):
        return Field(x.layout, result)
    return result
