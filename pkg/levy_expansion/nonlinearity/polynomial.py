"""
Polynomial Nemytskii nonlinearity.

F acts pointwise: component c of F(u) is g_c(u_c(x)) for a scalar polynomial g_c
of odd degree with negative leading coefficient, or 0 when the component is
inactive. Frechet derivatives are pointwise products
g_c^{(j)}(w) h_1 ... h_j.
"""

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple, TypeVar

import numpy as np
from numpy.polynomial import polynomial as P

from levy_expansion.core.data_structures import Field, FieldLike, values_of
from levy_expansion.core.exceptions import DimensionMismatchError, InvalidInputError

T = TypeVar("T", Field, np.ndarray)


def _rewrap(template: FieldLike, values: np.ndarray) -> FieldLike:
    """Return `values` with the same type (Field or array) as `template`."""
    if isinstance(template, Field):
        return Field(template.layout, values)
    return values


def _max_of_derivative(coefficients: np.ndarray) -> float:
    """
    sup_v g'(v) for an odd-degree g with negative leading coefficient.

    g' is then an even-degree polynomial going to -inf at both ends, so the
    supremum is attained at a real root of g''.
    """
    first = P.polyder(coefficients)
    if len(first) == 1:
        return float(first[0])
    if len(first) == 3:
        # g'(v) = c0 + c1 v + c2 v^2, c2 < 0: vertex
        c0, c1, c2 = first
        return float(c0 - c1 * c1 / (4.0 * c2))
    roots = P.polyroots(P.polyder(first))
    real = roots[np.abs(roots.imag) <= 1e-10 * (1.0 + np.abs(roots.real))].real
    return float(np.max(P.polyval(real, first)))


@dataclass(frozen=True, eq=False)
class PolynomialMap:
    """
    Component-wise polynomial nonlinearity.

    Attributes:
        per_component: Ascending coefficients (a0, ..., ad) per component, or None
            for an inactive (zero) component
        eta: Dissipativity gap, max over components of sup g'
    """

    per_component: Tuple[Optional[np.ndarray], ...]
    eta: float = field(init=False)
    _derivatives: Tuple[Tuple[np.ndarray, ...], ...] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        cleaned = []
        derivatives = []
        for index, coefficients in enumerate(self.per_component):
            if coefficients is None:
                cleaned.append(None)
                derivatives.append(())
                continue
            coefficients = P.polytrim(np.asarray(coefficients, dtype=float), tol=0)
            if len(coefficients) == 1 and coefficients[0] == 0:
                cleaned.append(None)
                derivatives.append(())
                continue
            degree = len(coefficients) - 1
            if degree % 2 == 0:
                raise InvalidInputError(
                    f"Component {index}: degree {degree} is even; an odd degree is required"
                )
            if coefficients[-1] >= 0:
                raise InvalidInputError(
                    f"Component {index}: leading coefficient {coefficients[-1]} must be negative "
                    "(otherwise eta = +inf)"
                )
            cleaned.append(coefficients)
            chain = [coefficients]
            for _ in range(degree):
                chain.append(P.polyder(chain[-1]))
            derivatives.append(tuple(chain))

        if not cleaned:
            raise InvalidInputError("PolynomialMap needs at least one component")

        object.__setattr__(self, "per_component", tuple(cleaned))
        object.__setattr__(self, "_derivatives", tuple(derivatives))

        gaps = [_max_of_derivative(c) for c in cleaned if c is not None]
        if any(c is None for c in cleaned):
            # inactive components have g' = 0
            gaps.append(0.0)
        object.__setattr__(self, "eta", max(gaps))

    # ===== Constructors =====

    @staticmethod
    def fhn(xi: float, components: int = 2) -> "PolynomialMap":
        """g(v) = -v(v - 1)(v - xi) on the first component, zero elsewhere."""
        if not 0 < xi < 1:
            raise InvalidInputError(f"xi must lie in (0, 1), got {xi}")
        cubic = np.array([0.0, -xi, 1.0 + xi, -1.0])
        return PolynomialMap((cubic,) + (None,) * (components - 1))

    @staticmethod
    def zero(components: int) -> "PolynomialMap":
        return PolynomialMap((None,) * components)

    @staticmethod
    def linear(rate: float, components: int = 1, active: Sequence[int] = (0,)) -> "PolynomialMap":
        """g(v) = rate * v on the active components."""
        return PolynomialMap(
            tuple(np.array([0.0, rate]) if c in active else None for c in range(components))
        )

    # ===== Properties =====

    @property
    def components(self) -> int:
        return len(self.per_component)

    @property
    def degree(self) -> int:
        """Largest active degree (0 for the zero map)."""
        return max((len(c) - 1 for c in self.per_component if c is not None), default=0)

    @property
    def is_linear(self) -> bool:
        return self.degree <= 1

    # ===== Operations =====

    def _blocks(self, values: np.ndarray) -> np.ndarray:
        if values.shape[-1] % self.components:
            raise DimensionMismatchError(
                f"Size {values.shape[-1]} is not a multiple of {self.components} components"
            )
        return values.reshape(values.shape[:-1] + (self.components, -1))

    def derivative_values(self, order: int, w: np.ndarray) -> np.ndarray:
        """
        Pointwise g^{(order)}(w) per component (zeros beyond the degree).

        Works on arrays with any leading shape (..., m * n).
        """
        if order < 0:
            raise InvalidInputError(f"Derivative order must be >= 0, got {order}")
        w = np.asarray(w, dtype=float)
        blocks = self._blocks(w)
        out = np.zeros_like(blocks)
        for c, chain in enumerate(self._derivatives):
            if order < len(chain):
                out[..., c, :] = P.polyval(blocks[..., c, :], chain[order])
        return out.reshape(w.shape)

    def evaluate(self, u: T) -> T:
        """Pointwise F(u)."""
        return _rewrap(u, self.derivative_values(0, values_of(u)))

    def frechet(self, order: int, w: T, *directions: FieldLike) -> T:
        """
        j-th Frechet derivative of F at w applied to (h_1, ..., h_j).

        Order 0 returns F(w). The result is symmetric in the directions and
        vanishes for order > degree.
        """
        if len(directions) != order:
            raise InvalidInputError(f"Order {order} needs {order} directions, got {len(directions)}")
        result = self.derivative_values(order, values_of(w))
        for h in directions:
            h_values = values_of(h)
            if h_values.shape[-1] != result.shape[-1]:
                raise DimensionMismatchError("Direction size does not match the base point")
            result = result * h_values
        return _rewrap(w, result)

    def taylor_eval(self, w: T, h: FieldLike, order: int) -> T:
        """
        Taylor polynomial sum_{j=0}^{order} F^{(j)}(w)[h, ..., h] / j!.

        Equals F(w + h) exactly once order >= degree.
        """
        if order < 0:
            raise InvalidInputError(f"Taylor order must be >= 0, got {order}")
        w_values = values_of(w)
        h_values = values_of(h)
        total = np.zeros_like(w_values)
        power = np.ones_like(w_values)
        for j in range(min(order, self.degree) + 1):
            total = total + self.derivative_values(j, w_values) * power / math.factorial(j)
            power = power * h_values
        return _rewrap(w, total)

    def dissipativity_gap(self) -> float:
        """eta such that <F(u) - F(v) - eta (u - v), u - v> <= 0."""
        return self.eta

    def __repr__(self) -> str:
        active = sum(c is not None for c in self.per_component)
        return f"PolynomialMap({active}/{self.components} active, degree {self.degree}, eta={self.eta:.4g})"
