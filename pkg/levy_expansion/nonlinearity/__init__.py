"""Polynomial Nemytskii nonlinearities and their Frechet derivatives."""

from levy_expansion.nonlinearity.polynomial import PolynomialMap

__all__ = ["PolynomialMap"]
