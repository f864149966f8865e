"""Exception hierarchy for levy_expansion."""

from typing import List, Optional


class LevyExpansionError(Exception):
    """Base exception for all library errors."""

    pass


class InvalidInputError(LevyExpansionError, ValueError):
    """Raised when an input violates a documented precondition."""

    pass


class DimensionMismatchError(InvalidInputError):
    """Raised when fields, matrices or paths have incompatible sizes."""

    pass


class GridMismatchError(InvalidInputError):
    """Raised when trajectories do not share a time grid."""

    pass


class CompositionRangeError(InvalidInputError):
    """Raised when a composition order is outside the supported range."""

    pass


class SamplerContractError(LevyExpansionError):
    """Raised when a sampled path violates the sampler contract (jump outside (0, T])."""

    pass


class OrderFitError(LevyExpansionError):
    """Raised when an order regression has fewer than three usable points."""

    pass


class BlowUpError(LevyExpansionError):
    """
    Raised when a solver state becomes non-finite or exceeds the blow-up threshold.

    Attributes:
        step: Time-step index at which the guard tripped
        omega: Dissipativity rate of the linear part
        eta: Dissipativity gap of the nonlinearity
    """

    def __init__(self, step: int, norm: float, omega: float, eta: float) -> None:
        self.step = step
        self.norm = norm
        self.omega = omega
        self.eta = eta
        super().__init__(
            f"Solution blew up at step {step} (|u|_w = {norm:.3e}); "
            f"omega = {omega:.4g}, eta = {eta:.4g}, omega - eta = {omega - eta:.4g}. "
            "Check that omega - eta > 0 and that dt is small enough."
        )


class ConfigError(LevyExpansionError):
    """
    Raised when an experiment configuration fails validation.

    Attributes:
        problems: One "key.path: message" entry per violated constraint
    """

    def __init__(self, problems: List[str], source: Optional[str] = None) -> None:
        self.problems = problems
        where = f" in {source}" if source else ""
        super().__init__(f"Invalid configuration{where}:\n  " + "\n  ".join(problems))
