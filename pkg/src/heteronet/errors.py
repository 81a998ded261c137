"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class HeteronetError(Exception):
    """Base class for every error raised by this package."""


class InvalidArgumentError(HeteronetError, ValueError):
    pass


class UnsupportedError(HeteronetError, ValueError):
    """Requested construction is outside what the general formulas cover."""


class CalibrationError(HeteronetError):
    """No epsilon on the calibration grid satisfies the perturbation bound."""


class ConstructionViolation(HeteronetError):
    """A built field does not have the equilibrium structure it must have."""


class NonHyperbolicError(HeteronetError):
    """An equilibrium has an eigenvalue too close to zero to classify."""

    def __init__(self, message: str, epsilon: float | None = None):
        super().__init__(message)
        self.epsilon = epsilon
