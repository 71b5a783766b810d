"""Exception hierarchy shared by every module.

The CLI maps these onto exit codes: invalid input -> 2, infeasible
constraints -> 3, numeric failure -> 4.
"""

from __future__ import annotations


class BlueEPError(Exception):
    """Base class for all package errors."""


class InvalidInputError(BlueEPError, ValueError):
    """Non-finite, out-of-domain or otherwise malformed input."""


class NotApplicableError(BlueEPError, ValueError):
    """The requested quantity is undefined for these inputs."""


class NumericFailureError(BlueEPError, ArithmeticError):
    """An iterative method did not converge."""

    def __init__(self, message: str, residual: float = float("nan")):
        super().__init__(message)
        self.residual = residual


class InfeasibleError(BlueEPError, ValueError):
    """Pseudo-Hermitian or EP3 constraints cannot be met."""


class InfeasibleCouplingError(InfeasibleError):
    """Coupling below the minimum that keeps the detuning real."""

    def __init__(self, message: str, g_min: float):
        super().__init__(message)
        self.g_min = g_min


class InfeasibleLambdaError(InfeasibleError):
    """Coupling ratio violates (1 + eta)(1 + lambda^2 eta) > 0."""


class Ep3InfeasibleEtaError(InfeasibleError):
    """eta outside (-2, -1/2), where no third-order EP exists."""


class UndefinedLambdaError(InvalidInputError):
    """G_a = 0, so the ratio G_c / G_a is undefined."""
