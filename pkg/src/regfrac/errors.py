class RegfracError(Exception):
    """Base class for all package errors."""


class DomainError(RegfracError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class SingularityError(DomainError):
    """A kernel was evaluated exactly on its singular set."""


class ConfigurationError(RegfracError, ValueError):
    """Invalid grid, quadrature or run configuration."""


class PreconditionError(RegfracError, ValueError):
    """Input data violates the hypotheses an operation relies on."""


class VerificationFailure(RegfracError):
    """A computed quantity violates a property it is proven to satisfy."""

    def __init__(self, message, measured=None, tolerance=None, reference=None):
        super().__init__(message)
        self.measured = measured
        self.tolerance = tolerance
        self.reference = reference


class SolverError(RegfracError):
    """A linear factorization failed or produced non-finite values."""
