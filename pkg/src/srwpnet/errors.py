"""Exception hierarchy shared by the analytic and simulation modules."""


class SrwpError(Exception):
    """Base class for all package errors."""


class DomainError(SrwpError, ValueError):
    """An argument lies outside the domain of the operation."""


class DivergenceError(DomainError):
    """A requested integral diverges for the given parameters."""


class QuadratureError(SrwpError, ArithmeticError):
    """Adaptive quadrature failed to meet its tolerance.

    The best available estimate and its error bound are kept on the
    exception so callers can decide whether to accept them.
    """

    def __init__(self, message, estimate=None, error=None):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class NumericalConsistencyError(SrwpError, ArithmeticError):
    """A computed quantity left its admissible range by more than the guard."""


class AtomicDistributionError(DomainError):
    """Pointwise density requested for a distribution that is a point mass."""


class PhaseError(DomainError):
    """Operation requested in the wrong mobility phase (hover vs. flight)."""


class UndefinedBearingError(DomainError):
    """Bearing of a zero-length displacement vector."""
