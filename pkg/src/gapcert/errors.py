"""Exception hierarchy shared by all gapcert modules."""


class GapCertError(Exception):
    """Base class for every error raised by gapcert."""


class DomainError(GapCertError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class UsageError(GapCertError, ValueError):
    """Inconsistent request, e.g. a map class that does not match the function space."""


class ValidationError(GapCertError, ValueError):
    """User-supplied data failed a structural check.

    ``witnesses`` carries the offending points or indices when available.
    """

    def __init__(self, message, witnesses=None):
        super().__init__(message)
        self.witnesses = list(witnesses) if witnesses is not None else []


class CapabilityError(GapCertError):
    """The request is well posed but exceeds what the exact routine supports."""


class ConvergenceError(GapCertError, RuntimeError):
    """An iterative solver stopped before reaching its tolerance."""

    def __init__(self, message, residuals=None, iterations=None):
        super().__init__(message)
        self.residuals = residuals
        self.iterations = iterations


class InequalityViolation(GapCertError, AssertionError):
    """A bound that must hold by construction was numerically violated."""
