"""Exception hierarchy shared by all modules."""


class BlochGaugeError(Exception):
    """Base class for every error raised by this package."""


class DomainError(BlochGaugeError, ValueError):
    """An argument lies outside the domain of the operation."""


class PreconditionError(BlochGaugeError, ValueError):
    """Input violates a caller-side precondition (e.g. |g| > 1 for the Schwarz-Pick margin)."""


class SingularityError(BlochGaugeError, ArithmeticError):
    """Evaluation point too close to a kernel singularity (atom or zero on a contour)."""

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


class InconsistencyError(BlochGaugeError, ArithmeticError):
    """A numerical invariant that must hold by construction was violated."""

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


class ConfigError(BlochGaugeError, ValueError):
    """Malformed or out-of-range audit configuration."""
