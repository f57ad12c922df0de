"""Exception types raised by the numerical routines."""


class HeatRKHSError(Exception):
    """Base class for all library errors."""


class DomainError(HeatRKHSError, ValueError):
    """A point lies outside the admissible domain of an operation."""


class TruncationFailure(HeatRKHSError, ArithmeticError):
    """A series could not be certified within the allowed half-width."""


class PoleProximity(HeatRKHSError, ArithmeticError):
    """An evaluation came too close to a pole of a closed-form kernel."""


class IllConditioned(HeatRKHSError, ArithmeticError):
    """Cholesky factorization failed even after jitter escalation."""
