"""Exception types raised across the package."""


class RmteError(Exception):
    """Base class for all package errors."""


class DimensionError(RmteError, ValueError):
    """A matrix or vector dimension is invalid (e.g. zero)."""


class DomainError(RmteError, ValueError):
    """An argument lies outside the domain of a formula."""


class CapacityError(RmteError):
    """A requested size exceeds a configured guard."""

    def __init__(self, message, limit=None):
        super().__init__(message)
        self.limit = limit


class AccuracyError(RmteError):
    """A numerical result failed its accuracy check."""

    def __init__(self, message, estimate=None, residual=None):
        super().__init__(message)
        self.estimate = estimate
        self.residual = residual


class ConvergenceError(RmteError):
    """An iterative solver did not converge."""


class DivergenceError(RmteError):
    """A quantity diverges for the given parameters."""


class UnsupportedOrderError(RmteError, ValueError):
    """A moment order without an available formula was requested."""


class ThoulessNotFound(RmteError):
    """The Thouless criterion is never met on the available time grid."""

    def __init__(self, message, min_deviation):
        super().__init__(message)
        self.min_deviation = min_deviation


class ConfigError(RmteError, ValueError):
    """An experiment configuration is invalid."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field


class RealizationError(RmteError):
    """Wraps a failure inside a single ensemble realization."""

    def __init__(self, index, cause):
        super().__init__(f"realization {index} failed: {cause}")
        self.index = index
        self.cause = cause
