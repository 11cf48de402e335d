"""Exception hierarchy shared across the package."""


class QrngError(Exception):
    """Base class for every error raised by qrngsim."""


class ParameterDomainError(QrngError, ValueError):
    """A numeric argument lies outside the domain of the operation."""


class EmptyInputError(QrngError, ValueError):
    """The operation needs at least one bit (or one counted event)."""


class InsufficientDataError(QrngError, ValueError):
    """A statistical test was handed a stream too short for its parameters."""


class ConfigError(QrngError, ValueError):
    """A device or run configuration violates one of its invariants."""

    def __init__(self, message, path=None):
        super().__init__(message)
        self.path = path


class CapacityError(QrngError, OverflowError):
    """A requested size exceeds what the implementation can represent."""
