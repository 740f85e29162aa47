"""Exception types shared across the package."""


class KovtopError(Exception):
    """Base class for all package errors."""


class DimensionError(KovtopError):
    """State dimension does not match what the operation expects."""


class ParameterError(KovtopError):
    """A parameter is outside its admissible range."""


class DomainError(KovtopError):
    """Evaluation requested outside the real domain of the expression."""


class SingularStepError(KovtopError):
    """A map step hit (or came numerically indistinguishable from) its
    singular variety.  Carries the offending state and step parameter."""

    def __init__(self, message, state=None, eps=None):
        super().__init__(message)
        self.state = state
        self.eps = eps


class BlowupError(KovtopError):
    """Trajectory left the finite region during integration."""

    def __init__(self, message, last_time=None, last_state=None):
        super().__init__(message)
        self.last_time = last_time
        self.last_state = last_state


class ConfigError(KovtopError):
    """Invalid run configuration (CLI)."""
