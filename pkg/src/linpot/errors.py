"""Exception types and process exit codes."""

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_VALIDITY = 3
EXIT_VERIFY = 4


class LinpotError(Exception):
    """Base class for all package errors."""


class ConfigError(LinpotError):
    """Invalid run configuration or scenario parameters."""


class DomainError(LinpotError):
    """Profile evaluated outside its domain of definition."""


class NumericError(LinpotError):
    """Non-finite value or non-convergent limit met during a computation."""

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class ValidityWindowError(LinpotError):
    """Requested horizon extends past (or too close to) the zero of b(t)."""

    def __init__(self, message, t_star):
        super().__init__(message)
        self.t_star = t_star


class SingularityError(LinpotError):
    """Evaluation at or past a zero of b(t)."""


class GridCoverageError(LinpotError):
    """Grid (space or momentum) too small for the field's support."""


class WindowTooSmallError(LinpotError):
    """Spectral integration window clips a non-negligible boundary value."""


class UnsupportedFieldError(LinpotError):
    """Operation requires an analytically continuable field."""


class InstabilityError(LinpotError):
    """Propagation aborted after an excessive conserved-norm drift."""
