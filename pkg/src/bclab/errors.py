"""Exception hierarchy.

Every error carries a short machine-readable ``code`` so the CLI can emit
structured JSON on failure.
"""


class LabError(Exception):
    code = "error"


class DomainError(LabError, ValueError):
    """A parameter lies outside the mathematical domain of the operation."""

    code = "domain"


class ArgumentError(LabError, ValueError):
    code = "argument"


class ResourceError(LabError):
    """The request exceeds a hard work cap (e.g. more than 2^26 words)."""

    code = "resource"


class NumericError(LabError, ArithmeticError):
    code = "numeric"


class CapabilityError(LabError):
    """The observable's smoothness class does not support the request."""

    code = "capability"


class UnsupportedRegimeError(LabError):
    code = "unsupported-regime"


class RangeError(LabError):
    """A construction cannot be carried as far as requested."""

    code = "range"

    def __init__(self, message, largest_feasible=None):
        super().__init__(message)
        self.largest_feasible = largest_feasible


class ConfigError(LabError, ValueError):
    code = "config"
