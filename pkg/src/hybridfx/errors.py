"""Exception types shared by every module.

The CLI maps each class to an exit code (see ``hybridfx.cli``).
"""


class HybridFxError(Exception):
    """Base class for library errors."""


class ConfigError(HybridFxError, ValueError):
    """Bad configuration key or value."""


class DataError(HybridFxError, ValueError):
    """Input data violates a precondition (length, finiteness, ordering...)."""


class NumericError(HybridFxError, ArithmeticError):
    """A numerical routine failed (singular system, non-finite result)."""
