"""Exception types shared across the package.

The CLI maps these onto distinct exit codes (see cli.py): configuration
problems exit 2, I/O problems 3, schema/validation problems 4, numeric
failures 5.
"""


class SocdfnError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(SocdfnError, ValueError):
    """Invalid run configuration: bad fractions, fold counts, layer sizes."""


class ShapeError(SocdfnError, ValueError):
    """Dimension mismatch between arrays, layers, or gradients."""


class DataError(SocdfnError, ValueError):
    """Malformed or invalid input data (CSV schema, parse, bounds)."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class DegenerateFeatureError(DataError):
    """A feature is constant on the fit set, so it cannot be normalized."""


class ModelFormatError(DataError):
    """Model file is corrupt, truncated, or has an unsupported version."""


class ContractError(SocdfnError, RuntimeError):
    """An API precondition was violated (stale cache, unfitted normalizer)."""


class NumericError(SocdfnError, ArithmeticError):
    """Training produced a non-finite loss or otherwise diverged."""
