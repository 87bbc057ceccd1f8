"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: ConfigError -> 2, DataFormatError -> 3,
NumericalError -> 4.
"""


class LinecallError(Exception):
    """Base class for package errors."""


class ConfigError(LinecallError):
    """Invalid or inconsistent configuration."""


class DataFormatError(LinecallError):
    """Malformed input data (CSV schema, missing columns, bad values)."""


class NumericalError(LinecallError):
    """A computation cannot be carried out (degenerate inputs, boundary
    posteriors, zero denominators)."""
