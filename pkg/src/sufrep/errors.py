"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: ConfigError -> 1, DataError (and
subclasses) -> 2, TrainingError/NumericError -> 3.
"""


class SufrepError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(SufrepError):
    """Invalid configuration: bad widths, empty candidate sets, bad flags."""


class DataError(SufrepError):
    """Invalid data: non-finite values, malformed CSV, row-count mismatch."""


class ShapeError(DataError):
    """Dimension mismatch between arrays that must be compatible."""


class InsufficientSamplesError(DataError):
    """Too few rows for the requested estimator."""


class TrainingError(SufrepError):
    """Optimization produced a non-finite loss or gradient."""


class NumericError(SufrepError):
    """A numeric operation produced non-finite values outside training."""
