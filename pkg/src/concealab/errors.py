"""Exception hierarchy for concealab.

Every error raised deliberately by this package derives from ConcealabError,
so callers (and the CLI) can catch one type and report a single line.
"""


class ConcealabError(Exception):
    """Base class for all concealab errors."""


class SpecError(ConcealabError):
    """Invalid configuration: bad shapes, unknown names, out-of-range values."""


class DimensionError(ConcealabError):
    """Array dimensions do not match what an operation requires."""


class NumericError(ConcealabError):
    """Numerical failure: NaN/inf appeared where finite values are required."""


class DataError(ConcealabError):
    """Malformed data file or series: bad CSV, missing columns, label issues."""
