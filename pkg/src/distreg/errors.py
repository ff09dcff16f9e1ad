"""Exception hierarchy.

Every error carries an ``exit_code`` used by the command-line front end:

====  ==========================================
code  meaning
====  ==========================================
2     invalid arguments / dimension mismatch
3     bad or degenerate data
4     numerical failure (singular design, ...)
5     file I/O failure
6     no usable rows (empty file or all rows missing)
7     non-numeric response column
====  ==========================================
"""


class DistregError(Exception):
    exit_code = 1


class ArgumentError(DistregError, ValueError):
    exit_code = 2


class DataError(DistregError, ValueError):
    exit_code = 3


class DegenerateDataError(DataError):
    """Sample has no spread (all values identical, zero variance column, ...)."""


class EmptyDataError(DataError):
    exit_code = 6


class NonNumericResponseError(DataError):
    exit_code = 7


class NumericError(DistregError, ArithmeticError):
    exit_code = 4


class SingularDesignError(NumericError):
    """Design matrix ``[1 X]`` is rank deficient."""


class SelectionError(NumericError):
    """Every fit along a penalty path was degenerate."""


class HarnessError(NumericError):
    """Too many replicate fits failed in a Monte Carlo run."""


class FileIOError(DistregError, OSError):
    exit_code = 5
