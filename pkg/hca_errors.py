"""
Error types for the HCA-DBSCAN toolkit.

Two families, mapped to CLI exit codes by run_hca.py:
- DataError  -> exit 1 (bad input data or files)
- UsageError -> exit 2 (bad parameters or configuration)
"""


class HcaError(Exception):
    """Base class for every error raised by this toolkit."""


class DataError(HcaError):
    exit_code = 1


class UsageError(HcaError):
    exit_code = 2


class EmptyInput(DataError, ValueError):
    def __init__(self, message="dataset is empty"):
        super().__init__(message)


class NotOriginShifted(DataError, ValueError):
    def __init__(self, coords):
        super().__init__(f"point {list(coords)} has a negative coordinate; shift the origin first")


class WrongCell(DataError, ValueError):
    def __init__(self, point_index, expected, actual):
        self.point_index = point_index
        super().__init__(f"point {point_index} belongs to cell {actual}, not {expected}")


class DataIoError(DataError, OSError):
    pass


class SchemaError(DataError, ValueError):
    def __init__(self, row, message):
        self.row = row
        super().__init__(f"row {row}: {message}")


class ParseError(DataError, ValueError):
    def __init__(self, row, column, value):
        self.row = row
        self.column = column
        super().__init__(f"row {row}, column {column}: cannot parse {value!r} as a finite number")


class InvalidEpsilon(UsageError, ValueError):
    def __init__(self, epsilon):
        super().__init__(f"epsilon must be positive (got {epsilon})")


class ConfigMismatch(UsageError, ValueError):
    pass


class LabelingMismatch(UsageError, ValueError):
    def __init__(self, len_a, len_b):
        super().__init__(f"labelings have different lengths: {len_a} vs {len_b}")


class UnsupportedDimension(UsageError, ValueError):
    pass


class SettingsError(UsageError, ValueError):
    pass


class InvalidGeneratorSpec(UsageError, ValueError):
    pass
