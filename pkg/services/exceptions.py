"""Error types raised by the toolkit services.

Every error carries the CLI exit code and the HTTP status the surfaces map it to.
"""
from typing import Optional

EXIT_DATA_ERROR = 3
EXIT_INFEASIBLE = 4


class BiasToolkitError(Exception):
    exit_code: int = EXIT_DATA_ERROR
    status_code: int = 422


# ---------------- data errors ----------------

class DataError(BiasToolkitError):
    exit_code = EXIT_DATA_ERROR
    status_code = 422


class MissingColumn(DataError):
    def __init__(self, column: str):
        super().__init__(f"Column '{column}' not found in file header")
        self.column = column


class UnparseableRow(DataError):
    def __init__(self, line: int, detail: str = ""):
        message = f"Unparseable row at line {line}"
        if detail:
            message = f"{message}: {detail}"
        super().__init__(message)
        self.line = line


class EmptyAfterFiltering(DataError):
    pass


class ArityMismatch(DataError):
    def __init__(self, expected: int, got: int):
        super().__init__(f"Expected {expected} input columns, got {got}")
        self.expected = expected
        self.got = got


class SingleClassTrainingSet(DataError):
    pass


class UndefinedMetric(DataError):
    def __init__(self, metric: str, reason: str):
        super().__init__(f"{metric} is undefined: {reason}")
        self.metric = metric
        self.reason = reason


class EmptySourcePool(DataError):
    pass


class TooFewMinorityPositives(DataError):
    pass


class NotTwoDimensional(DataError):
    pass


class AllAmountsUndefined(DataError):
    pass


class IoError(DataError):
    pass


# ---------------- infeasible configuration ----------------

class InfeasibleConfiguration(BiasToolkitError):
    exit_code = EXIT_INFEASIBLE
    status_code = 400


class InfeasibleQuota(InfeasibleConfiguration):
    def __init__(self, cell: str, value: float):
        super().__init__(f"Quota for cell {cell} is negative ({value:.3f})")
        self.cell = cell
        self.value = value


class StratumTooSmall(InfeasibleConfiguration):
    def __init__(self, stratum: str, size: int, needed: int = 2):
        super().__init__(f"Stratum {stratum} has {size} samples, needs at least {needed}")
        self.stratum = stratum
        self.size = size


class ClassTooSmall(InfeasibleConfiguration):
    def __init__(self, label: int, size: int, folds: Optional[int] = None):
        detail = f" for {folds} folds" if folds is not None else ""
        super().__init__(f"Class {label} has {size} samples{detail}")
        self.label = label
        self.size = size
