"""Exception types raised across the package."""

from __future__ import annotations


class EmergenceError(Exception):
    """Base class for all package errors."""


class TpmValidationError(EmergenceError, ValueError):
    pass


class NonSquare(TpmValidationError):
    pass


class NegativeEntry(TpmValidationError):
    def __init__(self, row: int, col: int, value: float):
        super().__init__(f"negative entry {value!r} at row {row}, column {col}")
        self.row = row
        self.col = col
        self.value = value


class RowSumOutOfTolerance(TpmValidationError):
    def __init__(self, row: int, total: float, tol: float):
        super().__init__(f"row {row} sums to {total!r} (tolerance {tol:g})")
        self.row = row
        self.total = total


class DistributionError(EmergenceError, ValueError):
    pass


class AbsoluteContinuityViolation(DistributionError):
    def __init__(self, index: int):
        super().__init__(f"p[{index}] > 0 but q[{index}] == 0")
        self.index = index


class StateOutsideSupport(EmergenceError, ValueError):
    pass


class InvalidPartition(EmergenceError, ValueError):
    pass


class EmptyEndogenous(EmergenceError, ValueError):
    pass


class MassEscapesEndogenous(EmergenceError, ValueError):
    """An endogenous state transitions into an exogenous one."""

    def __init__(self, row: int, leaked: float):
        super().__init__(
            f"state {row} sends mass {leaked!r} to exogenous states"
        )
        self.row = row
        self.leaked = leaked


class NetworkError(EmergenceError, ValueError):
    pass


class FanInStateMissing(NetworkError):
    pass


class TooManyElements(NetworkError):
    pass


class NotConverged(EmergenceError):
    """Iteration budget exhausted; ``result`` holds the best-so-far value."""

    def __init__(self, result, message: str = "did not converge"):
        super().__init__(message)
        self.result = result


class RefusedAboveThreshold(EmergenceError):
    def __init__(self, count: int, budget: float):
        super().__init__(
            f"search would evaluate {count} choices, above budget {budget:g}"
        )
        self.count = count
        self.budget = budget


class IndivisibleMessage(EmergenceError, ValueError):
    pass
