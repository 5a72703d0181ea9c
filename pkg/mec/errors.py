"""Error kinds raised across the package, plus the non-exceptional rejection markers."""

from enum import Enum


class MecError(ValueError):
    """Base class for every domain error raised by mec."""


# --- exact arithmetic ---
class MalformedNumber(MecError):
    pass


class NotSquare(MecError):
    pass


class DimensionMismatch(MecError):
    pass


# --- distributions and couplings ---
class NonPositiveEntry(MecError):
    pass


class SumNotOne(MecError):
    pass


class ShapeMismatch(MecError):
    pass


class TooLarge(MecError):
    pass


class LengthMismatch(MecError):
    pass


class SumMismatch(MecError):
    pass


# --- support graph ---
class NotTwoMarginal(MecError):
    pass


class NotForest(MecError):
    pass


# --- enumeration ---
class OutOfBounds(MecError):
    pass


class RankOutOfRange(MecError):
    pass


class SizeMismatch(MecError):
    pass


class BudgetExceeded(MecError):
    """Raised before a scan whose candidate count is above the configured budget."""

    def __init__(self, count, budget):
        self.count = count
        self.budget = budget
        super().__init__(
            f"{count} candidate subsets exceed the budget of {budget}"
        )


class NotATree(MecError):
    pass


# --- entropy ---
class AlphaIsOne(MecError):
    pass


class NonFiniteResult(MecError):
    pass


class EmptySet(MecError):
    pass


# --- local optimisation ---
class StepLimitExceeded(MecError):
    pass


# --- problem files ---
class InvalidOption(MecError):
    """An option value of the wrong type, e.g. a budget that is not a whole number."""


class Rejection(Enum):
    """Why a candidate support does not yield a coupling."""

    SINGULAR = "Singular"
    INFEASIBLE = "Infeasible"

    def __str__(self):
        return self.value
