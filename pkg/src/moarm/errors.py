"""Exception hierarchy.

Input problems derive from :class:`InputError` and infeasibility conditions
from :class:`InfeasibleError`; the CLI maps them to exit codes 2 and 3.
"""


class ArmError(Exception):
    """Base class for every error raised by this package."""


class InputError(ArmError, ValueError):
    """Bad user input: malformed files, invalid parameters, contract violations."""


class InfeasibleError(ArmError, RuntimeError):
    """The requested computation cannot be carried out on this instance."""


# dataset
class EmptyDataset(InputError):
    pass


class MalformedCell(InputError):
    def __init__(self, row: int, col: int, value: str):
        super().__init__(f"cell at row {row}, column {col} is {value!r}, expected 0 or 1")
        self.row = row
        self.col = col


class EmptyTransaction(InputError):
    def __init__(self, line: int):
        super().__init__(f"transaction on line {line} has no items")
        self.line = line


class DuplicateItem(InputError):
    pass


class EmptyItemSet(InputError):
    pass


class InvalidDensity(InputError):
    pass


# rules
class MalformedEncoding(InputError):
    pass


class InvalidRule(InputError):
    pass


class UndefinedConfidence(InvalidRule):
    pass


# variation
class TooFewItems(InputError):
    pass


class SeedingImpossible(InfeasibleError):
    pass


class GeneLengthMismatch(InputError):
    pass


class RepairExhausted(InfeasibleError):
    pass


class PopulationTooLargeForRuleSpace(InfeasibleError):
    pass


# optimizers
class NaNObjective(InputError):
    pass


class InvalidDivisions(InputError):
    pass


class SelectionOverdraw(InputError):
    pass


class DegenerateWeight(InputError):
    pass


class NeighborhoodOverdraw(InputError):
    pass


# quality / oracle / harness
class EmptySolutionSet(InputError):
    pass


class PointBelowReference(InputError):
    pass


class InstanceTooLarge(InfeasibleError):
    pass


class MissingReferenceFront(InputError):
    pass
