"""
Exception hierarchy for combopredict

Every error carries a machine-readable ``category`` and the CLI ``exit_code``
it maps to. All classes derive from ValueError so callers that only know the
standard contract still catch them.
"""

from typing import Optional, Sequence


class ComboPredictError(ValueError):
    """Base error"""
    category: str = "error"
    exit_code: int = 1


class UsageError(ComboPredictError):
    """Bad command-line arguments"""
    category = "usage"
    exit_code = 2


class ParseError(ComboPredictError):
    """Malformed input file or cell"""
    category = "parse"
    exit_code = 3

    def __init__(self, message: str, row: Optional[int] = None):
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)
        self.row = row


class InvariantViolation(ComboPredictError):
    """Input parsed but breaks a domain invariant"""
    category = "invariant"
    exit_code = 4

    def __init__(self, message: str, row: Optional[int] = None):
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)
        self.row = row


class EmptySample(InvariantViolation):
    pass


class GridMismatch(InvariantViolation):
    pass


class OutOfRange(InvariantViolation):
    pass


class ModelError(ComboPredictError):
    """The requested model quantity does not exist for these inputs"""
    category = "infeasible-model"
    exit_code = 5


class InfeasibleCorrelation(ModelError):
    pass


class DegenerateRate(ModelError):
    pass


class DegenerateMargin(ModelError):
    pass


class NoResponders(ModelError):
    pass


class NoFeasibleSolution(ModelError):
    pass


class NonUnique(ModelError):
    """Several valid solutions; all are attached as ``roots``"""

    def __init__(self, message: str, roots: Sequence[float]):
        super().__init__(message)
        self.roots = tuple(roots)


__all__ = [
    'ComboPredictError',
    'UsageError',
    'ParseError',
    'InvariantViolation',
    'EmptySample',
    'GridMismatch',
    'OutOfRange',
    'ModelError',
    'InfeasibleCorrelation',
    'DegenerateRate',
    'DegenerateMargin',
    'NoResponders',
    'NoFeasibleSolution',
    'NonUnique',
]
