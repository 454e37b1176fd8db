"""Exception types shared across the package."""


class HbselectError(Exception):
    """Base class for all package errors."""


class DataValidationError(HbselectError):
    """Input data violates a documented invariant."""


class CsvParseError(DataValidationError):
    """A cell of an input file could not be parsed; names row and column."""


class HierarchyError(DataValidationError):
    """Hierarchy file references unknown variables or breaks the triple rules."""


class InfeasibleConfigError(HbselectError):
    """Synthetic-data config asks for a support that violates its hierarchy mode."""


class DimensionError(HbselectError):
    """Support too large for the sample count, or shape mismatch."""


class InferenceUnavailableError(HbselectError):
    """Coefficient inference impossible (rank-deficient support or dof <= 0)."""


class UndefinedRSquaredError(HbselectError):
    """Evaluation fold has constant y, so TSS = 0 and R-squared is undefined."""


class SolverInfeasibleError(HbselectError):
    """No feasible selection exists for the given constraints."""
