"""Best-subset selection for store-choice regression with hierarchical constraints.

Exact anytime branch-and-bound under basic, strong-hierarchical, and
weak-hierarchical selection rules, plus stepwise-AIC and L1 baselines
and a cross-validation comparison harness.
"""

__version__ = "0.1.0"

from .baselines import LassoPath, LassoSelection, StepwiseTrace, lasso_cd, lasso_path, lasso_select, stepwise
from .datakit import (
    Dataset,
    Hierarchy,
    SyntheticConfig,
    VariableMeta,
    drop_redundant,
    generate,
    load_csv,
    load_groups,
    load_hierarchy,
    remap_hierarchy,
)
from .evaluation import CvReport, compare, cross_validate, kfold_split
from .kernels import BACKEND as kernel_backend
from .linalg import FitResult, IncrementalFit, InferenceReport, infer, ols_fit, r_squared, rmse
from .solver import (
    SelectionState,
    SolveOutcome,
    SolverConfig,
    enumerate_exact,
    lower_bound,
    propagate,
    solve,
)

__all__ = [
    "__version__",
    "kernel_backend",
    "Dataset",
    "Hierarchy",
    "VariableMeta",
    "SyntheticConfig",
    "load_csv",
    "load_groups",
    "load_hierarchy",
    "drop_redundant",
    "remap_hierarchy",
    "generate",
    "FitResult",
    "IncrementalFit",
    "InferenceReport",
    "ols_fit",
    "infer",
    "r_squared",
    "rmse",
    "SolverConfig",
    "SelectionState",
    "SolveOutcome",
    "propagate",
    "lower_bound",
    "solve",
    "enumerate_exact",
    "StepwiseTrace",
    "LassoPath",
    "LassoSelection",
    "stepwise",
    "lasso_cd",
    "lasso_path",
    "lasso_select",
    "CvReport",
    "kfold_split",
    "cross_validate",
    "compare",
]
