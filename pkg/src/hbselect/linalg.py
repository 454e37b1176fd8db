"""Dense least-squares fitting on a selected support, metrics, and inference.

The production fit path is a column-pivoted orthogonal factorization
(LAPACK gelsy), which returns the minimum-norm solution on rank-deficient
supports.  Incremental RSS bookkeeping for the search algorithms lives in
`IncrementalFit`, backed by the kernel backend.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.special import betainc

from . import kernels
from .datakit import Dataset
from .errors import DimensionError, InferenceUnavailableError, UndefinedRSquaredError

RANK_COND = 1e-10


@dataclass(frozen=True)
class FitResult:
    """Fitted intercept/coefficients with support mask, RSS, and residuals."""

    intercept: float
    a: np.ndarray
    support: np.ndarray
    rss: float
    residuals: np.ndarray

    def __post_init__(self):
        self.a.setflags(write=False)
        self.support.setflags(write=False)
        self.residuals.setflags(write=False)

    @property
    def support_indices(self) -> np.ndarray:
        return np.flatnonzero(self.support)

    @property
    def k(self) -> int:
        return int(self.support.sum())

    def predict(self, x: np.ndarray) -> np.ndarray:
        if x.shape[1] != self.a.shape[0]:
            raise DimensionError(f"matrix has {x.shape[1]} columns, fit expects {self.a.shape[0]}")
        return self.intercept + x @ self.a


def _as_support_mask(support, p: int) -> np.ndarray:
    arr = np.asarray(support)
    if arr.dtype == bool:
        if arr.shape != (p,):
            raise DimensionError(f"support mask has shape {arr.shape}, expected ({p},)")
        return arr
    mask = np.zeros(p, dtype=bool)
    mask[arr.astype(np.int64)] = True
    return mask


def ols_fit(dataset: Dataset, support) -> FitResult:
    """Least squares of y on the supported columns plus an intercept.

    `support` is a boolean p-mask or an index collection.  Rank-deficient
    supports get the minimum-norm solution; the reported RSS is exact
    either way.
    """
    mask = _as_support_mask(support, dataset.p)
    idx = np.flatnonzero(mask)
    k = idx.shape[0]
    if k + 1 > dataset.n:
        raise DimensionError(f"support of size {k} needs at least {k + 1} samples, have {dataset.n}")
    a_mat = np.empty((dataset.n, k + 1))
    a_mat[:, 0] = 1.0
    a_mat[:, 1:] = dataset.x[:, idx]
    coef, _, _, _ = scipy.linalg.lstsq(
        a_mat, dataset.y, cond=RANK_COND, lapack_driver="gelsy", check_finite=False
    )
    residuals = dataset.y - a_mat @ coef
    a = np.zeros(dataset.p)
    a[idx] = coef[1:]
    return FitResult(
        intercept=float(coef[0]),
        a=a,
        support=mask.copy(),
        rss=float(residuals @ residuals),
        residuals=residuals,
    )


# ---------------------------------------------------------------------------
# Centered Gram data and incremental fitting
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GramData:
    """Precomputed centered cross-products; everything the kernels need."""

    g: np.ndarray
    c: np.ndarray
    tss: float
    xbar: np.ndarray
    ybar: float
    n: int


def gram_data(dataset: Dataset) -> GramData:
    xbar = dataset.x.mean(axis=0)
    ybar = float(dataset.y.mean())
    xc = dataset.x - xbar
    yc = dataset.y - ybar
    return GramData(
        g=xc.T @ xc,
        c=xc.T @ yc,
        tss=float(yc @ yc),
        xbar=xbar,
        ybar=ybar,
        n=dataset.n,
    )


class IncrementalFit:
    """Grow a support one column at a time, tracking RSS incrementally.

    The intercept is always present (via centering) and never counts
    toward the support size.  Single-owner: not safe to share mid-update.
    """

    def __init__(self, dataset: Dataset, gram: GramData | None = None):
        self.dataset = dataset
        self.gram = gram if gram is not None else gram_data(dataset)
        self.state = kernels.CholState(self.gram.g, self.gram.c, self.gram.tss)
        self._members: list[int] = []

    @property
    def rss(self) -> float:
        return self.state.rss

    @property
    def support(self) -> list[int]:
        return list(self._members)

    def add(self, j: int) -> None:
        if j in self._members:
            raise ValueError(f"column {j} already in support")
        self.state.add(int(j))
        self._members.append(int(j))

    def rss_delta_add(self, j: int) -> float:
        """RSS(support + {j}) - RSS(support); <= 0, without mutating the state."""
        if j in self._members:
            raise ValueError(f"column {j} already in support")
        return self.state.delta_add(int(j))

    def deltas(self, free) -> np.ndarray:
        return self.state.deltas(np.asarray(free, dtype=np.int64))

    def fit_result(self) -> FitResult:
        return ols_fit(self.dataset, self._members)


# ---------------------------------------------------------------------------
# Inference
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CoefficientStat:
    name: str
    estimate: float
    std_error: float
    t_stat: float
    p_value: float
    stars: str


@dataclass(frozen=True)
class InferenceReport:
    """Classical OLS t-tests for the intercept and each selected coefficient."""

    rows: tuple[CoefficientStat, ...]
    dof: int
    sigma2: float


def t_sf_two_sided(t: float, dof: int) -> float:
    """P(|T_dof| >= |t|) via the regularized incomplete beta function."""
    if dof <= 0:
        raise ValueError("dof must be positive")
    t2 = t * t
    return float(betainc(dof / 2.0, 0.5, dof / (dof + t2)))


def infer(dataset: Dataset, fit: FitResult) -> InferenceReport:
    """Standard errors, t-statistics, p-values, and significance stars.

    Requires a full-rank supported design and n > k + 1.  The star code
    is "***" exactly when p < 0.001.
    """
    idx = fit.support_indices
    k = idx.shape[0]
    dof = dataset.n - k - 1
    if dof <= 0:
        raise InferenceUnavailableError(f"no residual degrees of freedom (n={dataset.n}, k={k})")
    a_mat = np.empty((dataset.n, k + 1))
    a_mat[:, 0] = 1.0
    a_mat[:, 1:] = dataset.x[:, idx]
    r = np.linalg.qr(a_mat, mode="r")
    diag = np.abs(np.diag(r))
    if diag.min() <= RANK_COND * diag.max():
        raise InferenceUnavailableError("supported design is rank deficient")
    rinv = scipy.linalg.solve_triangular(r, np.eye(k + 1), check_finite=False)
    xtx_inv_diag = np.einsum("ij,ij->i", rinv, rinv)
    sigma2 = fit.rss / dof
    se = np.sqrt(sigma2 * xtx_inv_diag)
    estimates = np.concatenate(([fit.intercept], fit.a[idx]))
    names = ["intercept"] + [dataset.names[j] for j in idx]
    rows = []
    for name, est, s in zip(names, estimates, se):
        if s > 0.0:
            t = est / s
            p = t_sf_two_sided(t, dof)
        else:
            t = np.inf if est != 0 else 0.0
            p = 0.0 if est != 0 else 1.0
        rows.append(
            CoefficientStat(
                name=name,
                estimate=float(est),
                std_error=float(s),
                t_stat=float(t),
                p_value=float(p),
                stars="***" if p < 0.001 else "",
            )
        )
    return InferenceReport(rows=tuple(rows), dof=dof, sigma2=float(sigma2))


# ---------------------------------------------------------------------------
# Evaluation metrics
# ---------------------------------------------------------------------------

def r_squared(fit: FitResult, dataset_eval: Dataset) -> float:
    """1 - RSS/TSS on an evaluation dataset, TSS about the evaluation mean."""
    pred = fit.predict(dataset_eval.x)
    resid = dataset_eval.y - pred
    dev = dataset_eval.y - dataset_eval.y.mean()
    tss = float(dev @ dev)
    if tss == 0.0:
        raise UndefinedRSquaredError("evaluation fold has constant y")
    return 1.0 - float(resid @ resid) / tss


def rmse(fit: FitResult, dataset_eval: Dataset) -> float:
    pred = fit.predict(dataset_eval.x)
    resid = dataset_eval.y - pred
    return float(np.sqrt(resid @ resid / dataset_eval.n))
