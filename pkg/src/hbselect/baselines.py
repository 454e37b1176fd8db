"""Comparison methods: stepwise selection by AIC and L1-regularized regression.

Stepwise starts empty and repeatedly applies the single add-or-remove
move with the largest AIC decrease until the support reaches s or no
move improves.  The L1 path runs cyclic coordinate descent with
soft-thresholding on standardized columns over a fixed penalty grid,
then refits the chosen support by ordinary least squares.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .datakit import Dataset
from .linalg import FitResult, GramData, gram_data, ols_fit

SUPPORT_EPS = 1e-10
CD_TOL = 1e-7
CD_MAX_PASSES = 100_000

DEFAULT_GRID = np.arange(10001) / 10000.0  # {0, 0.0001, ..., 0.9999, 1}


# ---------------------------------------------------------------------------
# Stepwise by AIC
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StepwiseMove:
    action: str  # "add" or "remove"
    index: int
    aic: float


@dataclass(frozen=True)
class StepwiseTrace:
    moves: tuple[StepwiseMove, ...]
    fit: FitResult
    stopped_because: str  # "reached_s" or "no_improvement"

    @property
    def aics(self) -> list[float]:
        return [m.aic for m in self.moves]


def aic_gaussian(rss: float, k: int, n: int, tss: float) -> float:
    """n*ln(RSS/n) + 2(k+1) with constant terms dropped; RSS floored near zero."""
    floor = 1e-12 * tss + 1e-300
    return n * math.log(max(rss, floor) / n) + 2.0 * (k + 1)


def stepwise(dataset: Dataset, s: int, gram: GramData | None = None) -> StepwiseTrace:
    """Bidirectional stepwise selection, greediest AIC move first.

    Moves are scanned adds-then-removes in ascending column order; the
    first strictly best AIC wins, so the procedure is deterministic.
    """
    if not 1 <= s <= dataset.p:
        raise ValueError(f"s={s} outside [1, p={dataset.p}]")
    gram = gram if gram is not None else gram_data(dataset)
    n, tss = dataset.n, gram.tss
    state = kernels.CholState(gram.g, gram.c, gram.tss)
    support: list[int] = []
    rss = tss
    current_aic = aic_gaussian(rss, 0, n, tss)
    moves: list[StepwiseMove] = []
    stopped = "no_improvement"

    while True:
        if len(support) >= s:
            stopped = "reached_s"
            break
        k = len(support)
        best_aic = current_aic
        best_move: tuple[str, int, float] | None = None

        free = np.array([j for j in range(dataset.p) if j not in support], dtype=np.int64)
        if free.size:
            deltas = state.deltas(free)
            for j, d in zip(free, deltas):
                cand = aic_gaussian(rss + float(d), k + 1, n, tss)
                if cand < best_aic:
                    best_aic = cand
                    best_move = ("add", int(j), rss + float(d))
        for pos, j in enumerate(support):
            rest = np.array(support[:pos] + support[pos + 1:], dtype=np.int64)
            r = kernels.subset_rss(gram.g, gram.c, gram.tss, rest)
            cand = aic_gaussian(r, k - 1, n, tss)
            if cand < best_aic:
                best_aic = cand
                best_move = ("remove", int(j), r)

        if best_move is None:
            break
        action, j, new_rss = best_move
        if action == "add":
            support.append(j)
            state.add(j)
        else:
            support.remove(j)
            state.reset()
            for t in support:
                state.add(t)
        rss = new_rss
        current_aic = best_aic
        moves.append(StepwiseMove(action=action, index=j, aic=best_aic))

    return StepwiseTrace(
        moves=tuple(moves), fit=ols_fit(dataset, support), stopped_because=stopped
    )


# ---------------------------------------------------------------------------
# L1-regularized regression (lasso) by cyclic coordinate descent
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StandardizedProblem:
    """Centered/standardized cross-products driving the coordinate updates.

    gs is the (p, p) Gram of standardized columns divided by n (unit
    diagonal on active columns); bs is Xs'yc / n.  Zero-variance columns
    are inactive: excluded from the penalty path with coefficient 0.
    """

    gs: np.ndarray
    bs: np.ndarray
    sd: np.ndarray
    active: np.ndarray
    xbar: np.ndarray
    ybar: float
    n: int


def standardize(dataset: Dataset, gram: GramData | None = None) -> StandardizedProblem:
    gram = gram if gram is not None else gram_data(dataset)
    n = dataset.n
    var = np.diag(gram.g) / n
    sd = np.sqrt(np.maximum(var, 0.0))
    active = sd > 0.0
    denom = np.where(active, sd, 1.0)
    gs = gram.g / (n * np.outer(denom, denom))
    gs[~active, :] = 0.0
    gs[:, ~active] = 0.0
    bs = np.where(active, gram.c / (n * denom), 0.0)
    return StandardizedProblem(
        gs=gs, bs=bs, sd=sd, active=active, xbar=gram.xbar, ybar=gram.ybar, n=n
    )


def _soft(z: float, t: float) -> float:
    if z > t:
        return z - t
    if z < -t:
        return z + t
    return 0.0


def _cd_solve(sp: StandardizedProblem, lam: float, a: np.ndarray, q: np.ndarray) -> int:
    """Cyclic coordinate descent in place on (a, q = gs @ a); returns passes used."""
    idx = np.flatnonzero(sp.active)
    for sweep in range(1, CD_MAX_PASSES + 1):
        delta_max = 0.0
        for j in idx:
            rho = sp.bs[j] - q[j] + a[j]  # unit diagonal makes the denominator 1
            new = _soft(rho, lam)
            diff = new - a[j]
            if diff != 0.0:
                q += sp.gs[:, j] * diff
                a[j] = new
                ad = abs(diff)
                if ad > delta_max:
                    delta_max = ad
        if delta_max < CD_TOL:
            return sweep
    return CD_MAX_PASSES


def _to_original_scale(sp: StandardizedProblem, a_std: np.ndarray) -> tuple[np.ndarray, float]:
    a = np.where(sp.active, a_std / np.where(sp.active, sp.sd, 1.0), 0.0)
    intercept = sp.ybar - float(a @ sp.xbar)
    return a, intercept


def lasso_cd(dataset: Dataset, lam: float, sp: StandardizedProblem | None = None) -> tuple[np.ndarray, float]:
    """Lasso coefficients (original scale) and intercept at one penalty value."""
    if lam < 0:
        raise ValueError("lam must be >= 0")
    sp = sp if sp is not None else standardize(dataset)
    a = np.zeros(dataset.p)
    q = np.zeros(dataset.p)
    _cd_solve(sp, lam, a, q)
    return _to_original_scale(sp, a)


def lam_max(sp: StandardizedProblem) -> float:
    """Smallest penalty at which the all-zero solution is stationary."""
    return float(np.max(np.abs(sp.bs))) if sp.bs.size else 0.0


def kkt_violation(sp: StandardizedProblem, lam: float, a_std: np.ndarray) -> float:
    """Max KKT residual on the standardized scale (0 at an exact optimum)."""
    grad = sp.gs @ a_std - sp.bs
    act = sp.active & (np.abs(a_std) > SUPPORT_EPS)
    inact = sp.active & ~act
    worst = 0.0
    if np.any(act):
        worst = float(np.max(np.abs(grad[act] + lam * np.sign(a_std[act]))))
    if np.any(inact):
        worst = max(worst, float(np.max(np.abs(grad[inact]) - lam)))
    return worst


@dataclass(frozen=True)
class LassoPath:
    """Per-penalty solutions over an ascending grid."""

    grid: np.ndarray
    coefs_std: np.ndarray  # (len(grid), p), standardized scale
    coefs: np.ndarray  # (len(grid), p), original scale
    intercepts: np.ndarray
    support_sizes: np.ndarray


def lasso_path(dataset: Dataset, grid: np.ndarray | None = None) -> LassoPath:
    """Sweep the penalty grid from large to small with warm starts."""
    grid = DEFAULT_GRID if grid is None else np.asarray(grid, dtype=np.float64)
    order = np.argsort(grid)[::-1]
    sp = standardize(dataset)
    a = np.zeros(dataset.p)
    q = np.zeros(dataset.p)
    coefs_std = np.zeros((grid.size, dataset.p))
    coefs = np.zeros((grid.size, dataset.p))
    intercepts = np.zeros(grid.size)
    sizes = np.zeros(grid.size, dtype=np.int64)
    for pos in order:
        _cd_solve(sp, float(grid[pos]), a, q)
        coefs_std[pos] = a
        coefs[pos], intercepts[pos] = _to_original_scale(sp, a)
        sizes[pos] = int(np.count_nonzero(np.abs(a) > SUPPORT_EPS))
    asc = np.argsort(grid)
    return LassoPath(
        grid=grid[asc],
        coefs_std=coefs_std[asc],
        coefs=coefs[asc],
        intercepts=intercepts[asc],
        support_sizes=sizes[asc],
    )


@dataclass(frozen=True)
class LassoSelection:
    fit: FitResult
    lam: float
    support_size: int
    warned_empty: bool


def lasso_select(dataset: Dataset, s: int, grid: np.ndarray | None = None) -> LassoSelection:
    """Pick the penalty whose support is closest to s from below, then refit by OLS.

    Sweeps the grid descending; among supports of size <= s the largest
    size wins, ties going to the larger penalty.  If no grid point gives
    a nonempty support the intercept-only fit is returned with a warning
    flag.
    """
    if not 1 <= s <= dataset.p:
        raise ValueError(f"s={s} outside [1, p={dataset.p}]")
    grid = DEFAULT_GRID if grid is None else np.asarray(grid, dtype=np.float64)
    sp = standardize(dataset)
    a = np.zeros(dataset.p)
    q = np.zeros(dataset.p)
    best_size = -1
    best_lam = float(grid.max())
    best_support: np.ndarray | None = None
    for lam in sorted((float(v) for v in grid), reverse=True):
        _cd_solve(sp, lam, a, q)
        nz = np.abs(a) > SUPPORT_EPS
        size = int(np.count_nonzero(nz))
        if size <= s and size > best_size:
            best_size = size
            best_lam = lam
            best_support = nz.copy()
            if size == s:
                break
    if best_support is None or best_size == 0:
        return LassoSelection(
            fit=ols_fit(dataset, np.zeros(dataset.p, dtype=bool)),
            lam=best_lam,
            support_size=0,
            warned_empty=True,
        )
    return LassoSelection(
        fit=ols_fit(dataset, best_support),
        lam=best_lam,
        support_size=best_size,
        warned_empty=False,
    )
