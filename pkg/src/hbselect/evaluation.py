"""Five-fold cross-validation harness and multi-method comparison."""

from __future__ import annotations

import concurrent.futures
import time
from dataclasses import dataclass

import numpy as np

from .baselines import lasso_select, stepwise
from .datakit import Dataset, Hierarchy
from .errors import UndefinedRSquaredError
from .linalg import FitResult, r_squared, rmse
from .solver import MODES, SolverConfig, solve

METHODS = ("stepwise", "l1", "basic", "strong", "weak")


@dataclass(frozen=True)
class FoldResult:
    fold: int
    r2: float | None
    rmse: float | None
    wall_time: float
    excluded: bool = False
    note: str = ""


@dataclass(frozen=True)
class CvReport:
    """Per-fold and averaged metrics for one method at one cardinality cap."""

    method: str
    s: int
    k: int
    seed: int
    folds: tuple[FoldResult, ...]
    r2_mean: float | None
    rmse_mean: float | None
    time_mean: float | None
    merged: bool = False  # strong and weak coincided and were run once

    @property
    def excluded_folds(self) -> tuple[int, ...]:
        return tuple(f.fold for f in self.folds if f.excluded)


def kfold_split(n: int, k: int, seed: int) -> list[np.ndarray]:
    """Uniformly random partition into k folds of size n//k or n//k + 1."""
    if k > n:
        raise ValueError(f"k={k} exceeds n={n}")
    if k < 1:
        raise ValueError("k must be >= 1")
    perm = np.random.default_rng(seed).permutation(n)
    return [np.sort(fold) for fold in np.array_split(perm, k)]


def _subset_dataset(dataset: Dataset, rows: np.ndarray) -> Dataset:
    return Dataset(
        x=np.ascontiguousarray(dataset.x[rows]), y=dataset.y[rows].copy(), vars=dataset.vars
    )


def _fold_hierarchy(train_x: np.ndarray, hierarchy: Hierarchy) -> Hierarchy:
    """Drop triples touching columns that are constant within the training rows."""
    if not hierarchy.triples:
        return hierarchy
    keep = []
    for triple in hierarchy.triples:
        ok = True
        for j in triple:
            col = train_x[:, j]
            if col.max() == col.min():
                ok = False
                break
        if ok:
            keep.append(triple)
    return Hierarchy(tuple(keep))


def select_and_fit(
    dataset: Dataset,
    hierarchy: Hierarchy,
    method: str,
    s: int,
    time_limit: float | None = None,
) -> tuple[FitResult, float]:
    """Run one selection method; returns (fit, selection wall time in seconds).

    Wall time covers selection plus any refit, mirroring how the MIO
    methods are timed.
    """
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}, expected one of {METHODS}")
    t0 = time.perf_counter()
    if method == "stepwise":
        fit = stepwise(dataset, s).fit
    elif method == "l1":
        fit = lasso_select(dataset, s).fit
    else:
        cfg = SolverConfig(s=s, mode=method, time_limit=time_limit)
        fit = solve(dataset, hierarchy, cfg).best
    return fit, time.perf_counter() - t0


def _run_fold(
    dataset: Dataset,
    hierarchy: Hierarchy,
    method: str,
    s: int,
    fold_id: int,
    folds: list[np.ndarray],
    time_limit: float | None,
) -> FoldResult:
    test_rows = folds[fold_id]
    train_rows = np.sort(np.concatenate([f for i, f in enumerate(folds) if i != fold_id]))
    train = _subset_dataset(dataset, train_rows)
    test = _subset_dataset(dataset, test_rows)
    fold_h = _fold_hierarchy(train.x, hierarchy) if method in MODES else hierarchy
    fit, wall = select_and_fit(train, fold_h, method, s, time_limit)
    try:
        r2 = r_squared(fit, test)
    except UndefinedRSquaredError:
        return FoldResult(
            fold=fold_id,
            r2=None,
            rmse=None,
            wall_time=wall,
            excluded=True,
            note="constant y in evaluation fold",
        )
    return FoldResult(fold=fold_id, r2=r2, rmse=rmse(fit, test), wall_time=wall)


def _assemble(method: str, s: int, k: int, seed: int, folds: list[FoldResult], merged: bool) -> CvReport:
    used = [f for f in folds if not f.excluded]
    return CvReport(
        method=method,
        s=s,
        k=k,
        seed=seed,
        folds=tuple(folds),
        r2_mean=float(np.mean([f.r2 for f in used])) if used else None,
        rmse_mean=float(np.mean([f.rmse for f in used])) if used else None,
        time_mean=float(np.mean([f.wall_time for f in used])) if used else None,
        merged=merged,
    )


def cross_validate(
    dataset: Dataset,
    hierarchy: Hierarchy,
    method: str,
    s: int,
    k: int = 5,
    seed: int = 0,
    time_limit: float | None = None,
    threads: int = 1,
) -> CvReport:
    """k-fold CV of one selection method: fit on train, score on held-out."""
    if k < 2:
        raise ValueError("k must be >= 2")
    folds = kfold_split(dataset.n, k, seed)
    if threads > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=threads) as pool:
            futures = [
                pool.submit(_run_fold, dataset, hierarchy, method, s, i, folds, time_limit)
                for i in range(k)
            ]
            results = [f.result() for f in futures]
    else:
        results = [_run_fold(dataset, hierarchy, method, s, i, folds, time_limit) for i in range(k)]
    results.sort(key=lambda f: f.fold)
    return _assemble(method, s, k, seed, results, merged=False)


# ---------------------------------------------------------------------------
# Method comparison
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ComparisonReport:
    rows: tuple[CvReport, ...]
    s_values: tuple[int, ...]
    k: int
    seed: int
    merged_modes: bool

    def best_methods(self, s: int) -> tuple[tuple[str, ...], tuple[str, ...]]:
        """Methods achieving the best held-out R2 and RMSE at this s."""
        rows = [r for r in self.rows if r.s == s and r.r2_mean is not None]
        if not rows:
            return (), ()
        top_r2 = max(r.r2_mean for r in rows)
        low_rmse = min(r.rmse_mean for r in rows)
        return (
            tuple(r.method for r in rows if r.r2_mean == top_r2),
            tuple(r.method for r in rows if r.rmse_mean == low_rmse),
        )


def modes_coincide(dataset: Dataset, hierarchy: Hierarchy) -> bool:
    """True when no triple has both its medium and small member present.

    Without such a triple the strong and weak constraint sets are the
    same, so the two modes are one model and are reported as one row.
    """
    for (_, j2, j3) in hierarchy.triples:
        if 0 <= j2 < dataset.p and 0 <= j3 < dataset.p:
            return False
    return True


def compare(
    dataset: Dataset,
    hierarchy: Hierarchy,
    methods: tuple[str, ...] = METHODS,
    s_values: tuple[int, ...] = (10, 20),
    k: int = 5,
    seed: int = 0,
    time_limit: float | None = None,
    threads: int = 1,
) -> ComparisonReport:
    """Cross-validate every (method, s) cell and mark the per-s best values.

    When the hierarchy makes strong and weak identical and both were
    requested, they run once and appear as a single merged row.
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    for m in methods:
        if m not in METHODS:
            raise ValueError(f"unknown method {m!r}")
    merged = modes_coincide(dataset, hierarchy) and "strong" in methods and "weak" in methods
    run_methods: list[tuple[str, str]] = []  # (label, mode to execute)
    for m in methods:
        if merged and m == "strong":
            run_methods.append(("strong/weak", "strong"))
        elif merged and m == "weak":
            continue
        else:
            run_methods.append((m, m))

    folds = kfold_split(dataset.n, k, seed)
    tasks = [
        (label, exec_method, s, fold_id)
        for label, exec_method in run_methods
        for s in s_values
        for fold_id in range(k)
    ]
    if threads > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=threads) as pool:
            futures = {
                pool.submit(
                    _run_fold, dataset, hierarchy, exec_method, s, fold_id, folds, time_limit
                ): (label, s, fold_id)
                for (label, exec_method, s, fold_id) in tasks
            }
            by_cell: dict[tuple[str, int], list[FoldResult]] = {}
            for fut, (label, s, _) in futures.items():
                by_cell.setdefault((label, s), []).append(fut.result())
    else:
        by_cell = {}
        for label, exec_method, s, fold_id in tasks:
            by_cell.setdefault((label, s), []).append(
                _run_fold(dataset, hierarchy, exec_method, s, fold_id, folds, time_limit)
            )

    rows = []
    for label, _ in run_methods:
        for s in s_values:
            cell = sorted(by_cell[(label, s)], key=lambda f: f.fold)
            rows.append(_assemble(label, s, k, seed, cell, merged=(label == "strong/weak")))
    return ComparisonReport(
        rows=tuple(rows), s_values=tuple(s_values), k=k, seed=seed, merged_modes=merged
    )
