"""Cross-validation harness and comparison tests."""

import numpy as np
import pytest

from hbselect.datakit import Dataset, Hierarchy, VariableMeta
from hbselect.evaluation import (
    METHODS,
    _fold_hierarchy,
    compare,
    cross_validate,
    kfold_split,
    modes_coincide,
)
from hbselect.linalg import ols_fit, r_squared
from hbselect.solver import SolverConfig, enumerate_exact

from conftest import planted_instance


class TestKfold:
    def test_even_split(self):
        folds = kfold_split(10, 5, seed=0)
        assert [len(f) for f in folds] == [2, 2, 2, 2, 2]

    @pytest.mark.parametrize("n,k,seed", [(10, 5, 0), (23, 5, 1), (17, 4, 2), (20, 20, 3)])
    def test_partition_property(self, n, k, seed):
        folds = kfold_split(n, k, seed)
        sizes = sorted(len(f) for f in folds)
        assert sizes[-1] - sizes[0] <= 1
        combined = np.concatenate(folds)
        assert len(combined) == n
        assert set(combined.tolist()) == set(range(n))

    def test_deterministic(self):
        a = kfold_split(50, 5, seed=7)
        b = kfold_split(50, 5, seed=7)
        for fa, fb in zip(a, b):
            assert np.array_equal(fa, fb)

    def test_k_above_n_rejected(self):
        with pytest.raises(ValueError):
            kfold_split(3, 4, seed=0)


class TestFoldHierarchy:
    def test_constant_member_prunes_triple(self):
        x = np.array([[1, 1, 1], [1, 1, 0], [1, 0, 0]], dtype=float)
        h = Hierarchy(((0, 1, 2),))
        assert _fold_hierarchy(x, h).triples == ()  # large is constant 1
        x2 = np.array([[1, 1, 1], [1, 1, 0], [0, 0, 0]], dtype=float)
        assert _fold_hierarchy(x2, h).triples == ((0, 1, 2),)


class TestCrossValidate:
    def test_noiseless_exact_method_near_perfect(self):
        dataset, hierarchy, _, _ = planted_instance(
            seed=1, n=150, noise_sd=0.0, support_size=3, coef_scale=2.0
        )
        report = cross_validate(dataset, hierarchy, "strong", s=4, k=5, seed=0)
        assert report.r2_mean >= 0.999

    def test_basic_matches_enumeration_per_fold(self):
        dataset, hierarchy, _, _ = planted_instance(seed=2, n=100, noise_sd=1.0)
        report = cross_validate(dataset, hierarchy, "basic", s=3, k=4, seed=3)
        folds = kfold_split(dataset.n, 4, seed=3)
        for fold in report.folds:
            test_rows = folds[fold.fold]
            train_rows = np.sort(
                np.concatenate([f for i, f in enumerate(folds) if i != fold.fold])
            )
            train = Dataset(x=dataset.x[train_rows], y=dataset.y[train_rows], vars=dataset.vars)
            test = Dataset(x=dataset.x[test_rows], y=dataset.y[test_rows], vars=dataset.vars)
            oracle = enumerate_exact(train, hierarchy, SolverConfig(s=3, mode="basic"))
            assert fold.r2 == pytest.approx(r_squared(oracle.best, test), abs=1e-9)

    def test_leave_one_out_runs(self):
        dataset, hierarchy, _, _ = planted_instance(seed=4, n=20)
        report = cross_validate(dataset, hierarchy, "stepwise", s=2, k=20, seed=0)
        assert len(report.folds) == 20
        # Single-row evaluation folds have constant y: flagged and excluded.
        assert all(f.excluded for f in report.folds)
        assert report.r2_mean is None

    def test_k_below_two_rejected(self):
        dataset, hierarchy, _, _ = planted_instance(seed=5, n=30)
        with pytest.raises(ValueError):
            cross_validate(dataset, hierarchy, "stepwise", s=2, k=1, seed=0)

    def test_averages_recompute_from_folds(self):
        dataset, hierarchy, _, _ = planted_instance(seed=6, n=80, noise_sd=1.0)
        report = cross_validate(dataset, hierarchy, "l1", s=3, k=4, seed=1)
        used = [f for f in report.folds if not f.excluded]
        assert report.r2_mean == pytest.approx(np.mean([f.r2 for f in used]), abs=1e-12)
        assert report.rmse_mean == pytest.approx(np.mean([f.rmse for f in used]), abs=1e-12)
        assert report.time_mean == pytest.approx(np.mean([f.wall_time for f in used]), abs=1e-12)

    def test_unknown_method_rejected(self):
        dataset, hierarchy, _, _ = planted_instance(seed=7, n=30)
        with pytest.raises(ValueError):
            cross_validate(dataset, hierarchy, "ridge", s=2, k=2, seed=0)


class TestCompare:
    def test_single_cell(self):
        dataset, hierarchy, _, _ = planted_instance(seed=8, n=60)
        report = compare(dataset, hierarchy, methods=("stepwise",), s_values=(2,), k=3, seed=0)
        assert len(report.rows) == 1
        assert report.rows[0].method == "stepwise"

    def test_merged_row_without_small_categories(self):
        dataset, hierarchy, _, _ = planted_instance(
            seed=9, n=80, p_small=0, support_size=3, mode="basic"
        )
        assert hierarchy.triples == ()
        assert modes_coincide(dataset, hierarchy)
        report = compare(
            dataset, hierarchy, methods=METHODS, s_values=(2, 3), k=3, seed=0
        )
        labels = {row.method for row in report.rows}
        assert labels == {"stepwise", "l1", "basic", "strong/weak"}
        assert report.merged_modes
        assert len(report.rows) == 4 * 2

    def test_not_merged_with_true_triples(self):
        dataset, hierarchy, _, _ = planted_instance(seed=10, n=60)
        assert not modes_coincide(dataset, hierarchy)
        report = compare(
            dataset, hierarchy, methods=("strong", "weak"), s_values=(3,), k=3, seed=0
        )
        assert {row.method for row in report.rows} == {"strong", "weak"}

    def test_best_marks_are_extremes(self):
        dataset, hierarchy, _, _ = planted_instance(seed=11, n=80, noise_sd=1.2)
        report = compare(
            dataset, hierarchy, methods=("stepwise", "l1", "basic"), s_values=(3,), k=3, seed=2
        )
        best_r2, best_rmse = report.best_methods(3)
        rows = {r.method: r for r in report.rows}
        top = max(r.r2_mean for r in rows.values())
        low = min(r.rmse_mean for r in rows.values())
        assert all(rows[m].r2_mean == top for m in best_r2)
        assert all(rows[m].rmse_mean == low for m in best_rmse)

    def test_parallel_matches_serial(self):
        dataset, hierarchy, _, _ = planted_instance(seed=12, n=70, noise_sd=1.0)
        kwargs = dict(methods=("basic", "strong"), s_values=(2, 3), k=3, seed=5)
        serial = compare(dataset, hierarchy, threads=1, **kwargs)
        parallel = compare(dataset, hierarchy, threads=2, **kwargs)
        for a, b in zip(serial.rows, parallel.rows):
            assert a.method == b.method and a.s == b.s
            assert a.r2_mean == pytest.approx(b.r2_mean, abs=1e-12)
            assert a.rmse_mean == pytest.approx(b.rmse_mean, abs=1e-12)
