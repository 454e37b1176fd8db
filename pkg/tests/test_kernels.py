"""Backend parity: the compiled kernels must match the numpy fallback."""

import numpy as np
import pytest

from hbselect import _core_py, kernels
from hbselect.linalg import gram_data, ols_fit

from conftest import dummy_dataset

compiled = pytest.importorskip("hbselect._core", reason="compiled kernels not built")


def _problem(seed, n=60, p=10):
    ds = dummy_dataset(seed, n=n, p=p)
    return ds, gram_data(ds)


def test_backend_reports_itself():
    assert kernels.BACKEND in ("c", "python")
    assert compiled.BACKEND == "c"
    assert _core_py.BACKEND == "python"


@pytest.mark.parametrize("seed", range(8))
def test_subset_rss_parity(seed):
    ds, gram = _problem(seed)
    rng = np.random.default_rng(seed)
    for _ in range(10):
        k = int(rng.integers(0, 7))
        idx = rng.choice(ds.p, size=k, replace=False).astype(np.int64)
        a = compiled.subset_rss(gram.g, gram.c, gram.tss, idx)
        b = _core_py.subset_rss(gram.g, gram.c, gram.tss, idx)
        assert a == pytest.approx(b, rel=1e-12, abs=1e-9)
        assert a == pytest.approx(ols_fit(ds, idx.tolist()).rss, rel=1e-9)


@pytest.mark.parametrize("seed", range(5))
def test_state_add_and_deltas_parity(seed):
    ds, gram = _problem(seed, p=12)
    sc = compiled.CholState(gram.g, gram.c, gram.tss)
    sp = _core_py.CholState(gram.g, gram.c, gram.tss)
    rng = np.random.default_rng(seed + 100)
    order = rng.permutation(ds.p)
    added = []
    for j in order[:6]:
        rc = sc.add(int(j))
        rp = sp.add(int(j))
        assert rc == rp
        added.append(int(j))
        assert sc.rss == pytest.approx(sp.rss, rel=1e-12, abs=1e-9)
        free = np.array([t for t in range(ds.p) if t not in added], dtype=np.int64)
        dc = sc.deltas(free)
        dp = sp.deltas(free)
        np.testing.assert_allclose(dc, dp, rtol=1e-10, atol=1e-9)


def test_mark_rollback_semantics():
    ds, gram = _problem(3)
    for mod in (compiled, _core_py):
        st = mod.CholState(gram.g, gram.c, gram.tss)
        st.add(0)
        rss1 = st.rss
        mark = st.mark()
        st.add(1)
        st.add(2)
        st.rollback(mark)
        assert st.rss == rss1
        st.add(3)  # overwriting the rolled-back slots must be safe
        st2 = mod.CholState(gram.g, gram.c, gram.tss)
        st2.add(0)
        st2.add(3)
        assert st.rss == pytest.approx(st2.rss, rel=1e-12)


def test_dependent_column_skipped_identically():
    rng = np.random.default_rng(7)
    base = (rng.random((50, 3)) < 0.5).astype(float)
    x = np.column_stack([base, base[:, 1]])  # exact duplicate
    y = np.rint(base @ np.array([2.0, -1.0, 1.5]) + rng.normal(0, 0.5, 50))
    y[y == 0] = 1.0
    from hbselect.datakit import Dataset, VariableMeta

    ds = Dataset(x=x, y=y, vars=tuple(VariableMeta(j, f"d{j}", "L") for j in range(4)))
    gram = gram_data(ds)
    for mod in (compiled, _core_py):
        st = mod.CholState(gram.g, gram.c, gram.tss)
        assert bool(st.add(1)) is True
        assert bool(st.add(3)) is False  # duplicate of column 1
        assert st.delta_add(3) == 0.0


def test_capacity_guard():
    ds, gram = _problem(4, p=6)
    st = kernels.CholState(gram.g, gram.c, gram.tss, capacity=2)
    st.add(0)
    st.add(1)
    with pytest.raises((ValueError, IndexError)):
        st.add(2)
