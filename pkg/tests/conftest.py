"""Shared fixtures and instance builders for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

from hbselect.datakit import Dataset, Hierarchy, VariableMeta, generate, random_config


def planted_instance(
    seed: int,
    n: int = 80,
    p_demo: int = 3,
    p_large: int = 2,
    p_medium: int = 3,
    p_small: int = 4,
    support_size: int = 4,
    noise_sd: float = 0.8,
    mode: str = "strong",
    **extra,
):
    """Synthetic dataset with a planted hierarchy-feasible model."""
    cfg = random_config(
        seed=seed,
        n=n,
        p_demo=p_demo,
        p_large=p_large,
        p_medium=p_medium,
        p_small=p_small,
        support_size=support_size,
        hierarchy_mode=mode,
        noise_sd=noise_sd,
        **extra,
    )
    dataset, hierarchy, truth = generate(cfg)
    return dataset, hierarchy, truth, cfg


def dense_dataset(seed: int, n: int = 60, p: int = 8, noise: float = 1.0):
    """Unstructured dataset: continuous demographic columns, integer y."""
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(n, p))
    coef = rng.normal(size=p) * (rng.random(p) < 0.5)
    y = np.rint(1.0 + x @ coef + rng.normal(0, noise, n))
    y[y == 0] = 1.0
    vars_ = tuple(VariableMeta(j, f"v{j}", "C") for j in range(p))
    return Dataset(x=x, y=y, vars=vars_)


def dummy_dataset(seed: int, n: int = 60, p: int = 8, noise: float = 1.0, signal: int = 3):
    """All-dummy design with a few signal columns, no hierarchy."""
    rng = np.random.default_rng(seed)
    x = (rng.random((n, p)) < 0.4).astype(np.float64)
    picks = rng.choice(p, size=min(signal, p), replace=False)
    coef = np.zeros(p)
    coef[picks] = rng.uniform(1.0, 3.0, picks.size) * rng.choice((-1.0, 1.0), picks.size)
    y = np.rint(1.0 + x @ coef + rng.normal(0, noise, n))
    y[y == 0] = 1.0
    vars_ = tuple(VariableMeta(j, f"d{j}", "L") for j in range(p))
    return Dataset(x=x, y=y, vars=vars_)


@pytest.fixture
def small_planted():
    return planted_instance(seed=11)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One pass/fail line per acceptance criterion at the end of the run."""
    rows = []
    for key in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(key, []):
            if "test_acceptance" in getattr(rep, "nodeid", "") and rep.when == "call":
                rows.append((rep.nodeid.split("::")[-1], rep.outcome.upper()))
    if rows:
        terminalreporter.write_sep("=", "acceptance criteria")
        for name, outcome in sorted(rows):
            terminalreporter.write_line(f"{name}: {outcome}")
