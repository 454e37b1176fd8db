"""Datasets with grouped variables, category hierarchies, and a synthetic generator.

Variables belong to one of four groups: C (demographics), L/M/S (large,
medium, small product categories).  Category columns are 0/1 purchase
dummies; the target y is the signed purchase-quantity difference between
the two stores, a nonzero integer.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    CsvParseError,
    DataValidationError,
    HierarchyError,
    InfeasibleConfigError,
)

GROUPS = ("C", "L", "M", "S")
CATEGORY_GROUPS = ("L", "M", "S")


@dataclass(frozen=True)
class VariableMeta:
    """Column metadata: 0-based index, unique name, group code."""

    index: int
    name: str
    group: str

    def __post_init__(self):
        if self.group not in GROUPS:
            raise DataValidationError(
                f"variable {self.name!r}: unknown group {self.group!r} (expected one of {GROUPS})"
            )


@dataclass(frozen=True)
class Dataset:
    """Immutable design matrix with variable metadata and target vector."""

    x: np.ndarray
    y: np.ndarray
    vars: tuple[VariableMeta, ...]

    def __post_init__(self):
        self.x.setflags(write=False)
        self.y.setflags(write=False)

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def p(self) -> int:
        return self.x.shape[1]

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.vars)

    @property
    def groups(self) -> tuple[str, ...]:
        return tuple(v.group for v in self.vars)

    def index_of(self, name: str) -> int:
        for v in self.vars:
            if v.name == name:
                return v.index
        raise KeyError(name)


@dataclass(frozen=True)
class Hierarchy:
    """Set of (large, medium, small) column-index triples."""

    triples: tuple[tuple[int, int, int], ...] = ()

    def __len__(self) -> int:
        return len(self.triples)

    @staticmethod
    def empty() -> "Hierarchy":
        return Hierarchy(())


def validate_dataset(dataset: Dataset) -> None:
    """Check the Dataset invariants, raising DataValidationError on the first breach."""
    x, y, vars_ = dataset.x, dataset.y, dataset.vars
    if x.ndim != 2 or y.ndim != 1 or x.shape[0] != y.shape[0]:
        raise DataValidationError("x must be n-by-p and y length n")
    if len(vars_) != x.shape[1]:
        raise DataValidationError("every column needs exactly one VariableMeta")
    names = [v.name for v in vars_]
    if len(set(names)) != len(names):
        raise DataValidationError("variable names must be unique")
    for j, v in enumerate(vars_):
        if v.index != j:
            raise DataValidationError(f"variable {v.name!r} has index {v.index}, expected {j}")
    if not np.all(np.isfinite(x)):
        raise DataValidationError("design matrix contains non-finite values")
    for v in vars_:
        if v.group in CATEGORY_GROUPS:
            col = x[:, v.index]
            if not np.all((col == 0.0) | (col == 1.0)):
                raise DataValidationError(
                    f"category column {v.name!r} contains values outside {{0, 1}}"
                )
    if not np.all(np.isfinite(y)):
        raise DataValidationError("y contains non-finite values")
    if np.any(y != np.rint(y)):
        raise DataValidationError("y must contain integers")
    if np.any(y == 0):
        raise DataValidationError("y must be nonzero: a visit goes to exactly one store")


def validate_hierarchy(hierarchy: Hierarchy, dataset: Dataset) -> None:
    """Check group membership and single-parent-chain invariants against a dataset."""
    groups = dataset.groups
    seen_small: set[int] = set()
    for (j1, j2, j3) in hierarchy.triples:
        for j in (j1, j2, j3):
            if not 0 <= j < dataset.p:
                raise HierarchyError(f"hierarchy index {j} out of range")
        want = ("L", "M", "S")
        got = (groups[j1], groups[j2], groups[j3])
        if got != want:
            raise HierarchyError(
                f"triple ({dataset.names[j1]}, {dataset.names[j2]}, {dataset.names[j3]}) "
                f"has groups {got}, expected {want}"
            )
        if j3 in seen_small:
            raise HierarchyError(
                f"small category {dataset.names[j3]!r} appears in more than one triple"
            )
        seen_small.add(j3)


# ---------------------------------------------------------------------------
# File ingestion
# ---------------------------------------------------------------------------

def load_groups(path: str | Path) -> dict[str, str]:
    """Read a grouping spec: one `name,group` pair per line."""
    out: dict[str, str] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != 2:
                raise CsvParseError(f"{path}:{lineno}: expected `name,group`, got {row!r}")
            name, group = row[0].strip(), row[1].strip()
            if group not in GROUPS:
                raise DataValidationError(
                    f"{path}:{lineno}: unknown group {group!r} for {name!r}"
                )
            if name in out:
                raise DataValidationError(f"{path}:{lineno}: duplicate grouping for {name!r}")
            out[name] = group
    return out


def load_csv(path: str | Path, groups: dict[str, str], y_col: str = "y") -> Dataset:
    """Load a data CSV (header row, numeric cells) into a validated Dataset.

    Every non-y column must be assigned a group by `groups`; dummy columns
    are verified 0/1 and y is verified to be a nonzero integer.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CsvParseError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        if y_col not in header:
            raise DataValidationError(f"{path}: y column {y_col!r} not in header")
        for name in header:
            if name != y_col and name not in groups:
                raise DataValidationError(f"{path}: column {name!r} has no group assignment")
        rows: list[list[float]] = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise CsvParseError(
                    f"{path}:{lineno}: expected {len(header)} cells, got {len(row)}"
                )
            parsed = []
            for colname, cell in zip(header, row):
                try:
                    parsed.append(float(cell))
                except ValueError:
                    raise CsvParseError(
                        f"{path}:{lineno}: column {colname!r}: cannot parse {cell!r}"
                    ) from None
            rows.append(parsed)
    if not rows:
        raise DataValidationError(f"{path}: no data rows")
    table = np.asarray(rows, dtype=np.float64)
    y_pos = header.index(y_col)
    x_cols = [i for i in range(len(header)) if i != y_pos]
    vars_ = tuple(
        VariableMeta(index=j, name=header[i], group=groups[header[i]])
        for j, i in enumerate(x_cols)
    )
    dataset = Dataset(x=np.ascontiguousarray(table[:, x_cols]), y=table[:, y_pos].copy(), vars=vars_)
    validate_dataset(dataset)
    return dataset


def load_hierarchy(path: str | Path, dataset: Dataset) -> Hierarchy:
    """Read `large,medium,small` name lines into a validated Hierarchy."""
    triples: list[tuple[int, int, int]] = []
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != 3:
                raise HierarchyError(
                    f"{path}:{lineno}: expected `large,medium,small`, got {row!r}"
                )
            idx = []
            for name in (c.strip() for c in row):
                try:
                    idx.append(dataset.index_of(name))
                except KeyError:
                    raise HierarchyError(f"{path}:{lineno}: unknown variable {name!r}") from None
            triples.append((idx[0], idx[1], idx[2]))
    hierarchy = Hierarchy(tuple(triples))
    try:
        validate_hierarchy(hierarchy, dataset)
    except HierarchyError as exc:
        raise HierarchyError(f"{path}: {exc}") from None
    return hierarchy


# ---------------------------------------------------------------------------
# Redundancy elimination
# ---------------------------------------------------------------------------

def drop_redundant(dataset: Dataset) -> tuple[Dataset, list[str]]:
    """Remove identically-zero columns.

    Returns the reduced dataset and the dropped names.  Hierarchy indices
    are not touched here; pass any Hierarchy through `remap_hierarchy`.
    """
    keep = [j for j in range(dataset.p) if np.any(dataset.x[:, j] != 0.0)]
    if len(keep) == dataset.p:
        return dataset, []
    dropped = [dataset.vars[j].name for j in range(dataset.p) if j not in set(keep)]
    vars_ = tuple(
        VariableMeta(index=new_j, name=dataset.vars[old_j].name, group=dataset.vars[old_j].group)
        for new_j, old_j in enumerate(keep)
    )
    reduced = Dataset(x=np.ascontiguousarray(dataset.x[:, keep]), y=dataset.y, vars=vars_)
    return reduced, dropped


def remap_hierarchy(hierarchy: Hierarchy, old: Dataset, new: Dataset) -> Hierarchy:
    """Re-express hierarchy triples after columns were dropped.

    A triple loses its medium or small member -> the triple is removed.
    A triple loses its large member while a child survives -> corrupt data
    (a purchased child implies a purchasable parent), so raise.
    """
    new_names = set(new.names)
    triples: list[tuple[int, int, int]] = []
    for (j1, j2, j3) in hierarchy.triples:
        n1, n2, n3 = old.vars[j1].name, old.vars[j2].name, old.vars[j3].name
        if n1 not in new_names:
            if n2 in new_names or n3 in new_names:
                raise HierarchyError(
                    f"large category {n1!r} was dropped but a descendant survives"
                )
            continue
        if n2 not in new_names or n3 not in new_names:
            continue
        triples.append((new.index_of(n1), new.index_of(n2), new.index_of(n3)))
    return Hierarchy(tuple(triples))


# ---------------------------------------------------------------------------
# Synthetic data
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SyntheticConfig:
    """Recipe for a synthetic store-choice dataset with a planted model.

    Column order is demographics, large, medium, small.  Mediums are
    attached to larges round-robin, smalls to mediums round-robin, which
    fixes the hierarchy triples.  `support`/`coefs` define the planted
    linear model; `hierarchy_mode` declares which constraint set the
    support must satisfy.
    """

    n: int
    p_demo: int
    p_large: int
    p_medium: int
    p_small: int
    support: tuple[int, ...]
    coefs: tuple[float, ...]
    intercept: float = 0.0
    noise_sd: float = 1.0
    hierarchy_mode: str = "strong"
    demo_rate: float = 0.5
    large_rate: float = 0.3
    medium_rate: float = 0.25
    small_rate: float = 0.2
    seed: int = 0

    @property
    def p(self) -> int:
        return self.p_demo + self.p_large + self.p_medium + self.p_small


def _config_names_groups(config: SyntheticConfig) -> tuple[list[str], list[str]]:
    names, groups = [], []
    for k in range(config.p_demo):
        names.append(f"demo_{k:02d}")
        groups.append("C")
    for k in range(config.p_large):
        names.append(f"large_{k:02d}")
        groups.append("L")
    for k in range(config.p_medium):
        names.append(f"med_{k:02d}")
        groups.append("M")
    for k in range(config.p_small):
        names.append(f"small_{k:02d}")
        groups.append("S")
    return names, groups


def config_triples(config: SyntheticConfig) -> tuple[tuple[int, int, int], ...]:
    """Hierarchy triples implied by the round-robin parent assignment."""
    if config.p_small == 0:
        return ()
    if config.p_medium == 0 or config.p_large == 0:
        raise InfeasibleConfigError("small categories need medium and large parents")
    off_l = config.p_demo
    off_m = off_l + config.p_large
    off_s = off_m + config.p_medium
    triples = []
    for k in range(config.p_small):
        mi = k % config.p_medium
        li = mi % config.p_large
        triples.append((off_l + li, off_m + mi, off_s + k))
    return tuple(triples)


def check_support_feasible(
    support: set[int], triples: tuple[tuple[int, int, int], ...], mode: str
) -> bool:
    """True when a support satisfies the given mode's hierarchy constraints."""
    if mode == "basic":
        return True
    for (j1, j2, j3) in triples:
        if mode == "strong":
            if j3 in support and j2 not in support:
                return False
            if j2 in support and j1 not in support:
                return False
            if j3 in support and j1 not in support:
                return False
        elif mode == "weak":
            if j2 in support and j1 not in support:
                return False
            if j3 in support and j1 not in support:
                return False
        else:
            raise ValueError(f"unknown mode {mode!r}")
    return True


def required_with(
    j: int, selected: set[int], triples: tuple[tuple[int, int, int], ...], mode: str
) -> list[int]:
    """Columns that must accompany j so that selected + {j} stays feasible.

    Weak mode repairs a small-category pick with its large ancestor only,
    the cheapest choice that satisfies the constraint pair.
    """
    need = {j}
    if mode != "basic":
        grew = True
        while grew:
            grew = False
            for (j1, j2, j3) in triples:
                if mode == "strong":
                    if j3 in need or j3 in selected:
                        for t in (j1, j2):
                            if t not in need and t not in selected:
                                need.add(t)
                                grew = True
                    if j2 in need or j2 in selected:
                        if j1 not in need and j1 not in selected:
                            need.add(j1)
                            grew = True
                else:
                    for child in (j2, j3):
                        if child in need or child in selected:
                            if j1 not in need and j1 not in selected:
                                need.add(j1)
                                grew = True
    return sorted(need - selected)


def random_config(
    seed: int,
    n: int,
    p_demo: int,
    p_large: int,
    p_medium: int,
    p_small: int,
    support_size: int,
    hierarchy_mode: str = "strong",
    noise_sd: float = 1.0,
    intercept: float = 1.0,
    coef_scale: float = 1.0,
    **rates,
) -> SyntheticConfig:
    """Config with a randomly drawn hierarchy-feasible support of about support_size."""
    rng = np.random.default_rng(seed)
    probe = SyntheticConfig(
        n=n, p_demo=p_demo, p_large=p_large, p_medium=p_medium, p_small=p_small,
        support=(), coefs=(), hierarchy_mode=hierarchy_mode, seed=seed, **rates,
    )
    triples = config_triples(probe)
    support: set[int] = set()
    for j in rng.permutation(probe.p):
        need = required_with(int(j), support, triples, hierarchy_mode)
        if len(support) + len(need) <= support_size:
            support.update(need)
        if len(support) == support_size:
            break
    ordered = tuple(sorted(support))
    signs = rng.choice((-1.0, 1.0), size=len(ordered))
    mags = rng.uniform(1.0, 3.0, size=len(ordered))
    coefs = tuple(float(v) for v in signs * mags * coef_scale)
    return SyntheticConfig(
        n=n, p_demo=p_demo, p_large=p_large, p_medium=p_medium, p_small=p_small,
        support=ordered, coefs=coefs, intercept=intercept, noise_sd=noise_sd,
        hierarchy_mode=hierarchy_mode, seed=seed, **rates,
    )


def _validate_config(config: SyntheticConfig) -> None:
    if config.n <= 0:
        raise InfeasibleConfigError("n must be positive")
    if min(config.p_demo, config.p_large, config.p_medium, config.p_small) < 0:
        raise InfeasibleConfigError("group counts must be nonnegative")
    if config.p_small > 0 and config.p_medium == 0:
        raise InfeasibleConfigError("small categories need medium parents")
    if config.p_medium > 0 and config.p_large == 0:
        raise InfeasibleConfigError("medium categories need large parents")
    if config.noise_sd < 0:
        raise InfeasibleConfigError("noise standard deviation must be >= 0")
    if len(config.support) != len(config.coefs):
        raise InfeasibleConfigError("support and coefs must align")
    if len(set(config.support)) != len(config.support):
        raise InfeasibleConfigError("support indices must be unique")
    if any(not 0 <= j < config.p for j in config.support):
        raise InfeasibleConfigError("support index out of range")
    for rate in (config.demo_rate, config.large_rate, config.medium_rate, config.small_rate):
        if not 0.0 <= rate <= 1.0:
            raise InfeasibleConfigError("purchase rates must lie in [0, 1]")
    if not check_support_feasible(set(config.support), config_triples(config), config.hierarchy_mode):
        raise InfeasibleConfigError(
            f"support violates the {config.hierarchy_mode!r} hierarchy constraints"
        )


def generate(config: SyntheticConfig) -> tuple[Dataset, Hierarchy, dict]:
    """Draw a dataset, its hierarchy, and the planted ground-truth record.

    Purchase dummies respect parent closure: a small-category purchase
    turns on its medium and large parents, and a medium purchase turns on
    its large parent.  y is the planted linear model plus Gaussian noise,
    rounded to the nearest nonzero integer (zero maps to +/-1 by sign).
    Deterministic given the seed.
    """
    _validate_config(config)
    rng = np.random.default_rng(config.seed)
    names, groups = _config_names_groups(config)
    triples = config_triples(config)

    demo = (rng.random((config.n, config.p_demo)) < config.demo_rate).astype(np.float64)
    large = (rng.random((config.n, config.p_large)) < config.large_rate).astype(np.float64)
    medium = (rng.random((config.n, config.p_medium)) < config.medium_rate).astype(np.float64)
    small = (rng.random((config.n, config.p_small)) < config.small_rate).astype(np.float64)
    # Parent closure, bottom-up: purchased child switches its ancestors on.
    for k in range(config.p_small):
        mi = k % config.p_medium
        medium[:, mi] = np.maximum(medium[:, mi], small[:, k])
    for mi in range(config.p_medium):
        li = mi % config.p_large
        large[:, li] = np.maximum(large[:, li], medium[:, mi])
    x = np.hstack([demo, large, medium, small])

    signal = np.full(config.n, config.intercept, dtype=np.float64)
    for j, a in zip(config.support, config.coefs):
        signal += a * x[:, j]
    noise = rng.normal(0.0, config.noise_sd, config.n) if config.noise_sd > 0 else 0.0
    v = signal + noise
    y = np.rint(v)
    zero = y == 0
    y[zero] = np.where(v[zero] >= 0, 1.0, -1.0)

    vars_ = tuple(VariableMeta(index=j, name=names[j], group=groups[j]) for j in range(config.p))
    dataset = Dataset(x=x, y=y, vars=vars_)
    truth = {
        "intercept": config.intercept,
        "coefficients": {names[j]: a for j, a in zip(config.support, config.coefs)},
        "sigma": config.noise_sd,
        "seed": config.seed,
    }
    return dataset, Hierarchy(triples), truth


# ---------------------------------------------------------------------------
# Writers (inverse of the loaders; repr round-trips floats exactly)
# ---------------------------------------------------------------------------

def _fmt(value: float) -> str:
    return repr(int(value)) if float(value).is_integer() else repr(float(value))


def write_csv(dataset: Dataset, path: str | Path, y_col: str = "y") -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([y_col, *dataset.names])
        for i in range(dataset.n):
            writer.writerow([_fmt(dataset.y[i]), *(_fmt(v) for v in dataset.x[i])])


def write_groups(dataset: Dataset, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        for v in dataset.vars:
            writer.writerow([v.name, v.group])


def write_hierarchy(hierarchy: Hierarchy, dataset: Dataset, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        for (j1, j2, j3) in hierarchy.triples:
            writer.writerow([dataset.names[j1], dataset.names[j2], dataset.names[j3]])


def write_ground_truth(truth: dict, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(truth, fh, indent=2, sort_keys=True)
        fh.write("\n")
