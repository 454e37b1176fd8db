"""Exact anytime branch-and-bound for cardinality-bounded subset selection.

Three models share the objective (least-squares RSS with an intercept)
and the cardinality cap; they differ in the constraint set over the
selection indicators of hierarchy triples (large, medium, small):

* basic  - no hierarchy constraints
* strong - select a category only with its whole ancestor chain
* weak   - select a small category only with at least its large ancestor

Selection is structural: a deselected column simply never enters a fit,
so the "zero coefficient" implication holds by construction.  Nodes keep
a ternary per-variable status; propagation closes it under the active
mode's implication rules.  The node relaxation drops the cardinality cap
on free variables, so its RSS (fixed-in plus free columns) bounds every
completion from below.
"""

from __future__ import annotations

import heapq
import itertools
import math
import time
from dataclasses import dataclass

import numpy as np

from . import kernels
from .datakit import Dataset, Hierarchy, required_with
from .errors import DimensionError
from .linalg import FitResult, GramData, gram_data, ols_fit

MODES = ("basic", "strong", "weak")

FREE = 0
FIXED_IN = 1
FIXED_OUT = 2


@dataclass(frozen=True)
class SolverConfig:
    """Search parameters: cardinality cap, model, anytime limit, certificate gap."""

    s: int
    mode: str = "basic"
    time_limit: float | None = None
    tolerance: float = 0.0
    seed: int = 0

    def validated(self, p: int) -> "SolverConfig":
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}, expected one of {MODES}")
        if not 1 <= self.s <= p:
            raise ValueError(f"s={self.s} outside [1, p={p}]")
        if self.tolerance < 0:
            raise ValueError("tolerance must be >= 0")
        if self.time_limit is not None and self.time_limit < 0:
            raise ValueError("time_limit must be >= 0")
        return self


@dataclass
class SelectionState:
    """Ternary per-variable status vector used by the search."""

    status: np.ndarray

    @property
    def count_fixed_in(self) -> int:
        return int(np.count_nonzero(self.status == FIXED_IN))

    @staticmethod
    def all_free(p: int) -> "SelectionState":
        return SelectionState(np.zeros(p, dtype=np.int8))


@dataclass(frozen=True)
class SolveOutcome:
    """Best solution found, optimality certificate, and search statistics."""

    best: FitResult
    proven_optimal: bool
    nodes_explored: int
    wall_time: float
    best_bound: float
    mode: str
    s: int
    second_rss: float | None = None


def _implications(triples, mode: str):
    """(antecedent-status, antecedent, consequent) closure rules for a mode."""
    rules: list[tuple[int, int, int]] = []
    for (j1, j2, j3) in triples:
        if mode == "strong":
            rules.append((FIXED_IN, j3, j2))
            rules.append((FIXED_IN, j2, j1))
            rules.append((FIXED_OUT, j1, j2))
            rules.append((FIXED_OUT, j2, j3))
        elif mode == "weak":
            rules.append((FIXED_IN, j2, j1))
            rules.append((FIXED_IN, j3, j1))
            rules.append((FIXED_OUT, j1, j2))
            rules.append((FIXED_OUT, j1, j3))
    return rules


def _propagate_inplace(status: np.ndarray, rules, s: int) -> bool:
    """Close `status` under the implication rules; False when infeasible."""
    changed = True
    while changed:
        changed = False
        for want, ante, cons in rules:
            if status[ante] == want and status[cons] != want:
                if status[cons] != FREE:
                    return False
                status[cons] = want
                changed = True
    return int(np.count_nonzero(status == FIXED_IN)) <= s


def propagate(
    state: SelectionState, hierarchy: Hierarchy, mode: str, s: int
) -> SelectionState | None:
    """Fixpoint of the mode's implication rules, or None when infeasible."""
    status = state.status.copy()
    triples = () if mode == "basic" else hierarchy.triples
    if _propagate_inplace(status, _implications(triples, mode), s):
        return SelectionState(status)
    return None


def lower_bound(state: SelectionState, dataset: Dataset, gram: GramData | None = None) -> float:
    """RSS with the cardinality cap dropped on free variables.

    Fits fixed-in plus free columns; admissible because every completion
    selects a subset of those columns.
    """
    gram = gram if gram is not None else gram_data(dataset)
    candidates = np.flatnonzero(state.status != FIXED_OUT)
    return kernels.subset_rss(gram.g, gram.c, gram.tss, candidates)


# ---------------------------------------------------------------------------
# Greedy incumbent
# ---------------------------------------------------------------------------

def _greedy_incumbent(
    state_kernel, p: int, s: int, triples, mode: str, fixed_out: set[int] | None = None
) -> tuple[list[int], float]:
    """Forward selection repaired to hierarchy feasibility; returns (support, rss)."""
    fixed_out = fixed_out or set()
    selected: set[int] = set()
    state_kernel.reset()
    while len(selected) < s:
        best_gain = 0.0
        best_add: list[int] | None = None
        rss0 = state_kernel.rss
        for j in range(p):
            if j in selected or j in fixed_out:
                continue
            need = required_with(j, selected, triples, mode)
            if any(t in fixed_out for t in need):
                continue
            if len(selected) + len(need) > s:
                continue
            mark = state_kernel.mark()
            for t in need:
                state_kernel.add(t)
            gain = rss0 - state_kernel.rss
            state_kernel.rollback(mark)
            if gain > best_gain:
                best_gain = gain
                best_add = need
        if best_add is None:
            break
        for t in best_add:
            state_kernel.add(t)
            selected.add(t)
    rss = state_kernel.rss
    state_kernel.reset()
    return sorted(selected), rss


# ---------------------------------------------------------------------------
# Branch and bound
# ---------------------------------------------------------------------------

def _support_lex_less(a: tuple[int, ...], b: tuple[int, ...]) -> bool:
    return a < b


class _Search:
    def __init__(self, dataset: Dataset, hierarchy: Hierarchy, config: SolverConfig):
        self.config = config.validated(dataset.p)
        self.dataset = dataset
        self.p = dataset.p
        self.s = config.s
        self.mode = config.mode
        self.triples = () if config.mode == "basic" else hierarchy.triples
        self.rules = _implications(self.triples, config.mode)
        self.gram = gram_data(dataset)
        self.scratch = kernels.CholState(self.gram.g, self.gram.c, self.gram.tss)
        self.inc_support: tuple[int, ...] = ()
        self.inc_rss = self.gram.tss  # intercept-only model is always feasible
        self.nodes = 0

    def _offer(self, support_sorted: tuple[int, ...], rss: float) -> None:
        # Total order on incumbents: lower RSS, then lexicographically
        # smaller support, so discovery order never changes the answer.
        if rss < self.inc_rss or (rss == self.inc_rss and _support_lex_less(support_sorted, self.inc_support)):
            self.inc_rss = rss
            self.inc_support = support_sorted

    def _node_bound(self, status: np.ndarray) -> float:
        candidates = np.flatnonzero(status != FIXED_OUT)
        return kernels.subset_rss(self.gram.g, self.gram.c, self.gram.tss, candidates)

    def run(self) -> SolveOutcome:
        t0 = time.perf_counter()
        cfg = self.config

        if self.s >= self.p:
            # Degenerate cap: the full model is feasible in every mode.
            fit = ols_fit(self.dataset, np.ones(self.p, dtype=bool))
            return SolveOutcome(
                best=fit,
                proven_optimal=True,
                nodes_explored=0,
                wall_time=time.perf_counter() - t0,
                best_bound=fit.rss,
                mode=self.mode,
                s=self.s,
            )

        greedy_support, greedy_rss = _greedy_incumbent(
            self.scratch, self.p, self.s, self.triples, self.mode
        )
        self._offer(tuple(greedy_support), greedy_rss)

        root = SelectionState.all_free(self.p)
        root_bound = self._node_bound(root.status)
        heap: list[tuple[float, int, int, bytes]] = []
        seq = itertools.count()
        heapq.heappush(heap, (root_bound, 0, next(seq), root.status.tobytes()))

        truncated = False
        proven = False
        certificate = None
        deadline = None if cfg.time_limit is None else t0 + cfg.time_limit

        while heap:
            if deadline is not None and time.perf_counter() >= deadline:
                truncated = True
                break
            bound, depth, _, blob = heapq.heappop(heap)
            if self.inc_rss <= bound * (1.0 + cfg.tolerance):
                proven = True
                certificate = bound
                break
            status = np.frombuffer(blob, dtype=np.int8).copy()
            self.nodes += 1

            fixed_in = np.flatnonzero(status == FIXED_IN)
            self.scratch.reset()
            for j in fixed_in:
                self.scratch.add(int(j))
            self._offer(tuple(int(j) for j in fixed_in), self.scratch.rss)

            n_in = fixed_in.shape[0]
            if n_in >= self.s:
                continue
            free = np.flatnonzero(status == FREE)
            if free.shape[0] == 0:
                continue

            deltas = self.scratch.deltas(free)
            branch_j = int(free[int(np.argmin(deltas))])

            # Fixed-in child first: same candidate set, so the parent bound carries over.
            child_in = status.copy()
            child_in[branch_j] = FIXED_IN
            if _propagate_inplace(child_in, self.rules, self.s):
                if bound < self.inc_rss:
                    heapq.heappush(heap, (bound, depth + 1, next(seq), child_in.tobytes()))

            child_out = status.copy()
            child_out[branch_j] = FIXED_OUT
            if _propagate_inplace(child_out, self.rules, self.s):
                out_bound = self._node_bound(child_out)
                if out_bound < self.inc_rss:
                    heapq.heappush(heap, (out_bound, depth + 1, next(seq), child_out.tobytes()))

        fit = ols_fit(self.dataset, list(self.inc_support))
        if proven:
            best_bound = fit.rss if cfg.tolerance == 0.0 else float(certificate)
        elif truncated:
            open_min = heap[0][0] if heap else fit.rss
            best_bound = min(fit.rss, open_min)
        else:  # heap exhausted: every branch pruned or evaluated
            proven = True
            best_bound = fit.rss
        return SolveOutcome(
            best=fit,
            proven_optimal=proven,
            nodes_explored=self.nodes,
            wall_time=time.perf_counter() - t0,
            best_bound=float(best_bound),
            mode=self.mode,
            s=self.s,
        )


def solve(dataset: Dataset, hierarchy: Hierarchy, config: SolverConfig) -> SolveOutcome:
    """Best-first branch-and-bound over selection states.

    Anytime: with a time limit the incumbent is returned with
    proven_optimal=False and a valid global lower bound.  Deterministic
    given identical inputs and config.
    """
    return _Search(dataset, hierarchy, config).run()


def enumerate_exact(
    dataset: Dataset,
    hierarchy: Hierarchy,
    config: SolverConfig,
    rss_cache: dict[tuple[int, ...], float] | None = None,
) -> SolveOutcome:
    """Brute-force oracle: evaluate every feasible support of size <= s by ols_fit.

    Deliberately independent of the kernel path (QR fits only).  The
    optional rss_cache may be shared across calls on the same dataset to
    avoid refitting supports common to several modes.  second_rss reports
    the best RSS among all other feasible supports, so callers can check
    uniqueness of the optimum.
    """
    config = config.validated(dataset.p)
    if dataset.p > 25:
        raise DimensionError(f"enumeration guard: p={dataset.p} exceeds 25")
    t0 = time.perf_counter()
    triples = () if config.mode == "basic" else hierarchy.triples
    from .datakit import check_support_feasible  # local import avoids a cycle at module load

    best_rss = np.inf
    best_support: tuple[int, ...] = ()
    second = np.inf
    evaluated = 0
    for size in range(0, config.s + 1):
        for combo in itertools.combinations(range(dataset.p), size):
            if triples and not check_support_feasible(set(combo), triples, config.mode):
                continue
            if rss_cache is not None and combo in rss_cache:
                rss = rss_cache[combo]
            else:
                rss = ols_fit(dataset, list(combo)).rss
                if rss_cache is not None:
                    rss_cache[combo] = rss
            evaluated += 1
            if rss < best_rss or (rss == best_rss and combo < best_support):
                if best_rss < np.inf:
                    second = min(second, best_rss)
                best_rss, best_support = rss, combo
            else:
                second = min(second, rss)
    fit = ols_fit(dataset, list(best_support))
    return SolveOutcome(
        best=fit,
        proven_optimal=True,
        nodes_explored=evaluated,
        wall_time=time.perf_counter() - t0,
        best_bound=fit.rss,
        mode=config.mode,
        s=config.s,
        second_rss=None if math.isinf(second) else float(second),
    )
