"""Command-line interface: generate, select, cv, compare.

Exit codes: 0 success, 2 usage, 3 data validation, 4 infeasible, 5 internal.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

from . import datakit, report
from .baselines import lasso_select, stepwise
from .datakit import Hierarchy, SyntheticConfig
from .errors import (
    DataValidationError,
    HbselectError,
    InfeasibleConfigError,
    SolverInfeasibleError,
)
from .evaluation import METHODS, compare, cross_validate
from .solver import MODES, SolverConfig, solve


class UsageError(Exception):
    pass


def _add_io_args(sub, need_data=True):
    if need_data:
        sub.add_argument("--data", required=True, help="data CSV (header row, numeric cells)")
        sub.add_argument("--groups", required=True, help="grouping spec: lines `name,group`")
        sub.add_argument("--hierarchy", help="hierarchy file: lines `large,medium,small`")
        sub.add_argument("--y-col", default="y", help="name of the explained column")
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    sub.add_argument("--json", type=Path, help="write machine-readable results here")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hbselect",
        description="Best-subset selection for store-choice regression with "
        "hierarchical category constraints",
    )
    subs = parser.add_subparsers(dest="subcommand", required=True)

    p_gen = subs.add_parser("generate", help="write a synthetic dataset to a directory")
    p_gen.add_argument("--out-dir", type=Path, required=True)
    p_gen.add_argument("--config", type=Path, help="JSON file with full generator settings")
    p_gen.add_argument("--n", type=int, default=1000)
    p_gen.add_argument("--p-demo", type=int, default=10)
    p_gen.add_argument("--p-large", type=int, default=4)
    p_gen.add_argument("--p-medium", type=int, default=8)
    p_gen.add_argument("--p-small", type=int, default=10)
    p_gen.add_argument("--support-size", type=int, default=8)
    p_gen.add_argument("--mode", choices=MODES, default="strong")
    p_gen.add_argument("--sigma", type=float, default=1.0)
    p_gen.add_argument("--intercept", type=float, default=1.0)
    p_gen.add_argument("--coef-scale", type=float, default=1.0)
    _add_io_args(p_gen, need_data=False)
    p_gen.set_defaults(func=cmd_generate)

    p_sel = subs.add_parser("select", help="run one method at one s on the full dataset")
    p_sel.add_argument("--method", choices=METHODS, required=True)
    p_sel.add_argument("--s", type=int, required=True)
    p_sel.add_argument("--time-limit", type=float)
    _add_io_args(p_sel)
    p_sel.set_defaults(func=cmd_select)

    p_cv = subs.add_parser("cv", help="cross-validate one method")
    p_cv.add_argument("--method", choices=METHODS, required=True)
    p_cv.add_argument("--s", type=int, required=True)
    p_cv.add_argument("--k", type=int, default=5)
    p_cv.add_argument("--time-limit", type=float)
    _add_io_args(p_cv)
    p_cv.set_defaults(func=cmd_cv)

    p_cmp = subs.add_parser("compare", help="cross-validate several methods side by side")
    p_cmp.add_argument("--methods", default=",".join(METHODS))
    p_cmp.add_argument("--s-list", required=True, help="comma-separated cardinality caps")
    p_cmp.add_argument("--k", type=int, default=5)
    p_cmp.add_argument("--time-limit", type=float)
    _add_io_args(p_cmp)
    p_cmp.set_defaults(func=cmd_compare)

    return parser


# ---------------------------------------------------------------------------
# Shared data pipeline
# ---------------------------------------------------------------------------

def _load_inputs(args):
    groups = datakit.load_groups(args.groups)
    dataset = datakit.load_csv(args.data, groups, y_col=args.y_col)
    hierarchy = Hierarchy.empty()
    if args.hierarchy:
        hierarchy = datakit.load_hierarchy(args.hierarchy, dataset)
    reduced, dropped = datakit.drop_redundant(dataset)
    if dropped:
        print(f"dropped {len(dropped)} redundant column(s): {', '.join(dropped)}", file=sys.stderr)
        hierarchy = datakit.remap_hierarchy(hierarchy, dataset, reduced)
        dataset = reduced
    return dataset, hierarchy


def _manifest(args, inputs):
    flags = {k: v for k, v in vars(args).items() if k != "func" and not callable(v)}
    m = report.build_manifest(args.subcommand, flags, inputs, getattr(args, "seed", None))
    m["started_utc"] = report.now_utc()
    return m


def _require_hierarchy(args):
    if getattr(args, "method", None) in ("strong", "weak") and not args.hierarchy:
        raise UsageError(f"--method {args.method} requires --hierarchy")


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_generate(args) -> int:
    manifest = _manifest(args, [args.config] if args.config else [])
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            raw = json.load(fh)
        raw["support"] = tuple(raw.get("support", ()))
        raw["coefs"] = tuple(raw.get("coefs", ()))
        config = SyntheticConfig(**raw)
    else:
        config = _random_config(args)
    dataset, hierarchy, truth = datakit.generate(config)
    out = args.out_dir
    out.mkdir(parents=True, exist_ok=True)
    datakit.write_csv(dataset, out / "data.csv")
    datakit.write_groups(dataset, out / "groups.csv")
    datakit.write_hierarchy(hierarchy, dataset, out / "hierarchy.csv")
    manifest["finished_utc"] = report.now_utc()
    truth["manifest"] = manifest
    datakit.write_ground_truth(truth, out / "truth.json")
    print(f"wrote data.csv, groups.csv, hierarchy.csv, truth.json to {out}")
    return 0


def _random_config(args) -> SyntheticConfig:
    return datakit.random_config(
        seed=args.seed,
        n=args.n,
        p_demo=args.p_demo,
        p_large=args.p_large,
        p_medium=args.p_medium,
        p_small=args.p_small,
        support_size=args.support_size,
        hierarchy_mode=args.mode,
        noise_sd=args.sigma,
        intercept=args.intercept,
        coef_scale=args.coef_scale,
    )


def cmd_select(args) -> int:
    _require_hierarchy(args)
    manifest = _manifest(args, [args.data, args.groups, args.hierarchy])
    dataset, hierarchy = _load_inputs(args)
    t0 = time.perf_counter()
    outcome = None
    if args.method in MODES:
        cfg = SolverConfig(s=args.s, mode=args.method, time_limit=args.time_limit)
        outcome = solve(dataset, hierarchy, cfg)
        fit = outcome.best
    elif args.method == "stepwise":
        fit = stepwise(dataset, args.s).fit
    else:
        fit = lasso_select(dataset, args.s).fit
    wall = time.perf_counter() - t0

    print(report.coefficient_table(dataset, fit))
    if outcome is not None:
        status = "optimal" if outcome.proven_optimal else "time limit reached; best incumbent"
        print(f"rss={fit.rss:.6g} bound={outcome.best_bound:.6g} "
              f"nodes={outcome.nodes_explored} time={wall:.1f}s ({status})")
    else:
        print(f"rss={fit.rss:.6g} time={wall:.1f}s")
    if args.json:
        payload = report.selection_result_dict(dataset, fit, args.method, args.s, wall, outcome)
        manifest["finished_utc"] = report.now_utc()
        payload["manifest"] = manifest
        report.write_json(payload, args.json)
    return 0


def cmd_cv(args) -> int:
    _require_hierarchy(args)
    if args.k < 2:
        raise UsageError("--k must be >= 2")
    manifest = _manifest(args, [args.data, args.groups, args.hierarchy])
    dataset, hierarchy = _load_inputs(args)
    cv = cross_validate(
        dataset, hierarchy, args.method, args.s,
        k=args.k, seed=args.seed, time_limit=args.time_limit, threads=args.threads,
    )
    print(report.render_cv(cv))
    if args.json:
        payload = report.cv_report_dict(cv)
        manifest["finished_utc"] = report.now_utc()
        payload["manifest"] = manifest
        report.write_json(payload, args.json)
    return 0


def cmd_compare(args) -> int:
    if args.k < 2:
        raise UsageError("--k must be >= 2")
    methods = tuple(m.strip() for m in args.methods.split(",") if m.strip())
    for m in methods:
        if m not in METHODS:
            raise UsageError(f"unknown method {m!r}")
    try:
        s_values = tuple(int(v) for v in args.s_list.split(","))
    except ValueError:
        raise UsageError(f"--s-list must be comma-separated integers, got {args.s_list!r}") from None
    if any(m in ("strong", "weak") for m in methods) and not args.hierarchy:
        raise UsageError("strong/weak methods require --hierarchy")
    manifest = _manifest(args, [args.data, args.groups, args.hierarchy])
    dataset, hierarchy = _load_inputs(args)
    result = compare(
        dataset, hierarchy, methods, s_values,
        k=args.k, seed=args.seed, time_limit=args.time_limit, threads=args.threads,
    )
    print(report.render_comparison(result))
    if args.json:
        payload = report.comparison_dict(result)
        manifest["finished_utc"] = report.now_utc()
        payload["manifest"] = manifest
        report.write_json(payload, args.json)
    return 0


# ---------------------------------------------------------------------------

def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except (InfeasibleConfigError, SolverInfeasibleError) as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return 4
    except DataValidationError as exc:
        print(f"invalid data: {exc}", file=sys.stderr)
        return 3
    except FileNotFoundError as exc:
        print(f"invalid data: {exc}", file=sys.stderr)
        return 3
    except HbselectError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 5
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
