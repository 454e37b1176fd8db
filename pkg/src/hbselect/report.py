"""Result serialization (JSON) and text tables for selection and comparison runs."""

from __future__ import annotations

import hashlib
import json
from datetime import datetime, timezone
from pathlib import Path

from .datakit import Dataset
from .errors import InferenceUnavailableError
from .evaluation import ComparisonReport, CvReport
from .linalg import FitResult, InferenceReport, infer
from .solver import SolveOutcome

SCHEMA_CVREPORT = "cvreport/1"


def selection_result_dict(
    dataset: Dataset,
    fit: FitResult,
    method: str,
    s: int,
    wall_time: float,
    outcome: SolveOutcome | None = None,
) -> dict:
    """The shared result schema; solver fields are null for the baselines."""
    idx = fit.support_indices
    return {
        "method": method,
        "mode": outcome.mode if outcome is not None else None,
        "s": s,
        "rss": fit.rss,
        "proven_optimal": outcome.proven_optimal if outcome is not None else None,
        "best_bound": outcome.best_bound if outcome is not None else None,
        "wall_time_s": wall_time,
        "nodes": outcome.nodes_explored if outcome is not None else None,
        "intercept": fit.intercept,
        "coefficients": {dataset.names[j]: float(fit.a[j]) for j in idx},
        "selected": [dataset.names[j] for j in idx],
    }


def coefficient_table(dataset: Dataset, fit: FitResult) -> str:
    """Selected variables sorted by descending coefficient, with stars when available."""
    stars: dict[str, str] = {}
    note = ""
    try:
        report: InferenceReport = infer(dataset, fit)
        stars = {row.name: row.stars for row in report.rows}
    except InferenceUnavailableError as exc:
        note = f"(inference unavailable: {exc})"
    entries = [("intercept", fit.intercept)]
    entries += [(dataset.names[j], float(fit.a[j])) for j in fit.support_indices]
    entries.sort(key=lambda e: -e[1])
    width = max(len(name) for name, _ in entries) + 2
    lines = [f"{'variable':>{width}}  {'coefficient':>12}"]
    for name, value in entries:
        lines.append(f"{name:>{width}}  {value:>12.4f} {stars.get(name, '')}".rstrip())
    if note:
        lines.append(note)
    return "\n".join(lines)


def _fold_dicts(report: CvReport) -> list[dict]:
    return [
        {
            "fold": f.fold,
            "r2": f.r2,
            "rmse": f.rmse,
            "wall_time_s": f.wall_time,
            "excluded": f.excluded,
            "note": f.note,
        }
        for f in report.folds
    ]


def cv_report_dict(report: CvReport) -> dict:
    return {
        "schema": SCHEMA_CVREPORT,
        "rows": [_cv_row_dict(report)],
        "k": report.k,
        "seed": report.seed,
    }


def _cv_row_dict(report: CvReport, best_r2: bool = False, best_rmse: bool = False) -> dict:
    return {
        "method": report.method,
        "s": report.s,
        "merged": report.merged,
        "r2": report.r2_mean,
        "rmse": report.rmse_mean,
        "time_s": report.time_mean,
        "best_r2": best_r2,
        "best_rmse": best_rmse,
        "excluded_folds": list(report.excluded_folds),
        "folds": _fold_dicts(report),
    }


def comparison_dict(report: ComparisonReport) -> dict:
    rows = []
    for row in report.rows:
        best_r2, best_rmse = report.best_methods(row.s)
        rows.append(_cv_row_dict(row, row.method in best_r2, row.method in best_rmse))
    return {
        "schema": SCHEMA_CVREPORT,
        "rows": rows,
        "s_values": list(report.s_values),
        "k": report.k,
        "seed": report.seed,
        "merged_modes": report.merged_modes,
    }


def render_comparison(report: ComparisonReport) -> str:
    """Aligned text table, one row per (s, method); best values marked with '*'."""
    header = f"{'s':>4}  {'method':<12} {'R2':>10} {'RMSE':>10} {'time (s)':>9}"
    lines = [header, "-" * len(header)]
    for s in report.s_values:
        best_r2, best_rmse = report.best_methods(s)
        for row in report.rows:
            if row.s != s:
                continue
            r2 = "n/a" if row.r2_mean is None else f"{row.r2_mean:.4f}"
            rm = "n/a" if row.rmse_mean is None else f"{row.rmse_mean:.4f}"
            if row.method in best_r2:
                r2 += "*"
            if row.method in best_rmse:
                rm += "*"
            t = "n/a" if row.time_mean is None else f"{row.time_mean:.1f}"
            lines.append(f"{s:>4}  {row.method:<12} {r2:>10} {rm:>10} {t:>9}")
    if report.merged_modes:
        lines.append("strong/weak: identical constraint sets on this data, run as one model")
    return "\n".join(lines)


def render_cv(report: CvReport) -> str:
    lines = [f"method={report.method} s={report.s} k={report.k} seed={report.seed}"]
    for f in report.folds:
        if f.excluded:
            lines.append(f"  fold {f.fold}: excluded ({f.note})")
        else:
            lines.append(
                f"  fold {f.fold}: R2={f.r2:.4f} RMSE={f.rmse:.4f} time={f.wall_time:.1f}s"
            )
    if report.r2_mean is not None:
        lines.append(
            f"  mean: R2={report.r2_mean:.4f} RMSE={report.rmse_mean:.4f} "
            f"time={report.time_mean:.1f}s"
        )
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# Run manifests
# ---------------------------------------------------------------------------

def file_digest(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def build_manifest(subcommand: str, flags: dict, inputs: list[str | Path], seed: int | None) -> dict:
    from . import __version__

    return {
        "subcommand": subcommand,
        "flags": {k: (str(v) if isinstance(v, Path) else v) for k, v in sorted(flags.items())},
        "inputs": {str(p): file_digest(p) for p in inputs if p is not None},
        "seed": seed,
        "version": __version__,
        "started_utc": None,  # filled by the CLI just before work starts
        "finished_utc": None,
    }


def now_utc() -> str:
    return datetime.now(timezone.utc).isoformat()


def write_json(payload: dict, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
