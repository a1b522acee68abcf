"""Result emission: machine-readable JSON, per-configuration CSV, and a
markdown table mirroring the corresponding result-table layout."""

from __future__ import annotations

import copy
import csv
import io
import json
import time
from pathlib import Path

import numpy as np

from . import features as feat
from .errors import UsageError
from .evaluation import CLASS_NAMES, FriedmanResult, MetricsReport
from .experiments import ExperimentResult, ExperimentRow, FoldOutcome

FORMATS = ("json", "csv", "md")

TIMING_KEYS = {"train_time_s", "inference_ms_per_sample"}


def strip_timing(obj):
    """Copy of a result dict with wall-clock fields removed, for equality
    comparisons across runs."""
    if isinstance(obj, dict):
        return {k: strip_timing(v) for k, v in obj.items() if k not in TIMING_KEYS}
    if isinstance(obj, list):
        return [strip_timing(v) for v in obj]
    return obj


def result_filename(result: ExperimentResult, config_hash: str, fmt: str,
                    timestamp: str | None = None) -> str:
    ts = timestamp or time.strftime("%Y%m%d-%H%M%S", time.gmtime())
    return f"{result.kind}-{ts}-{config_hash}.{fmt}"


def to_json(result: ExperimentResult) -> str:
    return json.dumps(result.as_dict(), indent=2, sort_keys=True)


_CSV_COLUMNS = (
    ["name", "user", "n_train_mean", "accuracy_mean", "accuracy_sd",
     "macro_f1_mean", "macro_f1_sd"]
    + [f"precision_{c}" for c in CLASS_NAMES]
    + [f"recall_{c}" for c in CLASS_NAMES]
    + [f"f1_{c}" for c in CLASS_NAMES]
    + ["train_time_s", "inference_ms_per_sample",
       "avg_rank_accuracy", "avg_rank_macro_f1"]
)


def to_csv(result: ExperimentResult) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(_CSV_COLUMNS)
    for row in result.rows:
        writer.writerow(
            [row.name, row.user, f"{row.n_train_mean:g}",
             f"{row.accuracy_mean:.6f}", f"{row.accuracy_sd:.6f}",
             f"{row.macro_f1_mean:.6f}", f"{row.macro_f1_sd:.6f}"]
            + [f"{v:.6f}" for v in row.precision]
            + [f"{v:.6f}" for v in row.recall]
            + [f"{v:.6f}" for v in row.f1]
            + [f"{row.train_time_s:.6f}", f"{row.inference_ms_per_sample:.6f}",
               "" if row.avg_rank_accuracy is None else f"{row.avg_rank_accuracy:.2f}",
               "" if row.avg_rank_macro_f1 is None else f"{row.avg_rank_macro_f1:.2f}"]
        )
    return buf.getvalue()


def _md_table(header: list[str], rows: list[list[str]]) -> str:
    lines = ["| " + " | ".join(header) + " |",
             "|" + "|".join("---" for _ in header) + "|"]
    for row in rows:
        lines.append("| " + " | ".join(row) + " |")
    return "\n".join(lines) + "\n"


def _prf_cells(row) -> list[str]:
    return (
        [f"{v:.2f}" for v in row.precision]
        + [f"{v:.2f}" for v in row.recall]
        + [f"{v:.2f}" for v in row.f1]
    )


def to_markdown(result: ExperimentResult) -> str:
    initials = [c[0] for c in CLASS_NAMES]
    prf_header = (
        [f"P({c})" for c in initials]
        + [f"R({c})" for c in initials]
        + [f"F1({c})" for c in initials]
    )
    out = [f"## {result.kind}", ""]
    if result.kind == "compare-models":
        header = (
            ["Model", "Train Time (s)", "Inf. Time /Sample (ms)"]
            + prf_header
            + ["Acc. (Mean±Std)", "Acc. Avg Rank", "F1-Macro (Mean±Std)",
               "F1-Macro Avg Rank"]
        )
        body = [
            [row.name, f"{row.train_time_s:.3f}",
             f"{row.inference_ms_per_sample:.3f}"]
            + _prf_cells(row)
            + [f"{row.accuracy_mean:.2f}±{row.accuracy_sd:.2f}",
               f"{row.avg_rank_accuracy:.2f}",
               f"{row.macro_f1_mean:.2f}±{row.macro_f1_sd:.2f}",
               f"{row.avg_rank_macro_f1:.2f}"]
            for row in result.rows
        ]
        out.append(_md_table(header, body))
        if result.friedman:
            out.append("")
            for metric, fr in result.friedman.items():
                out.append(
                    f"Friedman on {metric}: chi2 = {fr.chi2:.2f}, "
                    f"p = {fr.p_value:.3g} (dof = {fr.dof})"
                )
    elif result.kind == "ablate-features":
        header = ["Feature Amount", "Features", "Acc."] + prf_header
        body = [
            [str(len(feat.resolve_subset(row.name))), row.name,
             f"{row.accuracy_mean:.2f}"] + _prf_cells(row)
            for row in result.rows
        ]
        out.append(_md_table(header, body))
    elif result.kind == "ablate-levels":
        header = ["Training Data", "Sample Size", "Acc."] + prf_header
        body = [
            [row.name, f"{row.n_train_mean:.0f}", f"{row.accuracy_mean:.2f}"]
            + _prf_cells(row)
            for row in result.rows
        ]
        out.append(_md_table(header, body))
    elif result.kind == "personalize":
        header = ["Training Data", "User", "Acc."] + [
            f"F1({c})" for c in initials
        ]
        body = [
            [row.name, row.user, f"{row.accuracy_mean:.2f}"]
            + [f"{v:.2f}" for v in row.f1]
            for row in result.rows
        ]
        out.append(_md_table(header, body))
    else:
        out.append(_md_table(["Row", "Accuracy"], [
            [row.name, f"{row.accuracy_mean:.3f}"] for row in result.rows
        ]))
    return "\n".join(out) + "\n"


def emit_report(
    result: ExperimentResult,
    formats,
    out_dir: str | Path,
    config_hash: str = "00000000",
    timestamp: str | None = None,
) -> list[Path]:
    """Write the requested formats into *out_dir*; returns written paths."""
    renderers = {"json": to_json, "csv": to_csv, "md": to_markdown}
    for fmt in formats:
        if fmt not in renderers:
            raise UsageError(f"unknown report format {fmt!r}; expected {FORMATS}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for fmt in formats:
        path = out_dir / result_filename(result, config_hash, fmt, timestamp)
        path.write_text(renderers[fmt](result), encoding="utf-8")
        written.append(path)
    return written


def load_result_json(path: str | Path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def result_from_dict(data: dict) -> ExperimentResult:
    """Rebuild an ExperimentResult from its JSON dict (for re-emission)."""
    rows = []
    for rd in data["rows"]:
        folds = [
            FoldOutcome(
                fold=fd["fold"],
                n_train=fd["n_train"],
                n_test=fd["n_test"],
                metrics=MetricsReport(
                    accuracy=fd["metrics"]["accuracy"],
                    precision=tuple(fd["metrics"]["precision"]),
                    recall=tuple(fd["metrics"]["recall"]),
                    f1=tuple(fd["metrics"]["f1"]),
                    macro_f1=fd["metrics"]["macro_f1"],
                    train_time_s=fd["metrics"]["train_time_s"],
                    inference_ms_per_sample=fd["metrics"]["inference_ms_per_sample"],
                ),
            )
            for fd in rd["folds"]
        ]
        rows.append(
            ExperimentRow(
                name=rd["name"],
                user=rd["user"],
                n_train_mean=rd["n_train_mean"],
                accuracy_mean=rd["accuracy_mean"],
                accuracy_sd=rd["accuracy_sd"],
                macro_f1_mean=rd["macro_f1_mean"],
                macro_f1_sd=rd["macro_f1_sd"],
                precision=tuple(rd["precision"]),
                recall=tuple(rd["recall"]),
                f1=tuple(rd["f1"]),
                train_time_s=rd["train_time_s"],
                inference_ms_per_sample=rd["inference_ms_per_sample"],
                avg_rank_accuracy=rd["avg_rank_accuracy"],
                avg_rank_macro_f1=rd["avg_rank_macro_f1"],
                folds=folds,
            )
        )
    friedman = None
    if data.get("friedman"):
        friedman = {
            key: FriedmanResult(
                n_blocks=fd["n_blocks"],
                n_treatments=fd["n_treatments"],
                rank_matrix=np.array(fd["rank_matrix"]),
                mean_ranks=np.array(fd["mean_ranks"]),
                chi2=fd["chi2"],
                p_value=fd["p_value"],
                dof=fd["dof"],
            )
            for key, fd in data["friedman"].items()
        }
    return ExperimentResult(
        kind=data["kind"],
        seed=data["seed"],
        config=copy.deepcopy(data["config"]),
        rows=rows,
        friedman=friedman,
        dataset_provenance=data["dataset_provenance"],
        n_windows=data["n_windows"],
        warnings=list(data["warnings"]),
    )
