"""Experiment runners: model comparison, feature/level ablations, and the
per-user personalized protocol.

Each runner evaluates a list of configurations over stratified folds and
aggregates per-fold metrics into table rows (mean +/- sd for accuracy and
macro-F1, fold-mean per-class rates, timing). The model-comparison runner
additionally ranks models per fold and runs the Friedman test on accuracy
and macro-F1.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field

import numpy as np

from . import features as feat
from ._util import child_seed, parallel_map
from .config import PipelineConfig
from .dataio import Dataset
from .errors import UsageError, UserIneligible
from .evaluation import (
    FriedmanResult,
    MetricsReport,
    classification_metrics,
    confusion_matrix,
    friedman_test,
    measure_timing,
)
from .learners import make_model
from .partition import (
    LEVEL_COMBOS,
    PERSONAL_LEVELS,
    SpecificityLevel,
    assign_levels,
    combo_name,
    compose_training_set,
    eligible_users,
    parse_combo,
    personalized_plan,
    stratified_kfold,
)
from .preprocess import (
    BinningThresholds,
    CleaningPolicy,
    WindowSet,
    apply_standardizer,
    fit_standardizer,
    prepare_windows,
)

EXPERIMENT_KINDS = (
    "compare-models",
    "ablate-features",
    "ablate-levels",
    "personalize",
)

# Fit/predict wall-clock sections run under this lock so concurrent folds do
# not skew each other's timing.
_TIMING_LOCK = threading.Lock()


@dataclass
class FoldOutcome:
    fold: int
    n_train: int
    n_test: int
    metrics: MetricsReport

    def as_dict(self) -> dict:
        return {
            "fold": self.fold,
            "n_train": self.n_train,
            "n_test": self.n_test,
            "metrics": self.metrics.as_dict(),
        }


@dataclass
class ExperimentRow:
    name: str
    user: str = ""
    n_train_mean: float = 0.0
    accuracy_mean: float = 0.0
    accuracy_sd: float = 0.0
    macro_f1_mean: float = 0.0
    macro_f1_sd: float = 0.0
    precision: tuple[float, ...] = (0.0,) * 4
    recall: tuple[float, ...] = (0.0,) * 4
    f1: tuple[float, ...] = (0.0,) * 4
    train_time_s: float = 0.0
    inference_ms_per_sample: float = 0.0
    avg_rank_accuracy: float | None = None
    avg_rank_macro_f1: float | None = None
    folds: list[FoldOutcome] = field(default_factory=list)

    def as_dict(self) -> dict:
        out = {
            "name": self.name,
            "user": self.user,
            "n_train_mean": self.n_train_mean,
            "accuracy_mean": self.accuracy_mean,
            "accuracy_sd": self.accuracy_sd,
            "macro_f1_mean": self.macro_f1_mean,
            "macro_f1_sd": self.macro_f1_sd,
            "precision": list(self.precision),
            "recall": list(self.recall),
            "f1": list(self.f1),
            "train_time_s": self.train_time_s,
            "inference_ms_per_sample": self.inference_ms_per_sample,
            "avg_rank_accuracy": self.avg_rank_accuracy,
            "avg_rank_macro_f1": self.avg_rank_macro_f1,
            "folds": [f.as_dict() for f in self.folds],
        }
        return out


@dataclass
class ExperimentResult:
    kind: str
    seed: int
    config: dict
    rows: list[ExperimentRow]
    friedman: dict[str, FriedmanResult] | None = None
    dataset_provenance: str = ""
    n_windows: int = 0
    warnings: list[str] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "kind": self.kind,
            "seed": self.seed,
            "config": self.config,
            "rows": [r.as_dict() for r in self.rows],
            "friedman": (
                {k: v.as_dict() for k, v in self.friedman.items()}
                if self.friedman
                else None
            ),
            "dataset_provenance": self.dataset_provenance,
            "n_windows": self.n_windows,
            "warnings": self.warnings,
        }


# ---------------------------------------------------------------------------
# Shared machinery


def windows_from_config(dataset: Dataset, config: PipelineConfig) -> WindowSet:
    pp = config.data["preprocess"]
    thresholds = BinningThresholds(pp["none_max"], pp["low_max"], pp["medium_max"])
    policy = CleaningPolicy(pp["clip_sigma"], pp["smooth_window"], pp["impute"])
    return prepare_windows(dataset, thresholds, policy, pp["window_frames"])


def _model_factory(config: PipelineConfig, kind: str, seed: int, threads: int = 1):
    params = config.model_params(kind)
    if kind == "stack":
        params["base_params"] = {k: config.model_params(k) for k in ("rf", "et", "gbt")}
    return make_model(kind, seed=seed, threads=threads, params=params)


def _run_fold(Xp, y, train_idx, test_idx, model, fold: int) -> FoldOutcome:
    scaler = fit_standardizer(Xp[train_idx])
    X_train = apply_standardizer(scaler, Xp[train_idx])
    X_test = apply_standardizer(scaler, Xp[test_idx])
    y_train, y_test = y[train_idx], y[test_idx]

    predictions = []
    with _TIMING_LOCK:
        train_s, inference_ms = measure_timing(
            lambda: model.fit(X_train, y_train),
            lambda: predictions.append(model.predict(X_test)),
            X_test,
        )
    metrics = classification_metrics(confusion_matrix(y_test, predictions[-1]))
    metrics.train_time_s = train_s
    metrics.inference_ms_per_sample = inference_ms
    return FoldOutcome(
        fold=fold, n_train=len(train_idx), n_test=len(test_idx), metrics=metrics
    )


def _aggregate(name: str, outcomes: list[FoldOutcome], user: str = "") -> ExperimentRow:
    acc = np.array([o.metrics.accuracy for o in outcomes])
    mf1 = np.array([o.metrics.macro_f1 for o in outcomes])
    return ExperimentRow(
        name=name,
        user=user,
        n_train_mean=float(np.mean([o.n_train for o in outcomes])),
        accuracy_mean=float(acc.mean()),
        accuracy_sd=float(acc.std()),
        macro_f1_mean=float(mf1.mean()),
        macro_f1_sd=float(mf1.std()),
        precision=tuple(np.mean([o.metrics.precision for o in outcomes], axis=0)),
        recall=tuple(np.mean([o.metrics.recall for o in outcomes], axis=0)),
        f1=tuple(np.mean([o.metrics.f1 for o in outcomes], axis=0)),
        train_time_s=float(np.mean([o.metrics.train_time_s for o in outcomes])),
        inference_ms_per_sample=float(
            np.mean([o.metrics.inference_ms_per_sample for o in outcomes])
        ),
        folds=outcomes,
    )


def _cross_user_rows(
    windows: WindowSet,
    row_specs: list[tuple[str, str, tuple, str]],
    config: PipelineConfig,
    threads: int,
) -> list[ExperimentRow]:
    """Evaluate (name, subset, combo, model kind) rows over shared folds."""
    k = config.get("cv.k")
    seed = config.get("cv.seed")
    plan = stratified_kfold(windows.y, k=k, seed=seed)
    folds = [f for f in plan.folds if len(f)]
    assignments = [assign_levels(windows, f) for f in folds]
    projected = {
        subset: feat.project(windows.X, feat.resolve_subset(subset))
        for subset in {spec[1] for spec in row_specs}
    }

    jobs = [
        (ri, fi)
        for ri in range(len(row_specs))
        for fi in range(len(folds))
    ]

    def run(job):
        ri, fi = job
        name, subset, combo, kind = row_specs[ri]
        train_idx = compose_training_set(assignments[fi], combo)
        model = _model_factory(config, kind, child_seed(seed, ri, fi))
        return _run_fold(projected[subset], windows.y, train_idx, folds[fi], model, fi)

    outcomes = parallel_map(run, jobs, threads)
    rows = []
    for ri, (name, _, _, _) in enumerate(row_specs):
        rows.append(_aggregate(name, [outcomes[ri * len(folds) + fi] for fi in range(len(folds))]))
    return rows


# ---------------------------------------------------------------------------
# Runners


def run_compare_models(dataset: Dataset, config: PipelineConfig, threads: int = 1) -> ExperimentResult:
    """All four ensembles on the configured combo (default L1+L2+L3) with the
    full 40-dim features, plus Friedman tests over the fold scores."""
    windows = windows_from_config(dataset, config)
    combo = parse_combo(config.get("experiment.combo"))
    row_specs = [(kind, "all40", combo, kind) for kind in ("rf", "et", "gbt", "stack")]
    rows = _cross_user_rows(windows, row_specs, config, threads)

    acc_scores = np.array([[o.metrics.accuracy for o in row.folds] for row in rows]).T
    f1_scores = np.array([[o.metrics.macro_f1 for o in row.folds] for row in rows]).T
    friedman = {
        "accuracy": friedman_test(acc_scores),
        "macro_f1": friedman_test(f1_scores),
    }
    for j, row in enumerate(rows):
        row.avg_rank_accuracy = float(friedman["accuracy"].mean_ranks[j])
        row.avg_rank_macro_f1 = float(friedman["macro_f1"].mean_ranks[j])
    return ExperimentResult(
        kind="compare-models",
        seed=config.get("cv.seed"),
        config=config.to_dict(),
        rows=rows,
        friedman=friedman,
        dataset_provenance=dataset.provenance,
        n_windows=len(windows),
        warnings=windows.warnings,
    )


def run_ablate_features(dataset: Dataset, config: PipelineConfig, threads: int = 1) -> ExperimentResult:
    """One row per semantic group, then the four named subsets, all with the
    boosted-tree model on the configured combo."""
    windows = windows_from_config(dataset, config)
    combo = parse_combo(config.get("experiment.combo"))
    kind = config.get("model.kind")
    row_specs = [
        (f"group:{g}", f"group:{g}", combo, kind) for g in feat.GROUP_NAMES
    ] + [
        (name, name, combo, kind) for name in ("head7", "eye16", "optimal23", "all40")
    ]
    rows = _cross_user_rows(windows, row_specs, config, threads)
    return ExperimentResult(
        kind="ablate-features",
        seed=config.get("cv.seed"),
        config=config.to_dict(),
        rows=rows,
        dataset_provenance=dataset.provenance,
        n_windows=len(windows),
        warnings=windows.warnings,
    )


def run_ablate_levels(dataset: Dataset, config: PipelineConfig, threads: int = 1) -> ExperimentResult:
    """The seven level combinations with the boosted-tree model on the
    configured feature subset, reporting training-set sizes per combo."""
    windows = windows_from_config(dataset, config)
    kind = config.get("model.kind")
    subset = config.get("features.subset")
    row_specs = [(combo_name(c), subset, c, kind) for c in LEVEL_COMBOS]
    rows = _cross_user_rows(windows, row_specs, config, threads)
    return ExperimentResult(
        kind="ablate-levels",
        seed=config.get("cv.seed"),
        config=config.to_dict(),
        rows=rows,
        dataset_provenance=dataset.provenance,
        n_windows=len(windows),
        warnings=windows.warnings,
    )


PERSONAL_CONFIGS: tuple[tuple[str, tuple], ...] = (
    ("L0", (SpecificityLevel.L0,)),
    ("L0+L1+L3", PERSONAL_LEVELS),
)


def run_personalize(dataset: Dataset, config: PipelineConfig, threads: int = 1) -> ExperimentResult:
    """Per eligible user: baseline training on other users only (L0) versus
    L0 plus the user's cross-scenario (L1) and same-segment (L3) data."""
    windows = windows_from_config(dataset, config)
    kind = config.get("model.kind")
    subset = config.get("features.subset")
    seed = config.get("cv.seed")
    k = config.get("experiment.personal_k")
    target = config.get("experiment.target_user")
    if target:
        users = [target]
        if target not in eligible_users(windows):
            raise UserIneligible(
                f"user {target!r} does not span >= 2 classes"
            )
    else:
        users = eligible_users(windows)
        if not users:
            raise UserIneligible("no user spans >= 2 classes")

    Xp = feat.project(windows.X, feat.resolve_subset(subset))

    jobs = []
    for ci, (label, levels) in enumerate(PERSONAL_CONFIGS):
        for ui, user in enumerate(users):
            jobs.append((ui, user, ci, label, levels))

    def run(job):
        ui, user, ci, label, levels = job
        fold_pairs = personalized_plan(windows, user, k=k, seed=seed, levels=levels)
        outcomes = []
        for fi, (train_idx, test_idx) in enumerate(fold_pairs):
            model = _model_factory(config, kind, child_seed(seed, ui, ci, fi))
            outcomes.append(_run_fold(Xp, windows.y, train_idx, test_idx, model, fi))
        return _aggregate(label, outcomes, user=user)

    user_rows = parallel_map(run, jobs, threads)

    # group rows per configuration, each followed by its across-user mean
    rows = []
    for label, _ in PERSONAL_CONFIGS:
        block = [r for r in user_rows if r.name == label]
        rows.extend(block)
        rows.append(ExperimentRow(
            name=label,
            user="mean",
            n_train_mean=float(np.mean([r.n_train_mean for r in block])),
            accuracy_mean=float(np.mean([r.accuracy_mean for r in block])),
            accuracy_sd=float(np.std([r.accuracy_mean for r in block])),
            macro_f1_mean=float(np.mean([r.macro_f1_mean for r in block])),
            macro_f1_sd=float(np.std([r.macro_f1_mean for r in block])),
            precision=tuple(np.mean([r.precision for r in block], axis=0)),
            recall=tuple(np.mean([r.recall for r in block], axis=0)),
            f1=tuple(np.mean([r.f1 for r in block], axis=0)),
            train_time_s=float(np.mean([r.train_time_s for r in block])),
            inference_ms_per_sample=float(
                np.mean([r.inference_ms_per_sample for r in block])
            ),
        ))

    return ExperimentResult(
        kind="personalize",
        seed=seed,
        config=config.to_dict(),
        rows=rows,
        dataset_provenance=dataset.provenance,
        n_windows=len(windows),
        warnings=windows.warnings,
    )


_RUNNERS = {
    "compare-models": run_compare_models,
    "ablate-features": run_ablate_features,
    "ablate-levels": run_ablate_levels,
    "personalize": run_personalize,
}


def run_experiment(
    kind: str, dataset: Dataset, config: PipelineConfig, threads: int = 1
) -> ExperimentResult:
    if kind not in _RUNNERS:
        raise UsageError(
            f"unknown experiment {kind!r}; expected one of {EXPERIMENT_KINDS}"
        )
    return _RUNNERS[kind](dataset, config, threads)
