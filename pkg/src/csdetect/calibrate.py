"""Pretrain-then-calibrate workflow for one target user.

The model pretrains on cross-user data (L0) plus the target user's
cross-scenario data (L1), then refits from scratch as same-segment (L3)
calibration data arrives, one scheduled segment at a time. Each step
records the refit wall time and metrics on a fixed held-out fold, so the
final step reproduces the personalized protocol's training set exactly.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import features as feat
from ._util import child_seed
from .config import PipelineConfig
from .dataio import Dataset
from .errors import UsageError, UserIneligible
from .evaluation import MetricsReport, classification_metrics, confusion_matrix
from .experiments import _model_factory, windows_from_config
from .partition import (
    SpecificityLevel,
    assign_levels,
    eligible_users,
    personalized_plan,
    stratified_kfold,
)
from .preprocess import apply_standardizer, fit_standardizer

SCHEDULES = ("per-segment", "all-at-once")


@dataclass
class CalibrationStep:
    step: int
    added_segments: list[int]
    n_train: int
    train_time_s: float
    metrics: MetricsReport
    predictions: np.ndarray

    def as_dict(self) -> dict:
        return {
            "step": self.step,
            "added_segments": self.added_segments,
            "n_train": self.n_train,
            "train_time_s": self.train_time_s,
            "metrics": self.metrics.as_dict(),
        }


@dataclass
class CalibrationSession:
    user: str
    fold: int
    steps: list[CalibrationStep] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "user": self.user,
            "fold": self.fold,
            "steps": [s.as_dict() for s in self.steps],
        }


def run_calibration(
    dataset: Dataset,
    target_user: str,
    config: PipelineConfig,
    schedule: str = "per-segment",
    fold_index: int = 0,
    threads: int = 1,
) -> CalibrationSession:
    """Refit the configured model as L3 segments arrive for *target_user*.

    Step 0 trains on L0 (other users) plus L1 (the target's cross-scenario
    data); each later step adds the next scheduled L3 segment's windows and
    refits from scratch. Metrics are evaluated on the target user's held-out
    fold ``fold_index`` of the personalized plan, so the final step matches
    a direct L0+L1+L3 personalized run with the same seed.
    """
    if schedule not in SCHEDULES:
        raise UsageError(f"unknown schedule {schedule!r}; expected {SCHEDULES}")
    windows = windows_from_config(dataset, config)
    if target_user not in eligible_users(windows):
        raise UserIneligible(f"user {target_user!r} does not span >= 2 classes")

    kind = config.get("model.kind")
    subset = config.get("features.subset")
    seed = config.get("cv.seed")
    k = config.get("experiment.personal_k")

    # Reproduce the personalized plan's fold to anchor the test set.
    user_idx = np.flatnonzero(windows.users.astype(str) == target_user)
    plan = stratified_kfold(windows.y[user_idx], k=k, seed=seed)
    folds = [f for f in plan.folds if len(f)]
    if not 0 <= fold_index < len(folds):
        raise UsageError(f"fold_index {fold_index} out of range (k={len(folds)})")
    test_idx = user_idx[folds[fold_index]]

    assignment = assign_levels(windows, test_idx)
    base_idx = np.flatnonzero(
        np.isin(
            assignment.levels,
            [int(SpecificityLevel.L0), int(SpecificityLevel.L1)],
        )
    )
    l3_idx = assignment.indices(SpecificityLevel.L3)
    l3_segments = sorted(int(s) for s in np.unique(windows.segment_ids[l3_idx]))
    if schedule == "per-segment":
        batches = [[s] for s in l3_segments]
    else:
        batches = [l3_segments] if l3_segments else []

    Xp = feat.project(windows.X, feat.resolve_subset(subset))
    y = windows.y

    session = CalibrationSession(user=target_user, fold=fold_index)
    train_idx = base_idx
    added: list[int] = []
    step = 0
    while True:
        model = _model_factory(
            config, kind, child_seed(seed, 7, fold_index, step), threads
        )
        scaler = fit_standardizer(Xp[train_idx])
        X_train = apply_standardizer(scaler, Xp[train_idx])
        X_test = apply_standardizer(scaler, Xp[test_idx])
        t0 = time.perf_counter()
        model.fit(X_train, y[train_idx])
        train_time = time.perf_counter() - t0
        preds = model.predict(X_test)
        metrics = classification_metrics(confusion_matrix(y[test_idx], preds))
        metrics.train_time_s = train_time
        session.steps.append(
            CalibrationStep(
                step=step,
                added_segments=list(added),
                n_train=len(train_idx),
                train_time_s=train_time,
                metrics=metrics,
                predictions=preds,
            )
        )
        if step >= len(batches):
            break
        added = batches[step]
        seg_windows = l3_idx[np.isin(windows.segment_ids[l3_idx], added)]
        train_idx = np.sort(np.concatenate([train_idx, seg_windows]))
        step += 1
    return session


def final_step_matches_personalized(
    dataset: Dataset,
    target_user: str,
    config: PipelineConfig,
    fold_index: int = 0,
) -> tuple[np.ndarray, np.ndarray]:
    """Predictions of a full calibration run's last step and of the direct
    personalized protocol on the same fold; equal arrays by construction."""
    session = run_calibration(
        dataset, target_user, config, schedule="all-at-once", fold_index=fold_index
    )
    windows = windows_from_config(dataset, config)
    seed = config.get("cv.seed")
    plan = personalized_plan(
        windows, target_user, k=config.get("experiment.personal_k"), seed=seed
    )
    train_idx, test_idx = plan[fold_index]
    subset = config.get("features.subset")
    Xp = feat.project(windows.X, feat.resolve_subset(subset))
    model = _model_factory(
        config,
        config.get("model.kind"),
        child_seed(seed, 7, fold_index, len(session.steps) - 1),
    )
    scaler = fit_standardizer(Xp[train_idx])
    model.fit(apply_standardizer(scaler, Xp[train_idx]), windows.y[train_idx])
    direct = model.predict(apply_standardizer(scaler, Xp[test_idx]))
    return session.steps[-1].predictions, direct
