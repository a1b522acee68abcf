"""Cross-validation folds and user-specificity level assignment.

For a fixed test fold, every remaining (candidate) sample is tagged by how
specific it is to the test fold's users: L1 same user but a different
scenario, L2 same user and scenario but a different segment, L3 the same
segment, and L0 for samples of users absent from the test fold. Training
sets are unions of levels; the personalized protocol folds within one
target user and trains on L0 plus the target's L1 and L3 data.
"""

from __future__ import annotations

import enum
import warnings as _warnings
from dataclasses import dataclass

import numpy as np

from .errors import (
    ClassSmallerThanFoldsWarning,
    DegenerateInput,
    EmptyTrainingSet,
    InsufficientClasses,
)
from .preprocess import WindowSet


class SpecificityLevel(enum.IntEnum):
    L0 = 0  # users absent from the test fold
    L1 = 1  # test-fold user, different scenario
    L2 = 2  # test-fold user, same scenario, different segment
    L3 = 3  # test-fold user, same scenario, same segment


Combo = tuple[SpecificityLevel, ...]

# The seven cross-user training-set compositions, in evaluation order.
LEVEL_COMBOS: tuple[Combo, ...] = (
    (SpecificityLevel.L1,),
    (SpecificityLevel.L2,),
    (SpecificityLevel.L3,),
    (SpecificityLevel.L1, SpecificityLevel.L2),
    (SpecificityLevel.L1, SpecificityLevel.L3),
    (SpecificityLevel.L2, SpecificityLevel.L3),
    (SpecificityLevel.L1, SpecificityLevel.L2, SpecificityLevel.L3),
)

PERSONAL_LEVELS: Combo = (
    SpecificityLevel.L0,
    SpecificityLevel.L1,
    SpecificityLevel.L3,
)


def combo_name(combo: Combo) -> str:
    return "+".join(level.name for level in combo)


def parse_combo(text: str) -> Combo:
    parts = [p.strip() for p in text.replace(",", "+").split("+") if p.strip()]
    if not parts:
        raise DegenerateInput("empty level combination")
    try:
        return tuple(SpecificityLevel[p.upper()] for p in parts)
    except KeyError as exc:
        raise DegenerateInput(f"unknown specificity level {exc.args[0]!r}") from exc


@dataclass
class FoldPlan:
    k: int
    folds: list[np.ndarray]  # disjoint index arrays covering all samples
    seed: int


def stratified_kfold(labels, k: int = 10, seed: int = 0) -> FoldPlan:
    """Class-stratified folds: per-class shuffle, then round-robin dealing.

    Within each class the per-fold counts differ by at most one. A class
    with fewer samples than k is allowed but warned about. Deterministic in
    (labels, k, seed).
    """
    labels = np.asarray(labels)
    n = len(labels)
    if k < 2:
        raise DegenerateInput("fold count must be >= 2")
    if n == 0:
        raise DegenerateInput("no samples to fold")
    rng = np.random.default_rng(seed)
    buckets: list[list[int]] = [[] for _ in range(k)]
    for cls in np.unique(labels):
        idx = np.flatnonzero(labels == cls)
        if len(idx) < k:
            _warnings.warn(
                f"class {cls} has {len(idx)} samples (< {k} folds)",
                ClassSmallerThanFoldsWarning,
                stacklevel=2,
            )
        perm = rng.permutation(idx)
        offset = int(rng.integers(k))
        for j, sample in enumerate(perm):
            buckets[(j + offset) % k].append(int(sample))
    folds = [np.array(sorted(b), dtype=np.int64) for b in buckets]
    return FoldPlan(k=k, folds=folds, seed=seed)


@dataclass
class LevelAssignment:
    """Per-sample specificity level relative to one test fold.

    ``levels[i]`` is the level ordinal for candidate samples and -1 for
    samples inside the test fold itself.
    """

    levels: np.ndarray       # (n,) int8
    test_idx: np.ndarray     # the fold this assignment is relative to

    def indices(self, level: SpecificityLevel) -> np.ndarray:
        return np.flatnonzero(self.levels == int(level))


def assign_levels(windows: WindowSet, test_idx) -> LevelAssignment:
    """Tag every candidate sample with its level relative to *test_idx*."""
    test_idx = np.asarray(test_idx, dtype=np.int64)
    n = len(windows)
    test_mask = np.zeros(n, dtype=bool)
    test_mask[test_idx] = True

    _, user_codes = np.unique(windows.users.astype(str), return_inverse=True)
    _, scen_codes = np.unique(windows.scenarios.astype(str), return_inverse=True)
    pair_codes = user_codes * (scen_codes.max() + 1) + scen_codes

    test_users = np.unique(user_codes[test_mask])
    test_pairs = np.unique(pair_codes[test_mask])
    test_segments = np.unique(windows.segment_ids[test_mask])

    of_test_user = np.isin(user_codes, test_users)
    same_scenario = np.isin(pair_codes, test_pairs)
    same_segment = np.isin(windows.segment_ids, test_segments)

    levels = np.full(n, int(SpecificityLevel.L0), dtype=np.int8)
    levels[of_test_user & ~same_scenario] = int(SpecificityLevel.L1)
    levels[of_test_user & same_scenario & ~same_segment] = int(SpecificityLevel.L2)
    levels[of_test_user & same_segment] = int(SpecificityLevel.L3)
    levels[test_mask] = -1
    return LevelAssignment(levels=levels, test_idx=test_idx)


def compose_training_set(assignment: LevelAssignment, combo: Combo) -> np.ndarray:
    """Union of the requested levels' index sets, sorted ascending."""
    if not combo:
        raise EmptyTrainingSet("no levels requested")
    wanted = np.isin(assignment.levels, [int(level) for level in combo])
    idx = np.flatnonzero(wanted)
    if len(idx) == 0:
        raise EmptyTrainingSet(
            f"combination {combo_name(combo)} selects no samples"
        )
    return idx


def eligible_users(windows: WindowSet, min_classes: int = 2) -> list[str]:
    """Users with samples in at least *min_classes* distinct classes."""
    out = []
    for user in sorted(set(windows.users.astype(str))):
        mask = windows.users.astype(str) == user
        if len(np.unique(windows.y[mask])) >= min_classes:
            out.append(user)
    return out


def personalized_plan(
    windows: WindowSet,
    target_user: str,
    k: int = 10,
    seed: int = 0,
    levels: Combo = PERSONAL_LEVELS,
) -> list[tuple[np.ndarray, np.ndarray]]:
    """Stratified folds over one user's samples, trained on L0 + L1 + L3.

    Each of the target user's samples is held out exactly once. Per fold,
    the training set unions all other users' samples (L0) with the target
    user's candidate samples at the requested levels (L2 excluded by
    default). Requires the target user to span at least two classes.
    """
    user_idx = np.flatnonzero(windows.users.astype(str) == target_user)
    if len(user_idx) == 0:
        raise InsufficientClasses(target_user, 0)
    user_labels = windows.y[user_idx]
    n_classes = len(np.unique(user_labels))
    if n_classes < 2:
        raise InsufficientClasses(target_user, n_classes)

    plan = stratified_kfold(user_labels, k=k, seed=seed)
    out = []
    for local_fold in plan.folds:
        test_idx = user_idx[local_fold]
        if len(test_idx) == 0:
            continue
        assignment = assign_levels(windows, test_idx)
        train_idx = compose_training_set(assignment, levels)
        out.append((train_idx, test_idx))
    return out
