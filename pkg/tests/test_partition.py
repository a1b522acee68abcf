import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from csdetect.dataio import generate_synthetic, SynthSpec
from csdetect.errors import (
    ClassSmallerThanFoldsWarning,
    EmptyTrainingSet,
    InsufficientClasses,
)
from csdetect.partition import (
    LEVEL_COMBOS,
    SpecificityLevel,
    assign_levels,
    combo_name,
    compose_training_set,
    eligible_users,
    parse_combo,
    personalized_plan,
    stratified_kfold,
)
from csdetect.preprocess import WindowSet, prepare_windows

L0, L1, L2, L3 = SpecificityLevel


def make_windows(rows):
    """rows: (user, scenario, segment_id, window_index, label)"""
    n = len(rows)
    return WindowSet(
        X=np.random.default_rng(0).standard_normal((n, 40)),
        y=np.array([r[4] for r in rows], dtype=np.int8),
        users=np.array([r[0] for r in rows], dtype=object),
        scenarios=np.array([r[1] for r in rows], dtype=object),
        segment_ids=np.array([r[2] for r in rows], dtype=np.int64),
        window_index=np.array([r[3] for r in rows], dtype=np.int32),
    )


def brute_force_levels(windows, test_idx):
    """Direct re-evaluation of the level predicates, sample by sample."""
    test_idx = set(int(i) for i in test_idx)
    test_users = {str(windows.users[i]) for i in test_idx}
    user_scenarios = {}
    user_segments = {}
    for i in test_idx:
        u = str(windows.users[i])
        user_scenarios.setdefault(u, set()).add(str(windows.scenarios[i]))
        user_segments.setdefault(u, set()).add(int(windows.segment_ids[i]))
    out = np.empty(len(windows), dtype=np.int8)
    for i in range(len(windows)):
        if i in test_idx:
            out[i] = -1
            continue
        u = str(windows.users[i])
        if u not in test_users:
            out[i] = 0
        elif int(windows.segment_ids[i]) in user_segments[u]:
            out[i] = 3
        elif str(windows.scenarios[i]) in user_scenarios[u]:
            out[i] = 2
        else:
            out[i] = 1
    return out


# -- stratified folds ---------------------------------------------------------


def test_exact_divisibility_one_per_class():
    labels = np.repeat(np.arange(4), 10)
    plan = stratified_kfold(labels, k=10, seed=1)
    for fold in plan.folds:
        assert len(fold) == 4
        assert sorted(labels[fold]) == [0, 1, 2, 3]


def test_round_robin_remainders():
    labels = np.zeros(23, dtype=int)
    plan = stratified_kfold(labels, k=10, seed=2)
    counts = sorted(len(fold) for fold in plan.folds)
    assert counts.count(2) == 7 and counts.count(3) == 3


def test_small_class_warns():
    labels = np.concatenate([np.zeros(30, dtype=int), np.ones(4, dtype=int)])
    with pytest.warns(ClassSmallerThanFoldsWarning):
        stratified_kfold(labels, k=10, seed=2)


def test_fold_determinism():
    labels = np.random.default_rng(0).integers(0, 4, 200)
    a = stratified_kfold(labels, k=10, seed=5)
    b = stratified_kfold(labels, k=10, seed=5)
    assert all(np.array_equal(x, y) for x, y in zip(a.folds, b.folds))
    c = stratified_kfold(labels, k=10, seed=6)
    assert any(not np.array_equal(x, y) for x, y in zip(a.folds, c.folds))


@given(
    counts=st.lists(st.integers(1, 60), min_size=1, max_size=4),
    k=st.sampled_from([2, 5, 10]),
    seed=st.integers(0, 2**32 - 1),
)
@settings(max_examples=80, deadline=None)
def test_stratification_property(counts, k, seed):
    labels = np.concatenate([np.full(c, i) for i, c in enumerate(counts)])
    labels = np.random.default_rng(seed).permutation(labels)
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ClassSmallerThanFoldsWarning)
        plan = stratified_kfold(labels, k=k, seed=seed)
    all_idx = np.concatenate(plan.folds)
    assert len(all_idx) == len(labels)
    assert len(np.unique(all_idx)) == len(labels)
    for cls in np.unique(labels):
        per_fold = [int((labels[fold] == cls).sum()) for fold in plan.folds]
        assert max(per_fold) - min(per_fold) <= 1


# -- level assignment ---------------------------------------------------------


def worked_example_windows():
    rows = [
        # u1 test samples in scenarioA, segment 3 (windows 0/1)
        ("u1", "scenA", 3, 0, 0),
        ("u1", "scenA", 3, 1, 0),
        # u1 candidates
        ("u1", "scenB", 9, 0, 1),   # different scenario -> L1
        ("u1", "scenA", 7, 0, 1),   # same scenario, other segment -> L2
        # u2 (not in test fold) -> L0
        ("u2", "scenA", 12, 0, 2),
        ("u2", "scenB", 13, 0, 3),
    ]
    return make_windows(rows)


def test_worked_levels():
    w = worked_example_windows()
    a = assign_levels(w, [0])  # test fold holds (u1, scenA, seg3, window 0)
    assert a.levels[1] == 3  # same segment, sibling window
    assert a.levels[2] == 1
    assert a.levels[3] == 2
    assert a.levels[4] == 0 and a.levels[5] == 0
    assert a.levels[0] == -1


def test_levels_match_brute_force_on_synthetic():
    spec = SynthSpec(n_users=5, n_scenarios=3, reports_per_session=3,
                     class_separation=1.0, seed=9)
    ws = prepare_windows(generate_synthetic(spec))
    plan = stratified_kfold(ws.y, k=5, seed=4)
    for fold in plan.folds:
        a = assign_levels(ws, fold)
        assert np.array_equal(a.levels, brute_force_levels(ws, fold))


def test_levels_partition_candidates():
    w = worked_example_windows()
    a = assign_levels(w, [0])
    cand = np.flatnonzero(a.levels >= 0)
    test_user_cand = [i for i in cand if w.users[i] == "u1"]
    l123 = np.concatenate([a.indices(L1), a.indices(L2), a.indices(L3)])
    assert sorted(l123.tolist()) == sorted(test_user_cand)


# -- composition --------------------------------------------------------------


def test_compose_union_of_disjoint_levels():
    w = worked_example_windows()
    a = assign_levels(w, [0])
    combo = (L1, L3)
    idx = compose_training_set(a, combo)
    assert len(idx) == len(a.indices(L1)) + len(a.indices(L3))


def test_compose_l123_covers_test_user_candidates():
    w = worked_example_windows()
    a = assign_levels(w, [0])
    idx = compose_training_set(a, (L1, L2, L3))
    assert sorted(idx.tolist()) == [1, 2, 3]


def test_compose_disjoint_from_test_fold():
    spec = SynthSpec(n_users=5, n_scenarios=3, reports_per_session=3, seed=9)
    ws = prepare_windows(generate_synthetic(spec))
    plan = stratified_kfold(ws.y, k=5, seed=4)
    for fold in plan.folds:
        a = assign_levels(ws, fold)
        for combo in LEVEL_COMBOS:
            try:
                idx = compose_training_set(a, combo)
            except EmptyTrainingSet:
                continue
            assert set(idx.tolist()) & set(fold.tolist()) == set()


def test_compose_empty_raises():
    w = worked_example_windows()
    a = assign_levels(w, [0, 1, 2, 3])  # all of u1's samples in the fold
    with pytest.raises(EmptyTrainingSet):
        compose_training_set(a, (L1,))


def test_parse_combo_roundtrip():
    assert parse_combo("L1+L2+L3") == (L1, L2, L3)
    assert parse_combo("l0 + l3") == (L0, L3)
    assert combo_name((L1, L3)) == "L1+L3"


# -- personalized plan --------------------------------------------------------


def test_personalized_two_user_l0():
    rows = []
    sid = 0
    for user in ("u1", "u2"):
        for scen in ("sA", "sB"):
            for seg in range(3):
                for widx in range(2):
                    rows.append((user, scen, sid, widx, (sid + widx) % 4))
                sid += 1
    w = make_windows(rows)
    u1_idx = set(np.flatnonzero(w.users == "u1").tolist())
    plan = personalized_plan(w, "u2", k=3, seed=0)
    for train_idx, test_idx in plan:
        assert u1_idx <= set(train_idx.tolist())
        assert all(w.users[i] == "u2" for i in test_idx)


def test_personalized_excludes_l2():
    spec = SynthSpec(n_users=4, n_scenarios=3, reports_per_session=3, seed=2)
    ws = prepare_windows(generate_synthetic(spec))
    user = eligible_users(ws)[0]
    plan = personalized_plan(ws, user, k=4, seed=1)
    for train_idx, test_idx in plan:
        a = assign_levels(ws, test_idx)
        l2 = set(a.indices(L2).tolist())
        assert set(train_idx.tolist()) & l2 == set()


def test_personalized_folds_cover_each_sample_once():
    spec = SynthSpec(n_users=3, n_scenarios=3, reports_per_session=3, seed=2)
    ws = prepare_windows(generate_synthetic(spec))
    user = eligible_users(ws)[0]
    plan = personalized_plan(ws, user, k=5, seed=1)
    covered = np.concatenate([t for _, t in plan])
    expected = np.flatnonzero(ws.users.astype(str) == user)
    assert sorted(covered.tolist()) == sorted(expected.tolist())


def test_personalized_requires_two_classes():
    rows = [("u1", "sA", 0, 0, 1), ("u1", "sA", 0, 1, 1),
            ("u2", "sA", 1, 0, 2), ("u2", "sA", 1, 1, 3)]
    w = make_windows(rows)
    with pytest.raises(InsufficientClasses):
        personalized_plan(w, "u1", k=2, seed=0)
    with pytest.raises(InsufficientClasses):
        personalized_plan(w, "nobody", k=2, seed=0)


def test_l3_train_and_test_share_segment_not_samples():
    spec = SynthSpec(n_users=4, n_scenarios=3, reports_per_session=3, seed=6)
    ws = prepare_windows(generate_synthetic(spec))
    plan = stratified_kfold(ws.y, k=5, seed=3)
    fold = plan.folds[0]
    a = assign_levels(ws, fold)
    l3 = a.indices(L3)
    assert len(l3) > 0
    assert set(l3.tolist()) & set(fold.tolist()) == set()
    test_segments = set(ws.segment_ids[fold].tolist())
    assert all(int(ws.segment_ids[i]) in test_segments for i in l3)
