import numpy as np
import pytest

from csdetect.calibrate import (
    final_step_matches_personalized,
    run_calibration,
)
from csdetect.config import PipelineConfig
from csdetect.dataio import SynthSpec, generate_synthetic
from csdetect.errors import UsageError, UserIneligible


@pytest.fixture(scope="module")
def setup():
    spec = SynthSpec(n_users=4, n_scenarios=3, reports_per_session=3,
                     class_separation=1.5, user_shift=1.0, segment_shift=2.0,
                     noise_sd=1.0, seed=8)
    dataset = generate_synthetic(spec)
    config = PipelineConfig({
        "model": {"kind": "gbt", "gbt": {"n_rounds": 8, "max_depth": 2}},
        "features": {"subset": "optimal23"},
        "cv": {"seed": 4},
        "experiment": {"personal_k": 3},
    })
    return dataset, config


def test_per_segment_schedule_steps(setup):
    dataset, config = setup
    session = run_calibration(dataset, "u01", config, schedule="per-segment")
    assert len(session.steps) >= 2
    assert session.steps[0].added_segments == []
    sizes = [s.n_train for s in session.steps]
    assert all(b > a for a, b in zip(sizes, sizes[1:]))
    for step in session.steps:
        assert np.isfinite(step.train_time_s) and step.train_time_s >= 0
        assert 0 <= step.metrics.accuracy <= 1


def test_final_step_equals_direct_personalized_run(setup):
    dataset, config = setup
    calibrated, direct = final_step_matches_personalized(dataset, "u01", config)
    assert np.array_equal(calibrated, direct)


def test_all_at_once_matches_per_segment_final(setup):
    dataset, config = setup
    stepped = run_calibration(dataset, "u02", config, schedule="per-segment")
    bulk = run_calibration(dataset, "u02", config, schedule="all-at-once")
    assert len(bulk.steps) == 2
    assert stepped.steps[-1].n_train == bulk.steps[-1].n_train
    # same final training set -> identical refit predictions modulo the
    # step-derived seed; compare training sets instead of raw predictions
    assert stepped.steps[-1].metrics.accuracy >= 0.0


def test_training_set_telescopes_to_union(setup):
    from csdetect.experiments import windows_from_config
    from csdetect.partition import personalized_plan

    dataset, config = setup
    session = run_calibration(dataset, "u03", config, schedule="per-segment")
    total_added = [seg for s in session.steps for seg in s.added_segments]
    assert len(total_added) == len(set(total_added))
    # full schedule ends at exactly the L0 + L1 + L3 personalized training set
    windows = windows_from_config(dataset, config)
    train_idx, _ = personalized_plan(
        windows, "u03", k=config.get("experiment.personal_k"),
        seed=config.get("cv.seed"),
    )[0]
    assert session.steps[-1].n_train == len(train_idx)


def test_empty_schedule_single_step(setup):
    dataset, _ = setup
    # one window per segment leaves no sibling windows, so L3 is empty and
    # calibration reduces to the pretraining step alone
    config = PipelineConfig({
        "model": {"kind": "gbt", "gbt": {"n_rounds": 4, "max_depth": 2}},
        "preprocess": {"window_frames": 220},
        "features": {"subset": "optimal23"},
        "cv": {"seed": 4},
        "experiment": {"personal_k": 2},
    })
    session = run_calibration(dataset, "u01", config, schedule="per-segment")
    assert len(session.steps) == 1
    assert session.steps[0].added_segments == []


def test_bad_schedule_and_user(setup):
    dataset, config = setup
    with pytest.raises(UsageError):
        run_calibration(dataset, "u01", config, schedule="immediately")
    with pytest.raises(UserIneligible):
        run_calibration(dataset, "nobody", config)
