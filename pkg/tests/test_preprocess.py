import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from csdetect import features as feat
from csdetect.dataio import FmsReport, FrameStream, SessionKey
from csdetect.errors import (
    AllNonFinite,
    DimensionMismatch,
    ScoreOutOfRange,
    TooFewSamples,
)
from csdetect.preprocess import (
    BinningThresholds,
    CleaningPolicy,
    CsClass,
    Segment,
    apply_standardizer,
    bin_fms,
    clean_frames,
    extract_segments,
    fit_standardizer,
    prepare_windows,
    windowize,
)

KEY = SessionKey("u1", "s1")


def stream_at_20hz(n, values=None, t0=0.0):
    times = np.arange(n) / 20.0 + t0
    if values is None:
        values = np.zeros((n, 40))
    return FrameStream(times=times, values=np.asarray(values, dtype=np.float64))


# -- binning -----------------------------------------------------------------


def test_bin_extremes_and_default_medium():
    assert bin_fms(0) == CsClass.NONE
    assert bin_fms(10) == CsClass.HIGH
    assert bin_fms(5) == CsClass.MEDIUM


def test_bin_rejects_out_of_range():
    with pytest.raises(ScoreOutOfRange):
        bin_fms(11)
    with pytest.raises(ScoreOutOfRange):
        bin_fms(-1)


@given(
    a=st.integers(0, 10), b=st.integers(0, 10),
    none_max=st.integers(0, 7), span1=st.integers(1, 4), span2=st.integers(1, 4),
)
def test_bin_monotone(a, b, none_max, span1, span2):
    low_max = none_max + span1
    medium_max = min(low_max + span2, 9)
    if not none_max < low_max < medium_max:
        return
    th = BinningThresholds(none_max, low_max, medium_max)
    lo, hi = min(a, b), max(a, b)
    assert bin_fms(lo, th) <= bin_fms(hi, th)


# -- segments ----------------------------------------------------------------


def test_segment_220_frames():
    stream = stream_at_20hz(700)  # covers [0, 35)
    segments, skipped = extract_segments(stream, [FmsReport(KEY, 30.0, 2)])
    assert skipped == []
    seg = segments[0]
    assert len(seg.times) == 220
    assert seg.times[0] == 20.0
    assert seg.times[-1] < 31.0
    assert seg.label == CsClass.LOW


def test_segment_insufficient_history_skipped():
    stream = stream_at_20hz(700)
    segments, skipped = extract_segments(stream, [FmsReport(KEY, 5.0, 2)])
    assert segments == []
    assert len(skipped) == 1 and "skipped" in skipped[0]


def test_segments_disjoint_for_spaced_reports():
    stream = stream_at_20hz(1400)  # covers [0, 70)
    segments, _ = extract_segments(
        stream, [FmsReport(KEY, 30.0, 0), FmsReport(KEY, 60.0, 9)]
    )
    assert len(segments) == 2
    a, b = segments
    assert set(a.times) & set(b.times) == set()
    assert a.id != b.id


# -- cleaning ----------------------------------------------------------------


def test_clean_constant_stream_unchanged():
    values = np.full((100, 40), 3.25)
    out = clean_frames(FrameStream(np.arange(100) / 20, values.copy()))
    assert np.array_equal(out.values, values)
    assert len(out) == 100


def test_clean_imputes_linear_midpoint():
    values = np.zeros((3, 40))
    values[0, 7], values[1, 7], values[2, 7] = 1.0, np.nan, 3.0
    policy = CleaningPolicy(smooth_window=1)
    out = clean_frames(FrameStream(np.arange(3) / 20, values), policy)
    assert out.values[1, 7] == pytest.approx(2.0)


def test_clean_clips_spike_to_robust_bound():
    rng = np.random.default_rng(0)
    col = rng.standard_normal(500)
    col[250] = 100.0
    values = np.zeros((500, 40))
    values[:, 3] = col
    policy = CleaningPolicy(clip_sigma=4.0, smooth_window=1)
    out = clean_frames(FrameStream(np.arange(500) / 20, values), policy)
    med = np.median(col)
    expected_bound = med + 4.0 * 1.4826 * np.median(np.abs(col - med))
    assert out.values[250, 3] == pytest.approx(expected_bound, rel=1e-12)


def test_clean_all_nonfinite_column():
    values = np.zeros((10, 40))
    values[:, 0] = np.nan
    with pytest.raises(AllNonFinite, match="conv_dist"):
        clean_frames(FrameStream(np.arange(10) / 20, values))


def test_clean_preserves_frame_count():
    rng = np.random.default_rng(1)
    values = rng.standard_normal((57, 40))
    out = clean_frames(FrameStream(np.arange(57) / 20, values))
    assert out.values.shape == (57, 40)


@given(st.lists(st.floats(-50, 50), min_size=3, max_size=80))
@settings(max_examples=60, deadline=None)
def test_impute_and_clip_idempotent(raw):
    # smoothing excluded: a width>1 moving median is not a one-pass fixed
    # point on arbitrary streams, so idempotence holds for impute+clip only
    values = np.tile(np.asarray(raw)[:, None], (1, 40))
    policy = CleaningPolicy(smooth_window=1)
    stream = FrameStream(np.arange(len(raw)) / 20, values)
    once = clean_frames(stream, policy)
    twice = clean_frames(once, policy)
    assert np.array_equal(once.values, twice.values)


def test_full_clean_idempotent_on_smoothing_fixed_points():
    values = np.tile(np.linspace(0.0, 1.0, 50)[:, None], (1, 40))
    stream = FrameStream(np.arange(50) / 20, values)
    once = clean_frames(stream)
    twice = clean_frames(once)
    assert np.allclose(once.values, twice.values)


# -- standardizer ------------------------------------------------------------


def test_standardizer_two_points():
    s = fit_standardizer(np.array([[-1.0], [1.0]]))
    assert s.mean[0] == pytest.approx(0.0)
    assert s.sd[0] == pytest.approx(1.0)


def test_standardizer_constant_feature_guard():
    X = np.array([[2.0], [2.0], [2.0]])
    s = fit_standardizer(X)
    assert s.sd[0] == 1.0
    assert np.allclose(apply_standardizer(s, X), 0.0)


def test_standardizer_refit_identical():
    rng = np.random.default_rng(2)
    X = rng.standard_normal((30, 5))
    a, b = fit_standardizer(X), fit_standardizer(X)
    assert np.array_equal(a.mean, b.mean) and np.array_equal(a.sd, b.sd)


def test_standardizer_too_few():
    with pytest.raises(TooFewSamples):
        fit_standardizer(np.zeros((1, 3)))


def test_apply_standardizer_contracts():
    rng = np.random.default_rng(3)
    X = rng.standard_normal((100, 4))
    s = fit_standardizer(X)
    Z = apply_standardizer(s, X)
    assert np.abs(Z.mean(axis=0)).max() < 1e-9
    ident = fit_standardizer(np.array([[0.0, 0.0], [0.0, 0.0]]))
    ident.mean[:] = 0.0
    Q = rng.standard_normal((5, 2))
    assert np.array_equal(apply_standardizer(ident, Q), Q)
    assert apply_standardizer(s, s.mean[None, :])[0] == pytest.approx(0.0)
    with pytest.raises(DimensionMismatch):
        apply_standardizer(s, np.zeros((2, 7)))


def test_no_leakage_params_ignore_test_windows():
    rng = np.random.default_rng(4)
    train = rng.standard_normal((50, 6))
    s1 = fit_standardizer(train)
    # perturbing any would-be test data cannot touch the fitted parameters
    s2 = fit_standardizer(train)
    assert np.array_equal(s1.mean, s2.mean) and np.array_equal(s1.sd, s2.sd)


# -- windowing ---------------------------------------------------------------


def make_segment(n_frames, label=CsClass.LOW, fill=None):
    times = np.arange(n_frames) / 20.0 + 20.0
    values = np.zeros((n_frames, 40)) if fill is None else fill
    return Segment(0, KEY, 30.0, times, values, label)


def test_windowize_220_frames_three_windows():
    samples = windowize(make_segment(220))
    assert len(samples) == 3
    assert [s.window_index for s in samples] == [0, 1, 2]
    assert all(s.label == CsClass.LOW for s in samples)


def test_windowize_exact_60():
    assert len(windowize(make_segment(60))) == 1


def test_windowize_constant_vector_mean():
    v = np.arange(40.0)
    seg = make_segment(60, fill=np.tile(v, (60, 1)))
    sample = windowize(seg, feat.resolve_subset("head7"))[0]
    assert np.array_equal(sample.features, v[list(feat.resolve_subset("head7").indices)])


def test_windowize_short_segment_warns():
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        samples = windowize(make_segment(59))
    assert samples == []
    assert len(caught) == 1


def test_windowize_partition_property():
    rng = np.random.default_rng(5)
    values = rng.standard_normal((220, 40))
    seg = make_segment(220, fill=values)
    samples = windowize(seg)
    for w, s in enumerate(samples):
        block = values[w * 60:(w + 1) * 60]
        assert np.allclose(s.features, block.mean(axis=0))


def test_prepare_windows_counts(small_dataset):
    ws = prepare_windows(small_dataset)
    # 6 users x 3 scenarios x 3 reports x 3 windows per 220-frame segment
    assert len(ws) == 6 * 3 * 3 * 3
    assert ws.X.shape == (len(ws), 40)
    assert set(np.unique(ws.window_index)) == {0, 1, 2}
    seg_counts = np.bincount(ws.segment_ids)
    assert (seg_counts[seg_counts > 0] == 3).all()
    # labels equal parent segment labels by construction: windows of one
    # segment share one label
    for seg in np.unique(ws.segment_ids):
        assert len(set(ws.y[ws.segment_ids == seg])) == 1
