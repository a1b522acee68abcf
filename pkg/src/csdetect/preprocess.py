"""From validated sessions to labeled 3-second window samples.

The ground-truth unit is an 11 s segment of frames anchored to one FMS
report (10 s history, 1 s future). Segments are cleaned per session, cut
into non-overlapping 60-frame windows, and each window is reduced to its
per-feature mean. Standardization parameters are fit on training windows
only and applied to both sides of a fold.
"""

from __future__ import annotations

import enum
import warnings as _warnings
from dataclasses import dataclass, field

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from . import features as feat
from .dataio import Dataset, FmsReport, FrameStream, SessionKey
from .errors import (
    AllNonFinite,
    DimensionMismatch,
    ScoreOutOfRange,
    TooFewSamples,
)

_TIME_EPS = 1e-9

HISTORY_S = 10.0
FUTURE_S = 1.0
WINDOW_FRAMES = 60


class CsClass(enum.IntEnum):
    NONE = 0
    LOW = 1
    MEDIUM = 2
    HIGH = 3

    @property
    def label(self) -> str:
        return self.name.capitalize()


@dataclass(frozen=True)
class BinningThresholds:
    """Upper FMS bound per class; scores above medium_max are High."""

    none_max: int = 0
    low_max: int = 3
    medium_max: int = 6

    def __post_init__(self):
        if not 0 <= self.none_max < self.low_max < self.medium_max < 10:
            raise ValueError("thresholds must satisfy none < low < medium < 10")


def bin_fms(score: int, thresholds: BinningThresholds = BinningThresholds()) -> CsClass:
    if not 0 <= score <= 10:
        raise ScoreOutOfRange(score)
    if score <= thresholds.none_max:
        return CsClass.NONE
    if score <= thresholds.low_max:
        return CsClass.LOW
    if score <= thresholds.medium_max:
        return CsClass.MEDIUM
    return CsClass.HIGH


@dataclass
class Segment:
    """Frames in [report_t - 10, report_t + 1) with the report's class label."""

    id: int
    session: SessionKey
    report_t: float
    times: np.ndarray
    values: np.ndarray  # (n_frames, 40)
    label: CsClass


@dataclass(frozen=True)
class WindowSample:
    segment_id: int
    session: SessionKey
    window_index: int
    features: np.ndarray
    label: CsClass


@dataclass(frozen=True)
class CleaningPolicy:
    clip_sigma: float = 4.0
    smooth_window: int = 5
    impute: bool = True

    def __post_init__(self):
        if self.clip_sigma <= 0:
            raise ValueError("clip_sigma must be positive")
        if self.smooth_window < 1 or self.smooth_window % 2 == 0:
            raise ValueError("smooth_window must be odd and >= 1")


# ---------------------------------------------------------------------------
# Cleaning: impute -> clip -> smooth, per feature column


def _interpolate_column(col: np.ndarray, name: str) -> np.ndarray:
    finite = np.isfinite(col)
    if finite.all():
        return col
    if not finite.any():
        raise AllNonFinite(name)
    idx = np.arange(len(col), dtype=np.float64)
    out = col.copy()
    # np.interp holds edge values beyond the first/last finite sample
    out[~finite] = np.interp(idx[~finite], idx[finite], col[finite])
    return out


def _clip_column(col: np.ndarray, clip_sigma: float) -> np.ndarray:
    med = np.median(col)
    robust_sd = 1.4826 * np.median(np.abs(col - med))
    lo, hi = med - clip_sigma * robust_sd, med + clip_sigma * robust_sd
    return np.clip(col, lo, hi)


def _smooth_column(col: np.ndarray, width: int) -> np.ndarray:
    if width <= 1 or len(col) == 0:
        return col
    k = width // 2
    padded = np.pad(col, (k, k), mode="edge")
    return np.median(sliding_window_view(padded, width), axis=1)


def clean_frames(stream: FrameStream, policy: CleaningPolicy = CleaningPolicy()) -> FrameStream:
    """Return a cleaned copy of a session stream; frame count is unchanged."""
    names = feat.registry().names
    values = np.array(stream.values, dtype=np.float64)
    for j in range(values.shape[1]):
        col = values[:, j]
        if policy.impute:
            col = _interpolate_column(col, names[j])
        col = _clip_column(col, policy.clip_sigma)
        col = _smooth_column(col, policy.smooth_window)
        values[:, j] = col
    return FrameStream(times=np.array(stream.times), values=values)


# ---------------------------------------------------------------------------
# Segment extraction and windowing


def extract_segments(
    stream: FrameStream,
    reports: list[FmsReport],
    thresholds: BinningThresholds = BinningThresholds(),
    id_start: int = 0,
) -> tuple[list[Segment], list[str]]:
    """One segment per report whose interval is fully covered by frames.

    Coverage requires the stream to start at or before ``t - 10`` and to
    extend to ``t + 1`` within one nominal frame spacing. Reports without
    coverage are skipped and recorded in the returned warning list.
    """
    segments: list[Segment] = []
    skipped: list[str] = []
    if len(stream) == 0:
        return segments, [f"{r.session}: no frames, report at t={r.t:g} skipped" for r in reports]
    first_t, last_t = float(stream.times[0]), float(stream.times[-1])
    spacing = stream.mean_spacing
    next_id = id_start
    for rp in reports:
        lo_t, hi_t = rp.t - HISTORY_S, rp.t + FUTURE_S
        covered = (first_t <= lo_t + _TIME_EPS) and (last_t + spacing >= hi_t - _TIME_EPS)
        if not covered:
            skipped.append(
                f"{rp.session}: report at t={rp.t:g} lacks frame coverage "
                f"for [{lo_t:g}, {hi_t:g}), skipped"
            )
            continue
        lo = int(np.searchsorted(stream.times, lo_t - _TIME_EPS, side="left"))
        hi = int(np.searchsorted(stream.times, hi_t - _TIME_EPS, side="left"))
        segments.append(
            Segment(
                id=next_id,
                session=rp.session,
                report_t=rp.t,
                times=stream.times[lo:hi],
                values=stream.values[lo:hi],
                label=bin_fms(rp.score, thresholds),
            )
        )
        next_id += 1
    return segments, skipped


def windowize(
    segment: Segment,
    active: feat.FeatureSubset | None = None,
    window_frames: int = WINDOW_FRAMES,
) -> list[WindowSample]:
    """Cut a segment into non-overlapping windows of per-feature means.

    Yields ``floor(n_frames / window_frames)`` windows from the segment
    start; trailing frames are discarded. Feature vectors are restricted to
    the active subset (default: all 40), in registry order.
    """
    n = len(segment.times)
    n_windows = n // window_frames
    if n_windows == 0:
        _warnings.warn(
            f"segment {segment.id} has {n} frames (< {window_frames}); no windows",
            UserWarning,
            stacklevel=2,
        )
        return []
    cols = list(active.indices) if active is not None else slice(None)
    out = []
    for w in range(n_windows):
        block = segment.values[w * window_frames:(w + 1) * window_frames, cols]
        out.append(
            WindowSample(
                segment_id=segment.id,
                session=segment.session,
                window_index=w,
                features=block.mean(axis=0),
                label=segment.label,
            )
        )
    return out


# ---------------------------------------------------------------------------
# Standardization (fold-scoped)


@dataclass
class Standardizer:
    mean: np.ndarray
    sd: np.ndarray
    epsilon: float = 1e-8


def fit_standardizer(X: np.ndarray, epsilon: float = 1e-8) -> Standardizer:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 2:
        raise TooFewSamples("need at least 2 training windows to standardize")
    mean = X.mean(axis=0)
    sd = X.std(axis=0)
    sd = np.where(sd < epsilon, 1.0, sd)
    return Standardizer(mean=mean, sd=sd, epsilon=epsilon)


def apply_standardizer(s: Standardizer, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.shape[-1] != s.mean.shape[0]:
        raise DimensionMismatch(
            f"standardizer fitted for {s.mean.shape[0]} features, got {X.shape[-1]}"
        )
    return (X - s.mean) / s.sd


# ---------------------------------------------------------------------------
# Dataset-level assembly


@dataclass
class WindowSet:
    """Columnar table of window samples; the learners' input."""

    X: np.ndarray             # (n, n_features) float64
    y: np.ndarray             # (n,) int8 class ordinals
    users: np.ndarray         # (n,) str
    scenarios: np.ndarray     # (n,) str
    segment_ids: np.ndarray   # (n,) int64
    window_index: np.ndarray  # (n,) int32
    warnings: list[str] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.y)

    def take(self, idx) -> "WindowSet":
        idx = np.asarray(idx)
        return WindowSet(
            X=self.X[idx],
            y=self.y[idx],
            users=self.users[idx],
            scenarios=self.scenarios[idx],
            segment_ids=self.segment_ids[idx],
            window_index=self.window_index[idx],
        )


def prepare_windows(
    dataset: Dataset,
    thresholds: BinningThresholds = BinningThresholds(),
    policy: CleaningPolicy = CleaningPolicy(),
    window_frames: int = WINDOW_FRAMES,
) -> WindowSet:
    """Clean, segment, and windowize every session of a dataset.

    Windows keep all 40 features; experiments project to a subset later.
    Skipped reports and short segments are accumulated as warnings.
    """
    rows, labels, users, scenarios, seg_ids, w_idx = [], [], [], [], [], []
    all_warnings: list[str] = []
    next_seg_id = 0
    for key in dataset.sessions():
        stream = clean_frames(dataset.frames[key], policy)
        segments, skipped = extract_segments(
            stream, dataset.reports.get(key, []), thresholds, id_start=next_seg_id
        )
        all_warnings.extend(skipped)
        if segments:
            next_seg_id = segments[-1].id + 1
        for seg in segments:
            with _warnings.catch_warnings(record=True) as caught:
                _warnings.simplefilter("always")
                samples = windowize(seg, None, window_frames)
            all_warnings.extend(str(c.message) for c in caught)
            for s in samples:
                rows.append(s.features)
                labels.append(int(s.label))
                users.append(key.user_id)
                scenarios.append(key.scenario_id)
                seg_ids.append(s.segment_id)
                w_idx.append(s.window_index)
    n_feat = feat.N_FEATURES
    return WindowSet(
        X=np.array(rows, dtype=np.float64).reshape(len(rows), n_feat),
        y=np.array(labels, dtype=np.int8),
        users=np.array(users, dtype=object),
        scenarios=np.array(scenarios, dtype=object),
        segment_ids=np.array(seg_ids, dtype=np.int64),
        window_index=np.array(w_idx, dtype=np.int32),
        warnings=all_warnings,
    )
