"""Ingestion of tracking/report CSV files and desk-scale synthetic datasets.

A dataset maps sessions (user x scenario) to a time-ordered frame stream of
40-dimensional tracking vectors plus a list of in-session discomfort reports
on the 0-10 scale. Real recordings arrive as two CSV files; the synthetic
generator produces datasets with controllable class separation and per-user /
per-segment distribution shift for testing and benchmarks.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Iterable, TextIO

import numpy as np

from . import features as feat
from .errors import (
    DataError,
    InvalidSpec,
    MalformedRow,
    MissingColumn,
    NonMonotonicTime,
    ScoreOutOfRange,
)

META_COLUMNS = ("user_id", "scenario_id", "timestamp_s")
REPORT_COLUMNS = ("user_id", "scenario_id", "report_time_s", "fms")

# Slack for interval-coverage checks, absorbing float rounding of timestamps.
_TIME_EPS = 1e-9


@dataclass(frozen=True, order=True)
class SessionKey:
    user_id: str
    scenario_id: str

    def __post_init__(self):
        if not self.user_id or not self.scenario_id:
            raise DataError("session identifiers must be non-empty")

    def __str__(self) -> str:
        return f"{self.user_id}/{self.scenario_id}"


@dataclass(frozen=True)
class TrackingFrame:
    session: SessionKey
    t: float
    features: np.ndarray  # shape (40,)


@dataclass(frozen=True)
class FmsReport:
    session: SessionKey
    t: float
    score: int

    def __post_init__(self):
        if not 0 <= self.score <= 10:
            raise ScoreOutOfRange(self.score)


@dataclass
class FrameStream:
    """Time-ordered frames of one session, stored column-wise."""

    times: np.ndarray   # (n,)
    values: np.ndarray  # (n, 40)

    def __len__(self) -> int:
        return len(self.times)

    @property
    def duration(self) -> float:
        return float(self.times[-1] - self.times[0]) if len(self) else 0.0

    @property
    def mean_spacing(self) -> float:
        if len(self) < 2:
            return 0.0
        return self.duration / (len(self) - 1)


@dataclass
class Dataset:
    frames: dict[SessionKey, FrameStream]
    reports: dict[SessionKey, list[FmsReport]]
    provenance: str = ""

    def __post_init__(self):
        for key in self.reports:
            if key not in self.frames:
                raise DataError(f"reports for session {key} have no frame stream")

    def sessions(self) -> list[SessionKey]:
        return sorted(self.frames)

    def n_frames(self) -> int:
        return sum(len(s) for s in self.frames.values())

    def n_reports(self) -> int:
        return sum(len(r) for r in self.reports.values())

    def freeze(self) -> "Dataset":
        """Mark all arrays read-only; shared use after validation is safe."""
        for stream in self.frames.values():
            stream.times.flags.writeable = False
            stream.values.flags.writeable = False
        return self


# ---------------------------------------------------------------------------
# CSV parsing


def _open_text(stream) -> TextIO:
    if isinstance(stream, str):
        return open(stream, "r", encoding="utf-8", newline="")
    if isinstance(stream, bytes):
        return io.StringIO(stream.decode("utf-8"))
    if isinstance(stream, io.BufferedIOBase):
        return io.TextIOWrapper(stream, encoding="utf-8", newline="")
    return stream


def read_column_mapping(stream) -> dict[str, str]:
    """Read an adapter file of `source_name,canonical_name` lines."""
    fh = _open_text(stream)
    mapping = {}
    for lineno, line in enumerate(fh, start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != 2 or not all(parts):
            raise MalformedRow(lineno, f"expected 'source,canonical', got {line!r}")
        mapping[parts[0]] = parts[1]
    return mapping


def parse_tracking_csv(
    stream,
    schema: feat.FeatureRegistry | None = None,
    mapping: dict[str, str] | None = None,
) -> list[TrackingFrame]:
    """Parse a tracking CSV into per-session, time-sorted frames.

    The header must contain ``user_id, scenario_id, timestamp_s`` and the 40
    canonical feature columns (after applying the optional old-name ->
    canonical-name *mapping*). Extra columns are ignored. Timestamps must
    strictly increase within each session.
    """
    schema = schema or feat.registry()
    fh = _open_text(stream)
    reader = csv.reader(fh)
    try:
        header = next(reader)
    except StopIteration:
        raise MalformedRow(0, "empty file (no header)")
    header = [h.strip() for h in header]
    if mapping:
        header = [mapping.get(h, h) for h in header]
    positions = {}
    for name in META_COLUMNS + schema.names:
        if name not in header:
            raise MissingColumn(name)
        positions[name] = header.index(name)

    meta_pos = [positions[c] for c in META_COLUMNS]
    feat_pos = [positions[n] for n in schema.names]

    frames_by_session: dict[SessionKey, list[TrackingFrame]] = {}
    last_t: dict[SessionKey, float] = {}
    for rownum, row in enumerate(reader, start=2):
        if not row:
            continue
        try:
            user, scenario = row[meta_pos[0]].strip(), row[meta_pos[1]].strip()
            t = float(row[meta_pos[2]])
            vec = np.array([float(row[p]) for p in feat_pos], dtype=np.float64)
        except (ValueError, IndexError) as exc:
            raise MalformedRow(rownum, str(exc)) from exc
        key = SessionKey(user, scenario)
        if key in last_t and t <= last_t[key]:
            raise NonMonotonicTime(key, rownum)
        last_t[key] = t
        frames_by_session.setdefault(key, []).append(TrackingFrame(key, t, vec))

    out: list[TrackingFrame] = []
    for key in sorted(frames_by_session):
        out.extend(frames_by_session[key])
    return out


def parse_reports_csv(stream) -> list[FmsReport]:
    """Parse a reports CSV with header ``user_id,scenario_id,report_time_s,fms``."""
    fh = _open_text(stream)
    reader = csv.reader(fh)
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise MalformedRow(0, "empty file (no header)")
    positions = {}
    for name in REPORT_COLUMNS:
        if name not in header:
            raise MissingColumn(name)
        positions[name] = header.index(name)

    by_session: dict[SessionKey, list[FmsReport]] = {}
    for rownum, row in enumerate(reader, start=2):
        if not row:
            continue
        try:
            user = row[positions["user_id"]].strip()
            scenario = row[positions["scenario_id"]].strip()
            t = float(row[positions["report_time_s"]])
            score = int(row[positions["fms"]])
        except (ValueError, IndexError) as exc:
            raise MalformedRow(rownum, str(exc)) from exc
        if not 0 <= score <= 10:
            raise ScoreOutOfRange(score)
        key = SessionKey(user, scenario)
        by_session.setdefault(key, []).append(FmsReport(key, t, score))

    out: list[FmsReport] = []
    for key in sorted(by_session):
        bucket = sorted(by_session[key], key=lambda r: r.t)
        for a, b in zip(bucket, bucket[1:]):
            if a.t == b.t:  # two reports at one instant are irreconcilable
                raise NonMonotonicTime(key, f"duplicate report time t={a.t:g}")
        out.extend(bucket)
    return out


def build_dataset(
    frames: Iterable[TrackingFrame],
    reports: Iterable[FmsReport],
    provenance: str = "",
) -> Dataset:
    """Assemble parsed frames and reports into a frozen Dataset."""
    streams: dict[SessionKey, list[TrackingFrame]] = {}
    for fr in frames:
        streams.setdefault(fr.session, []).append(fr)
    frame_map = {
        key: FrameStream(
            times=np.array([f.t for f in lst], dtype=np.float64),
            values=np.stack([f.features for f in lst]).astype(np.float64),
        )
        for key, lst in streams.items()
    }
    report_map: dict[SessionKey, list[FmsReport]] = {}
    for rp in reports:
        report_map.setdefault(rp.session, []).append(rp)
    for key in report_map:
        report_map[key].sort(key=lambda r: r.t)
    return Dataset(frame_map, report_map, provenance).freeze()


# ---------------------------------------------------------------------------
# Validation


@dataclass
class SessionReportEntry:
    session: SessionKey
    n_frames: int
    duration_s: float
    mean_spacing_s: float
    n_reports: int
    warnings: list[str] = field(default_factory=list)


@dataclass
class ValidationReport:
    entries: list[SessionReportEntry]

    @property
    def warnings(self) -> list[str]:
        return [f"{e.session}: {w}" for e in self.entries for w in e.warnings]

    def summary(self) -> str:
        lines = []
        for e in self.entries:
            lines.append(
                f"{e.session}: {e.n_frames} frames over {e.duration_s:.2f} s "
                f"(mean spacing {e.mean_spacing_s * 1000:.1f} ms), "
                f"{e.n_reports} reports"
            )
            lines.extend(f"  warning: {w}" for w in e.warnings)
        if not lines:
            lines.append("empty dataset")
        return "\n".join(lines)


def validate_dataset(
    dataset: Dataset, history_s: float = 10.0, future_s: float = 1.0
) -> ValidationReport:
    """Report per-session stream statistics and reports lacking coverage.

    A report needs *history_s* seconds of frames before it and *future_s*
    after it (within one nominal frame spacing) to yield a usable segment.
    All findings are report entries; nothing raises.
    """
    entries = []
    for key in dataset.sessions():
        stream = dataset.frames[key]
        entry = SessionReportEntry(
            session=key,
            n_frames=len(stream),
            duration_s=stream.duration,
            mean_spacing_s=stream.mean_spacing,
            n_reports=len(dataset.reports.get(key, [])),
        )
        if len(stream):
            first_t, last_t = float(stream.times[0]), float(stream.times[-1])
            spacing = stream.mean_spacing
            for rp in dataset.reports.get(key, []):
                if rp.t - history_s < first_t - _TIME_EPS:
                    entry.warnings.append(
                        f"report at t={rp.t:g}: insufficient history "
                        f"(frames start at {first_t:g})"
                    )
                if rp.t + future_s > last_t + spacing + _TIME_EPS:
                    entry.warnings.append(
                        f"report at t={rp.t:g}: insufficient future context "
                        f"(frames end at {last_t:g})"
                    )
        entries.append(entry)
    return ValidationReport(entries)


# ---------------------------------------------------------------------------
# Synthetic generation


@dataclass
class SynthSpec:
    n_users: int
    n_scenarios: int
    reports_per_session: int
    report_interval: float = 30.0
    frame_rate: float = 20.0
    class_separation: float = 1.0
    user_shift: float = 0.0
    segment_shift: float = 0.0
    noise_sd: float = 1.0
    seed: int = 0
    class_weights: tuple[float, float, float, float] | None = None

    def validate(self) -> "SynthSpec":
        if min(self.n_users, self.n_scenarios, self.reports_per_session) < 1:
            raise InvalidSpec("counts must be >= 1")
        if self.report_interval <= 0 or self.frame_rate <= 0:
            raise InvalidSpec("report_interval and frame_rate must be positive")
        if self.noise_sd <= 0:
            raise InvalidSpec("noise_sd must be positive")
        if self.class_separation < 0 or self.user_shift < 0 or self.segment_shift < 0:
            raise InvalidSpec("separation/shift scales must be >= 0")
        if self.class_weights is not None:
            w = np.asarray(self.class_weights, dtype=float)
            if w.shape != (4,) or (w < 0).any() or w.sum() <= 0:
                raise InvalidSpec("class_weights must be 4 non-negative values")
        return self

    def tag(self) -> str:
        return (
            f"synthetic(u={self.n_users},s={self.n_scenarios},"
            f"r={self.reports_per_session},sep={self.class_separation:g},"
            f"us={self.user_shift:g},ss={self.segment_shift:g},"
            f"sd={self.noise_sd:g},seed={self.seed})"
        )


# Latent class -> emitted FMS score, the midpoint of the default bin.
CLASS_SCORES = (0, 2, 5, 8)


def benchmark_spec(seed: int = 11) -> SynthSpec:
    """The repo's fixed benchmark dataset spec.

    Sized so every fold of a 10-fold split leaves each user some unseen
    scenarios (populating L1), with segment-level shift dominating
    user-level shift so training-set specificity visibly orders accuracy.
    """
    return SynthSpec(
        n_users=8,
        n_scenarios=4,
        reports_per_session=4,
        report_interval=30.0,
        frame_rate=20.0,
        class_separation=1.5,
        user_shift=1.4,
        segment_shift=2.2,
        noise_sd=1.0,
        seed=seed,
    )


def generate_synthetic(spec: SynthSpec) -> Dataset:
    """Generate a deterministic dataset from *spec*.

    Per session, frames run from t=0 through the last report's future context
    at ``frame_rate``. Each report draws a latent severity class; frames
    inside its 11 s segment get that class's mean direction scaled by
    ``class_separation``, on top of a per-user offset (``user_shift``) and a
    per-segment offset (``segment_shift``) plus i.i.d. Gaussian noise. The
    segment offset is hierarchical: a per-(user, scenario) component shared by
    all segments of the session plus an independent per-segment component, so
    same-scenario segments are more alike than cross-scenario ones. Emitted
    FMS scores are the bin midpoints of the latent classes, so labels are
    exactly recoverable under the default binning.
    """
    spec.validate()
    d = feat.N_FEATURES
    rng = np.random.default_rng(spec.seed)

    class_means = rng.standard_normal((4, d))
    user_offsets = rng.standard_normal((spec.n_users, d))
    scenario_offsets = rng.standard_normal((spec.n_users, spec.n_scenarios, d))

    weights = None
    if spec.class_weights is not None:
        w = np.asarray(spec.class_weights, dtype=float)
        weights = w / w.sum()

    n_reports_total = spec.n_users * spec.n_scenarios * spec.reports_per_session
    latent = rng.choice(4, size=n_reports_total, p=weights)
    if spec.class_separation > 0 and (weights is None or (weights > 0).all()):
        # guarantee all four classes appear at least once
        for c in range(4):
            if not (latent == c).any():
                latent[c % n_reports_total] = c

    t_end = spec.reports_per_session * spec.report_interval + 1.0
    n_frames = int(round(t_end * spec.frame_rate)) + 1
    times = np.arange(n_frames, dtype=np.float64) / spec.frame_rate

    frames: dict[SessionKey, FrameStream] = {}
    reports: dict[SessionKey, list[FmsReport]] = {}
    report_idx = 0
    for u in range(spec.n_users):
        user = f"u{u + 1:02d}"
        for s in range(spec.n_scenarios):
            scenario = f"s{s + 1:02d}"
            key = SessionKey(user, scenario)
            values = rng.standard_normal((n_frames, d)) * spec.noise_sd
            values += spec.user_shift * user_offsets[u]

            session_reports = []
            for r in range(spec.reports_per_session):
                rt = (r + 1) * spec.report_interval
                cls = int(latent[report_idx])
                report_idx += 1
                slot = rng.standard_normal(d)
                seg_offset = (scenario_offsets[u, s] + slot) / math.sqrt(2.0)
                lo = np.searchsorted(times, rt - 10.0, side="left")
                hi = np.searchsorted(times, rt + 1.0, side="left")
                values[lo:hi] += (
                    spec.class_separation * class_means[cls]
                    + spec.segment_shift * seg_offset
                )
                session_reports.append(FmsReport(key, rt, CLASS_SCORES[cls]))

            frames[key] = FrameStream(times=times.copy(), values=values)
            reports[key] = session_reports

    return Dataset(frames, reports, provenance=spec.tag()).freeze()


# ---------------------------------------------------------------------------
# Serialization (full-precision round trip)


def write_tracking_csv(dataset: Dataset, stream) -> None:
    close = isinstance(stream, str)
    fh = open(stream, "w", encoding="utf-8", newline="") if close else stream
    try:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(list(META_COLUMNS) + list(feat.registry().names))
        for key in dataset.sessions():
            s = dataset.frames[key]
            for t, row in zip(s.times, s.values):
                writer.writerow(
                    [key.user_id, key.scenario_id, repr(float(t))]
                    + [repr(float(v)) for v in row]
                )
    finally:
        if close:
            fh.close()


def write_reports_csv(dataset: Dataset, stream) -> None:
    close = isinstance(stream, str)
    fh = open(stream, "w", encoding="utf-8", newline="") if close else stream
    try:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(list(REPORT_COLUMNS))
        for key in dataset.sessions():
            for rp in dataset.reports.get(key, []):
                writer.writerow(
                    [key.user_id, key.scenario_id, repr(float(rp.t)), rp.score]
                )
    finally:
        if close:
            fh.close()


def load_dataset(
    tracking_path: str,
    reports_path: str,
    mapping_path: str | None = None,
    provenance: str = "real",
) -> Dataset:
    mapping = read_column_mapping(mapping_path) if mapping_path else None
    frames = parse_tracking_csv(tracking_path, mapping=mapping)
    reports = parse_reports_csv(reports_path)
    return build_dataset(frames, reports, provenance=provenance)
