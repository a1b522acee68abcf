"""From raw session streams to labeled window samples.

Each discomfort report anchors an 11 s segment (10 s history + 1 s future,
220 frames at 20 Hz). Segments are cleaned, cut into non-overlapping
60-frame windows, and each window becomes one mean-feature row. The
feature registry groups the 40 dimensions into 10 semantic groups and
provides the named subsets used for ablation.
"""

import numpy as np

from csdetect import features as feat
from csdetect.dataio import SynthSpec, generate_synthetic
from csdetect.preprocess import (
    CleaningPolicy,
    clean_frames,
    extract_segments,
    prepare_windows,
    windowize,
)

dataset = generate_synthetic(
    SynthSpec(n_users=2, n_scenarios=2, reports_per_session=4,
              class_separation=1.5, seed=3)
)
key = dataset.sessions()[0]
stream = dataset.frames[key]
reports = dataset.reports[key]

print("feature registry:")
for group, idx in feat.registry().groups.items():
    print(f"  {group:22s} {len(idx)} dims  (cols {idx[0]}..{idx[-1]})")
for name in ("head7", "eye16", "optimal23", "all40"):
    print(f"  subset {name:10s} -> {len(feat.resolve_subset(name))} dims")
print()

cleaned = clean_frames(stream, CleaningPolicy(clip_sigma=4.0, smooth_window=5))
segments, skipped = extract_segments(cleaned, reports)
print(f"{key}: {len(segments)} segments from {len(reports)} reports "
      f"({len(skipped)} skipped)")
seg = segments[0]
print(f"segment 0: {len(seg.times)} frames in "
      f"[{seg.times[0]:.2f}, {seg.times[-1]:.2f}] s, label {seg.label.label}")

samples = windowize(seg, feat.resolve_subset("optimal23"))
print(f"windowized: {len(samples)} windows x {len(samples[0].features)} features "
      f"(trailing {len(seg.times) - 60 * len(samples)} frames discarded)")
print()

windows = prepare_windows(dataset)
print(f"whole dataset: {len(windows)} window samples")
print(f"class counts: {np.bincount(windows.y, minlength=4)}  (None/Low/Medium/High)")
