"""Training-set construction by user specificity.

Fixing one stratified test fold, every remaining sample is tagged by its
relation to the fold's users: L1 (same user, unseen scenario), L2 (seen
scenario, unseen segment), L3 (same segment), or L0 (other users).
Training sets are unions of these levels; L3 amounts to local calibration
since its windows come from the same 11 s segments as the test windows.
"""

import numpy as np

from csdetect.dataio import benchmark_spec, generate_synthetic
from csdetect.partition import (
    LEVEL_COMBOS,
    SpecificityLevel,
    assign_levels,
    combo_name,
    compose_training_set,
    stratified_kfold,
)
from csdetect.preprocess import prepare_windows

windows = prepare_windows(generate_synthetic(benchmark_spec()))
print(f"{len(windows)} windows from 8 users x 4 scenarios x 4 segments x 3 windows")

plan = stratified_kfold(windows.y, k=10, seed=3)
print("\nper-fold level pool sizes:")
print("fold  test    L0    L1    L2    L3")
for fi, fold in enumerate(plan.folds):
    a = assign_levels(windows, fold)
    sizes = [len(a.indices(level)) for level in SpecificityLevel]
    print(f"{fi:4d} {len(fold):5d} {sizes[0]:5d} {sizes[1]:5d} {sizes[2]:5d} {sizes[3]:5d}")

fold = plan.folds[0]
a = assign_levels(windows, fold)
print("\ntraining-set sizes for fold 0 by level combination:")
for combo in LEVEL_COMBOS:
    idx = compose_training_set(a, combo)
    overlap = set(idx.tolist()) & set(fold.tolist())
    print(f"  {combo_name(combo):10s} {len(idx):5d} samples (test overlap: {len(overlap)})")

l3 = a.indices(SpecificityLevel.L3)
shared = np.intersect1d(windows.segment_ids[l3], windows.segment_ids[fold])
print(f"\nL3 windows span {len(np.unique(windows.segment_ids[l3]))} segments, "
      f"{len(shared)} shared with the test fold (same segments, disjoint windows)")
