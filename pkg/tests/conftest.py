import io

import numpy as np
import pytest

from csdetect import features as feat
from csdetect.dataio import SynthSpec, generate_synthetic


def tracking_csv(rows, header=None):
    """Build an in-memory tracking CSV from (user, scenario, t, vec) rows."""
    names = header or ["user_id", "scenario_id", "timestamp_s"] + list(feat.registry().names)
    lines = [",".join(names)]
    for user, scenario, t, vec in rows:
        lines.append(",".join([user, scenario, repr(float(t))] + [repr(float(v)) for v in vec]))
    return io.StringIO("\n".join(lines) + "\n")


def reports_csv(rows):
    lines = ["user_id,scenario_id,report_time_s,fms"]
    for user, scenario, t, score in rows:
        lines.append(f"{user},{scenario},{t},{score}")
    return io.StringIO("\n".join(lines) + "\n")


@pytest.fixture(scope="session")
def small_dataset():
    """Small synthetic dataset with populated L1/L2/L3 levels per fold."""
    spec = SynthSpec(
        n_users=6, n_scenarios=3, reports_per_session=3,
        class_separation=1.5, user_shift=1.0, segment_shift=2.0,
        noise_sd=1.0, seed=5,
    )
    return generate_synthetic(spec)


@pytest.fixture(scope="session")
def blobs_4class():
    """Well-separated 4-class Gaussian blobs (n=400, d=23, 5 sigma apart)."""
    rng = np.random.default_rng(42)
    d = 23
    centers = rng.standard_normal((4, d))
    centers /= np.linalg.norm(centers, axis=1, keepdims=True)
    centers *= 5.0
    X = np.vstack([centers[c] + rng.standard_normal((100, d)) for c in range(4)])
    y = np.repeat(np.arange(4), 100)
    perm = rng.permutation(len(y))
    return X[perm], y[perm]
