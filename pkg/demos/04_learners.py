"""The four tree-ensemble learners on a separable toy problem.

Random Forest bags exact-split trees; Extra Trees trades exact split search
for random thresholds on full samples; the gradient-boosted trees fit one
second-order tree per class and round; stacking concatenates the three
base learners' out-of-fold probabilities into a 12-dim meta-problem solved
by multinomial logistic regression.
"""

import time

import numpy as np

from csdetect.learners import (
    ExtraTrees,
    GradientBoostedTrees,
    RandomForest,
    StackingEnsemble,
)

rng = np.random.default_rng(0)
d = 23
centers = rng.standard_normal((4, d)) * 3.0
X = np.vstack([c + rng.standard_normal((120, d)) for c in centers])
y = np.repeat(np.arange(4), 120)
perm = rng.permutation(len(y))
X, y = X[perm], y[perm]
X_train, y_train = X[:360], y[:360]
X_test, y_test = X[360:], y[360:]

models = {
    "random forest": RandomForest(n_trees=100, seed=1),
    "extra trees": ExtraTrees(n_trees=100, seed=2),
    "boosted trees": GradientBoostedTrees(n_rounds=60, seed=3),
    "stacking": StackingEnsemble(
        base_params={
            "rf": {"n_trees": 40, "max_depth": 8},
            "et": {"n_trees": 40, "max_depth": 8},
            "gbt": {"n_rounds": 30, "max_depth": 3},
        },
        seed=4,
    ),
}

print(f"train {len(y_train)} / test {len(y_test)}, {d} features, 4 classes\n")
print(f"{'model':15s} {'fit s':>7s} {'ms/sample':>10s} {'test acc':>9s}")
for name, model in models.items():
    t0 = time.perf_counter()
    model.fit(X_train, y_train)
    fit_s = time.perf_counter() - t0
    t0 = time.perf_counter()
    pred = model.predict(X_test)
    per_sample_ms = (time.perf_counter() - t0) / len(y_test) * 1000
    acc = (pred == y_test).mean()
    print(f"{name:15s} {fit_s:7.2f} {per_sample_ms:10.3f} {acc:9.3f}")

proba = models["boosted trees"].predict_proba(X_test[:3])
print("\nboosted-tree class probabilities for three test rows:")
for row in proba:
    print("  " + "  ".join(f"{p:.3f}" for p in row))
