"""Probability stacking of the three tree ensembles.

Each base learner produces out-of-fold class probabilities for every
training row over a stratified split; the concatenated 12-dim vectors
train a multinomial logistic meta-learner. The bases are then refit on the
full training set for prediction time.
"""

from __future__ import annotations

import numpy as np

from .._util import child_seed
from ..errors import EmptyInput
from ..partition import stratified_kfold
from .boosting import GradientBoostedTrees
from .forest import ExtraTrees, RandomForest
from .linear import MultinomialLogit

N_CLASSES = 4

BASE_KINDS = ("rf", "et", "gbt")


def _make_base(kind: str, seed: int, params: dict | None, threads: int = 1):
    params = dict(params or {})
    params.setdefault("seed", seed)
    if kind == "rf":
        params.setdefault("threads", threads)
        return RandomForest(**params)
    if kind == "et":
        params.setdefault("threads", threads)
        return ExtraTrees(**params)
    if kind == "gbt":
        return GradientBoostedTrees(**params)
    raise ValueError(f"unknown base learner {kind!r}")


class StackingEnsemble:
    def __init__(
        self,
        oof_folds: int = 5,
        max_iterations: int = 2000,
        tol: float = 1e-6,
        base_params: dict[str, dict] | None = None,
        seed: int = 0,
        n_classes: int = N_CLASSES,
        threads: int = 1,
    ):
        if oof_folds < 2:
            raise ValueError("oof_folds must be >= 2")
        self.oof_folds = oof_folds
        self.max_iterations = max_iterations
        self.tol = tol
        self.base_params = base_params or {}
        self.seed = seed
        self.n_classes = n_classes
        self.threads = threads
        self.bases_: list = []
        self.meta_: MultinomialLogit | None = None
        self.n_features_: int | None = None

    def _meta_features(self, X) -> np.ndarray:
        return np.hstack([base.predict_proba(X) for base in self.bases_])

    def fit(self, X, y):
        X = np.ascontiguousarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.int64)
        n = X.shape[0]
        if n == 0:
            raise EmptyInput("training set is empty")
        if n < 2 * self.oof_folds:
            raise EmptyInput(
                f"need at least {2 * self.oof_folds} samples for "
                f"{self.oof_folds}-fold stacking"
            )

        plan = stratified_kfold(y, k=self.oof_folds, seed=child_seed(self.seed, 0))
        oof = np.zeros((n, len(BASE_KINDS) * self.n_classes))
        for fi, fold in enumerate(plan.folds):
            if len(fold) == 0:
                continue
            train_mask = np.ones(n, dtype=bool)
            train_mask[fold] = False
            for bi, kind in enumerate(BASE_KINDS):
                base = _make_base(
                    kind,
                    child_seed(self.seed, 1, fi, bi),
                    self.base_params.get(kind),
                    self.threads,
                )
                base.fit(X[train_mask], y[train_mask])
                cols = slice(bi * self.n_classes, (bi + 1) * self.n_classes)
                oof[fold, cols] = base.predict_proba(X[fold])

        self.meta_ = MultinomialLogit(
            max_iterations=self.max_iterations,
            tol=self.tol,
            n_classes=self.n_classes,
        ).fit(oof, y)

        self.bases_ = []
        for bi, kind in enumerate(BASE_KINDS):
            base = _make_base(
                kind, child_seed(self.seed, 2, bi), self.base_params.get(kind),
                self.threads,
            )
            self.bases_.append(base.fit(X, y))
        self.n_features_ = X.shape[1]
        return self

    def predict_proba(self, X) -> np.ndarray:
        return self.meta_.predict_proba(self._meta_features(np.atleast_2d(X)))

    def predict(self, X) -> np.ndarray:
        return np.argmax(self.predict_proba(X), axis=1)
