"""Second-order gradient boosting with the softmax objective.

Each round fits one regression tree per class to the gradient/hessian of
the multiclass cross-entropy at the current scores: g = p - 1[y = c],
h = p (1 - p). Split gains use the structure-score formula with L2 leaf
regularization (lam) and a per-split complexity penalty (gamma); leaf
weights are Newton steps soft-thresholded by the L1 term (alpha). Rows and
columns are subsampled per class tree from a (seed, round, class) stream.
"""

from __future__ import annotations

import math

import numpy as np

from .._util import substream
from ..errors import DimensionMismatch, EmptyInput
from ._kernels import gather_suborder
from ._tree import FlatTree, grow_regression_tree, leaf_values

N_CLASSES = 4


def softmax(scores: np.ndarray) -> np.ndarray:
    z = scores - scores.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def log_loss(proba: np.ndarray, y: np.ndarray) -> float:
    p = np.clip(proba[np.arange(len(y)), y], 1e-300, None)
    return float(-np.mean(np.log(p)))


class GradientBoostedTrees:
    def __init__(
        self,
        n_rounds: int = 400,
        max_depth: int = 6,
        learning_rate: float = 0.05,
        subsample: float = 0.8,
        colsample_bytree: float = 0.8,
        gamma: float = 0.1,
        alpha: float = 0.1,
        lam: float = 1.0,
        base_score: float = 0.0,
        seed: int = 0,
        n_classes: int = N_CLASSES,
        track_loss: bool = False,
    ):
        if learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if not (0 < subsample <= 1 and 0 < colsample_bytree <= 1):
            raise ValueError("subsample rates must be in (0, 1]")
        if min(gamma, alpha, lam) < 0:
            raise ValueError("gamma, alpha, lam must be >= 0")
        self.n_rounds = n_rounds
        self.max_depth = max_depth
        self.learning_rate = learning_rate
        self.subsample = subsample
        self.colsample_bytree = colsample_bytree
        self.gamma = gamma
        self.alpha = alpha
        self.lam = lam
        self.base_score = base_score
        self.seed = seed
        self.n_classes = n_classes
        self.track_loss = track_loss
        self.trees_: list[list[FlatTree]] = []  # [round][class]
        self.train_losses_: list[float] = []
        self.n_features_: int | None = None

    def fit(self, X, y):
        X = np.ascontiguousarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.int64)
        if X.ndim != 2 or X.shape[0] == 0:
            raise EmptyInput("training set is empty")
        n, d = X.shape
        self.n_features_ = d
        onehot = (y[:, None] == np.arange(self.n_classes)).astype(np.float64)
        scores = np.full((n, self.n_classes), self.base_score, dtype=np.float64)
        n_rows = max(1, round(self.subsample * n))
        n_cols = max(1, min(d, math.ceil(self.colsample_bytree * d)))
        full_order = np.argsort(X, axis=0, kind="stable").astype(np.int32)

        self.trees_ = []
        self.train_losses_ = []
        for t in range(self.n_rounds):
            proba = softmax(scores)
            if self.track_loss:
                self.train_losses_.append(log_loss(proba, y))
            round_trees = []
            for c in range(self.n_classes):
                rng = substream(self.seed, t, c)
                g = proba[:, c] - onehot[:, c]
                h = proba[:, c] * (1.0 - proba[:, c])
                if n_rows < n:
                    rows = np.sort(rng.choice(n, size=n_rows, replace=False))
                else:
                    rows = np.arange(n)
                if n_cols < d:
                    cols = np.sort(rng.choice(d, size=n_cols, replace=False))
                else:
                    cols = np.arange(d)
                rank = np.full(n, -1, dtype=np.int32)
                rank[rows] = np.arange(len(rows), dtype=np.int32)
                order0 = gather_suborder(
                    full_order, cols.astype(np.int64), rank, len(rows)
                )
                tree = grow_regression_tree(
                    X[np.ix_(rows, cols)],
                    order0,
                    g[rows],
                    h[rows],
                    columns=cols,
                    max_depth=self.max_depth,
                    lam=self.lam,
                    gamma=self.gamma,
                    alpha=self.alpha,
                )
                scores[:, c] += self.learning_rate * leaf_values(tree, X)
                round_trees.append(tree)
            self.trees_.append(round_trees)
        if self.track_loss:
            self.train_losses_.append(log_loss(softmax(scores), y))
        return self

    def decision_scores(self, X) -> np.ndarray:
        X = np.ascontiguousarray(np.atleast_2d(X), dtype=np.float64)
        if X.shape[1] != self.n_features_:
            raise DimensionMismatch(
                f"model expects {self.n_features_} features, got {X.shape[1]}"
            )
        scores = np.full((X.shape[0], self.n_classes), self.base_score)
        for round_trees in self.trees_:
            for c, tree in enumerate(round_trees):
                scores[:, c] += self.learning_rate * leaf_values(tree, X)
        return scores

    def predict_proba(self, X) -> np.ndarray:
        return softmax(self.decision_scores(X))

    def predict(self, X) -> np.ndarray:
        return np.argmax(self.predict_proba(X), axis=1)
