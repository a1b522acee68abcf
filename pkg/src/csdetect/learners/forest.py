"""Random Forest (bagging) and Extra Trees (randomized splits).

Both average the class-frequency distributions of their member trees.
Per-tree RNG streams are derived from (seed, tree index), so fits are
bit-identical regardless of how many worker threads build the trees.
"""

from __future__ import annotations

import math

import numpy as np

from .._util import parallel_map, substream
from ..errors import DimensionMismatch, EmptyInput
from ._tree import FlatTree, grow_classification_tree, leaf_values

N_CLASSES = 4


class _TreeEnsemble:
    """Shared fit/predict plumbing for the two forest variants."""

    split_mode = "exact"
    bootstrap = True

    def __init__(
        self,
        n_trees: int,
        max_depth: int,
        min_samples_split: int,
        min_samples_leaf: int,
        seed: int = 0,
        n_classes: int = N_CLASSES,
        threads: int = 1,
    ):
        self.n_trees = n_trees
        self.max_depth = max_depth
        self.min_samples_split = min_samples_split
        self.min_samples_leaf = min_samples_leaf
        self.seed = seed
        self.n_classes = n_classes
        self.threads = threads
        self.trees_: list[FlatTree] = []
        self.n_features_: int | None = None

    def _max_features(self, d: int) -> int:
        raise NotImplementedError

    def fit(self, X, y):
        X = np.ascontiguousarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.int64)
        if X.ndim != 2 or X.shape[0] == 0:
            raise EmptyInput("training set is empty")
        n, d = X.shape
        self.n_features_ = d
        mf = self._max_features(d)

        def build(i: int) -> FlatTree:
            rng = substream(self.seed, i)
            rows = rng.integers(0, n, size=n) if self.bootstrap else np.arange(n)
            return grow_classification_tree(
                X[rows],
                y[rows],
                n_classes=self.n_classes,
                max_depth=self.max_depth,
                min_samples_split=self.min_samples_split,
                min_samples_leaf=self.min_samples_leaf,
                max_features=mf,
                split_mode=self.split_mode,
                rng=rng,
            )

        self.trees_ = parallel_map(build, range(self.n_trees), self.threads)
        return self

    def predict_proba(self, X) -> np.ndarray:
        X = np.ascontiguousarray(np.atleast_2d(X), dtype=np.float64)
        if X.shape[1] != self.n_features_:
            raise DimensionMismatch(
                f"model expects {self.n_features_} features, got {X.shape[1]}"
            )
        acc = np.zeros((X.shape[0], self.n_classes))
        for tree in self.trees_:
            acc += leaf_values(tree, X)
        return acc / len(self.trees_)

    def predict(self, X) -> np.ndarray:
        return np.argmax(self.predict_proba(X), axis=1)


class RandomForest(_TreeEnsemble):
    """Bagged exact-split trees; max_features = ceil(sqrt(d)) per node."""

    split_mode = "exact"
    bootstrap = True

    def __init__(
        self,
        n_trees: int = 600,
        max_depth: int = 10,
        min_samples_split: int = 10,
        min_samples_leaf: int = 4,
        bootstrap: bool = True,
        seed: int = 0,
        n_classes: int = N_CLASSES,
        threads: int = 1,
    ):
        super().__init__(
            n_trees, max_depth, min_samples_split, min_samples_leaf,
            seed=seed, n_classes=n_classes, threads=threads,
        )
        self.bootstrap = bootstrap

    def _max_features(self, d: int) -> int:
        return max(1, math.ceil(math.sqrt(d)))


class ExtraTrees(_TreeEnsemble):
    """Full-sample trees with one random threshold per candidate feature;
    max_features = ceil(0.8 * d)."""

    split_mode = "random"
    bootstrap = False

    def __init__(
        self,
        n_trees: int = 300,
        max_depth: int = 12,
        min_samples_split: int = 10,
        min_samples_leaf: int = 4,
        seed: int = 0,
        n_classes: int = N_CLASSES,
        threads: int = 1,
    ):
        super().__init__(
            n_trees, max_depth, min_samples_split, min_samples_leaf,
            seed=seed, n_classes=n_classes, threads=threads,
        )

    def _max_features(self, d: int) -> int:
        return max(1, math.ceil(0.8 * d))
