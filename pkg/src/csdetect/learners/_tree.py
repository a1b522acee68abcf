"""Flat-array decision trees shared by the forest and boosting learners.

Trees are stored as parallel arrays (feature, threshold, left, right, value)
so batch prediction is a vectorized routing loop instead of per-sample
recursion. Exact split search runs on presorted per-feature orders that
children inherit by compaction (see ``_kernels``); randomized split search
(Extra Trees) needs no sorting and stays in plain numpy.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._kernels import best_gini_split, best_newton_split, partition_order

_NEG_INF = -np.inf


@dataclass
class FlatTree:
    feature: np.ndarray    # (n_nodes,) int32; -1 marks a leaf
    threshold: np.ndarray  # (n_nodes,) float64
    left: np.ndarray       # (n_nodes,) int32
    right: np.ndarray      # (n_nodes,) int32
    value: np.ndarray      # (n_nodes, C) class distributions or (n_nodes,) weights

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    def max_depth(self) -> int:
        depth = np.zeros(self.n_nodes, dtype=np.int32)
        for nid in range(self.n_nodes):
            if self.feature[nid] >= 0:
                depth[self.left[nid]] = depth[nid] + 1
                depth[self.right[nid]] = depth[nid] + 1
        return int(depth.max()) if self.n_nodes else 0


class _TreeBuilder:
    def __init__(self):
        self.feature: list[int] = []
        self.threshold: list[float] = []
        self.left: list[int] = []
        self.right: list[int] = []
        self.value: list = []

    def add(self, value) -> int:
        nid = len(self.feature)
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.value.append(value)
        return nid

    def set_split(self, nid: int, feature: int, threshold: float,
                  left: int, right: int) -> None:
        self.feature[nid] = feature
        self.threshold[nid] = threshold
        self.left[nid] = left
        self.right[nid] = right

    def finish(self) -> FlatTree:
        return FlatTree(
            feature=np.array(self.feature, dtype=np.int32),
            threshold=np.array(self.threshold, dtype=np.float64),
            left=np.array(self.left, dtype=np.int32),
            right=np.array(self.right, dtype=np.int32),
            value=np.array(self.value, dtype=np.float64),
        )


def route(tree: FlatTree, X: np.ndarray) -> np.ndarray:
    """Leaf index for every row of X (rule: go left iff x[feature] < threshold)."""
    n = X.shape[0]
    node = np.zeros(n, dtype=np.int32)
    rows = np.arange(n)
    while True:
        f = tree.feature[node]
        internal = f >= 0
        if not internal.any():
            return node
        xi = X[rows, np.where(internal, f, 0)]
        go_left = xi < tree.threshold[node]
        nxt = np.where(go_left, tree.left[node], tree.right[node])
        node = np.where(internal, nxt, node)


def leaf_values(tree: FlatTree, X: np.ndarray) -> np.ndarray:
    return tree.value[route(tree, X)]


# ---------------------------------------------------------------------------
# Classification trees (Gini impurity)


def _random_split(Xc, yc, n_classes, min_leaf, rng):
    """One uniform threshold per candidate feature; keep the best by Gini."""
    m, f = Xc.shape
    if m < 2:
        return None
    lo = Xc.min(axis=0)
    hi = Xc.max(axis=0)
    thr = lo + rng.random(f) * (hi - lo)
    left = Xc < thr
    nl = left.sum(axis=0).astype(np.float64)
    nr = m - nl
    onehot = (yc[:, None] == np.arange(n_classes)).astype(np.float64)
    cl = left.T.astype(np.float64) @ onehot
    cr = onehot.sum(axis=0)[None, :] - cl
    valid = (hi > lo) & (nl >= max(min_leaf, 1)) & (nr >= max(min_leaf, 1))
    with np.errstate(divide="ignore", invalid="ignore"):
        score = (cl ** 2).sum(axis=1) / nl + (cr ** 2).sum(axis=1) / nr
    score[~valid] = _NEG_INF
    j = int(np.argmax(score))
    if score[j] == _NEG_INF:
        return None
    return j, float(thr[j])


def grow_classification_tree(
    X: np.ndarray,
    y: np.ndarray,
    *,
    n_classes: int,
    max_depth: int,
    min_samples_split: int,
    min_samples_leaf: int,
    max_features: int,
    split_mode: str,
    rng: np.random.Generator,
) -> FlatTree:
    """Greedy recursive partitioning; leaves hold class frequency vectors.

    At each node, ``max_features`` candidate features are drawn without
    replacement. ``split_mode`` selects exact midpoint scanning or one
    random threshold per candidate. Stops on purity, depth, or count
    constraints; zero-gain splits are allowed.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.int64)
    n, d = X.shape
    if n == 0:
        raise ValueError("cannot grow a tree on zero samples")
    builder = _TreeBuilder()
    mf = min(max_features, d)
    exact = split_mode == "exact"
    order0 = np.argsort(X, axis=0, kind="stable").astype(np.int32) if exact else None

    def stats(rows_or_order, depth):
        rows = rows_or_order[:, 0] if exact else rows_or_order
        counts = np.bincount(y[rows], minlength=n_classes).astype(np.float64)
        m = len(rows)
        nid = builder.add(counts / m)
        splittable = (
            counts.max() < m and depth < max_depth and m >= min_samples_split
        )
        return nid, m, splittable

    def build_exact(order: np.ndarray, depth: int) -> int:
        nid, m, splittable = stats(order, depth)
        if not splittable:
            return nid
        cand = rng.choice(d, size=mf, replace=False).astype(np.int64)
        found, jj, i, thr = best_gini_split(
            X, order, cand, y, n_classes, min_samples_leaf
        )
        if not found:
            return nid
        feature = int(cand[jj])
        goes_left = np.zeros(n, dtype=np.bool_)
        goes_left[order[: i + 1, feature]] = True
        left_o, right_o = partition_order(order, goes_left, i + 1)
        left_id = build_exact(left_o, depth + 1)
        right_id = build_exact(right_o, depth + 1)
        builder.set_split(nid, feature, thr, left_id, right_id)
        return nid

    def build_random(rows: np.ndarray, depth: int) -> int:
        nid, m, splittable = stats(rows, depth)
        if not splittable:
            return nid
        cand = rng.choice(d, size=mf, replace=False)
        found = _random_split(X[rows][:, cand], y[rows], n_classes,
                              min_samples_leaf, rng)
        if found is None:
            return nid
        j, thr = found
        feature = int(cand[j])
        mask = X[rows, feature] < thr
        left_id = build_random(rows[mask], depth + 1)
        right_id = build_random(rows[~mask], depth + 1)
        builder.set_split(nid, feature, thr, left_id, right_id)
        return nid

    if exact:
        build_exact(order0, 0)
    else:
        build_random(np.arange(n), 0)
    return builder.finish()


# ---------------------------------------------------------------------------
# Regression trees on (gradient, hessian) pairs for boosting


def grow_regression_tree(
    Xt: np.ndarray,
    order0: np.ndarray,
    g: np.ndarray,
    h: np.ndarray,
    *,
    columns: np.ndarray,
    max_depth: int,
    lam: float,
    gamma: float,
    alpha: float,
) -> FlatTree:
    """Second-order tree: structure-score gain with L2 (lam) and a split
    penalty (gamma); leaf weights are Newton steps soft-thresholded by alpha.

    ``Xt`` holds the tree's sampled rows and candidate columns; ``order0``
    presorts them; ``columns`` maps local columns back to original feature
    indices so the finished tree routes full-width rows.
    """
    m0 = Xt.shape[0]
    builder = _TreeBuilder()

    def leaf_weight(G: float, H: float) -> float:
        mag = max(abs(G) - alpha, 0.0) / (H + lam)
        return -np.sign(G) * mag

    def build(order: np.ndarray, depth: int) -> int:
        rows = order[:, 0]
        G = float(g[rows].sum())
        H = float(h[rows].sum())
        nid = builder.add(leaf_weight(G, H))
        if depth >= max_depth or len(rows) < 2:
            return nid
        found, j, i, thr = best_newton_split(Xt, order, g, h, G, H, lam, gamma)
        if not found:
            return nid
        goes_left = np.zeros(m0, dtype=np.bool_)
        goes_left[order[: i + 1, j]] = True
        left_o, right_o = partition_order(order, goes_left, i + 1)
        left_id = build(left_o, depth + 1)
        right_id = build(right_o, depth + 1)
        builder.set_split(nid, int(columns[j]), float(thr), left_id, right_id)
        return nid

    build(order0, 0)
    return builder.finish()
