"""Jitted inner loops for exact split search on presorted feature orders.

Each tree sorts its feature columns once; child nodes inherit the sorted
order by stable compaction instead of re-sorting, so every node costs
O(rows x features). Row ids in ``order`` are tree-local (0..m0-1).
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def gather_suborder(full_order, col_ids, rank, m_sub):
    """Restrict a full presorted order to a row subsample and column subset.

    ``rank[i]`` is the subsample-local id of global row i, or -1 if the row
    was not sampled. Returns an (m_sub, len(col_ids)) order of local ids.
    """
    n = full_order.shape[0]
    f = len(col_ids)
    out = np.empty((m_sub, f), dtype=np.int32)
    for jj in range(f):
        j = col_ids[jj]
        k = 0
        for i in range(n):
            r = rank[full_order[i, j]]
            if r >= 0:
                out[k, jj] = r
                k += 1
    return out


@njit(cache=True, nogil=True)
def partition_order(order, goes_left, n_left):
    """Split a node's per-feature sorted orders into the two children."""
    m, f = order.shape
    left = np.empty((n_left, f), dtype=np.int32)
    right = np.empty((m - n_left, f), dtype=np.int32)
    for j in range(f):
        li = 0
        ri = 0
        for i in range(m):
            r = order[i, j]
            if goes_left[r]:
                left[li, j] = r
                li += 1
            else:
                right[ri, j] = r
                ri += 1
    return left, right


@njit(cache=True, nogil=True)
def best_gini_split(X, order, cand, y, n_classes, min_leaf):
    """Best exact Gini split over the candidate columns of one node.

    Maximizes sum_c(left_c^2)/n_left + sum_c(right_c^2)/n_right, which
    ranks splits identically to minimizing the Gini-weighted child
    impurity. Returns (found, column position in cand, split position,
    threshold); zero-gain splits are allowed.
    """
    m = order.shape[0]
    total = np.zeros(n_classes, dtype=np.float64)
    for i in range(m):
        total[y[order[i, 0]]] += 1.0
    best_score = -np.inf
    best_jj = -1
    best_i = -1
    best_thr = 0.0
    cl = np.zeros(n_classes, dtype=np.float64)
    for jj in range(len(cand)):
        j = cand[jj]
        for c in range(n_classes):
            cl[c] = 0.0
        for i in range(m - 1):
            r = order[i, j]
            cl[y[r]] += 1.0
            nl = i + 1
            nr = m - nl
            if nl < min_leaf or nr < min_leaf:
                continue
            xi = X[r, j]
            xn = X[order[i + 1, j], j]
            if xi < xn:
                sl = 0.0
                sr = 0.0
                for c in range(n_classes):
                    sl += cl[c] * cl[c]
                    rc = total[c] - cl[c]
                    sr += rc * rc
                score = sl / nl + sr / nr
                if score > best_score:
                    best_score = score
                    best_jj = jj
                    best_i = i
                    best_thr = (xi + xn) / 2.0
    return best_jj >= 0, best_jj, best_i, best_thr


@njit(cache=True, nogil=True)
def best_newton_split(X, order, g, h, G, H, lam, gamma):
    """Best structure-score split for a boosting node; gain must exceed 0.

    gain = 0.5 * [GL^2/(HL+lam) + GR^2/(HR+lam) - G^2/(H+lam)] - gamma
    """
    m, f = order.shape
    parent = G * G / (H + lam)
    best_gain = 0.0
    best_j = -1
    best_i = -1
    best_thr = 0.0
    for j in range(f):
        GL = 0.0
        HL = 0.0
        for i in range(m - 1):
            r = order[i, j]
            GL += g[r]
            HL += h[r]
            xi = X[r, j]
            xn = X[order[i + 1, j], j]
            if xi < xn:
                GR = G - GL
                HR = H - HL
                gain = 0.5 * (GL * GL / (HL + lam) + GR * GR / (HR + lam) - parent) - gamma
                if gain > best_gain:
                    best_gain = gain
                    best_j = j
                    best_i = i
                    best_thr = (xi + xn) / 2.0
    return best_j >= 0, best_j, best_i, best_thr
