"""CART growing kernel shared by the forest and boosting families.

The grower is JIT-compiled; it works on a flat arena of node arrays with an
explicit stack, so one implementation serves classification (Gini, binary
labels) and regression (variance reduction, arbitrary targets with Newton
leaf weights).

Split contract: candidate features are examined in ascending column order and
only strictly better gains replace the incumbent, so ties resolve to the
lowest column index and then the lowest threshold. Thresholds are anchored to
the largest left-hand value with the predicate ``x <= threshold``, which makes
tree predictions exactly invariant under strictly increasing per-column
transforms of the inputs.
"""

from __future__ import annotations

import numpy as np
from numba import njit

LEAF = -1
_TINY = 1e-12


@njit(cache=True)
def _splitmix64(state: np.uint64) -> tuple[np.uint64, np.uint64]:
    # SplitMix64 step: deterministic, portable feature-subset sampling
    state = state + np.uint64(0x9E3779B97F4A7C15)
    z = state
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    z = z ^ (z >> np.uint64(31))
    return state, z


@njit(cache=True)
def _grow(X, y, w, sample_idx, max_features, min_split, min_leaf, max_depth, use_gini, rng_seed):
    """Grow one tree. Returns (feature, threshold, left, right, value, count, used).

    value[node] = sum(y) / sum(w) over the node's samples, so passing w = 1
    yields the label mean and passing Newton weights yields the boosting leaf
    step. Splitting stops at max_depth, at nodes smaller than min_split, when
    no child would keep min_leaf samples, or when no split improves impurity.
    """
    n_samples = sample_idx.shape[0]
    n_features = X.shape[1]
    cap = 2 * n_samples + 1
    feature = np.full(cap, LEAF, dtype=np.int64)
    threshold = np.zeros(cap, dtype=np.float64)
    left = np.full(cap, -1, dtype=np.int64)
    right = np.full(cap, -1, dtype=np.int64)
    value = np.zeros(cap, dtype=np.float64)
    count = np.zeros(cap, dtype=np.int64)

    idx = sample_idx.copy()
    scratch = np.empty(n_samples, dtype=np.int64)
    perm = np.empty(n_features, dtype=np.int64)
    cand = np.empty(n_features, dtype=np.int64)
    rng_state = np.uint64(rng_seed)

    # stack of (node_id, lo, hi, depth)
    stack = np.empty((cap, 4), dtype=np.int64)
    stack[0, 0] = 0
    stack[0, 1] = 0
    stack[0, 2] = n_samples
    stack[0, 3] = 0
    top = 1
    used = 1

    while top > 0:
        top -= 1
        node = stack[top, 0]
        lo = stack[top, 1]
        hi = stack[top, 2]
        depth = stack[top, 3]
        m = hi - lo

        y_sum = 0.0
        w_sum = 0.0
        for p in range(lo, hi):
            y_sum += y[idx[p]]
            w_sum += w[idx[p]]
        value[node] = y_sum / w_sum if w_sum > _TINY else 0.0
        count[node] = m

        if m < min_split or depth >= max_depth:
            continue
        # pure node: nothing to gain
        if use_gini and (y_sum == 0.0 or y_sum == m):
            continue

        k = max_features if max_features < n_features else n_features
        if k < n_features:
            for f in range(n_features):
                perm[f] = f
            for i in range(k):
                rng_state, z = _splitmix64(rng_state)
                j = i + int(z % np.uint64(n_features - i))
                tmp = perm[i]
                perm[i] = perm[j]
                perm[j] = tmp
            cand[:k] = np.sort(perm[:k])
        else:
            for f in range(n_features):
                cand[f] = f

        best_gain = _TINY
        best_feat = -1
        best_thresh = 0.0
        for ci in range(k):
            f = cand[ci]
            vals = np.empty(m, dtype=np.float64)
            targets = np.empty(m, dtype=np.float64)
            for p in range(m):
                vals[p] = X[idx[lo + p], f]
            order = np.argsort(vals)
            for p in range(m):
                targets[p] = y[idx[lo + order[p]]]
            vals = vals[order]

            if use_gini:
                total_pos = y_sum
                parent = total_pos * (m - total_pos) / m  # proportional to Gini impurity * m
                left_pos = 0.0
                for p in range(m - 1):
                    left_pos += targets[p]
                    n_l = p + 1
                    n_r = m - n_l
                    if n_l < min_leaf or n_r < min_leaf:
                        continue
                    if vals[p] == vals[p + 1]:
                        continue
                    child = left_pos * (n_l - left_pos) / n_l + (total_pos - left_pos) * (
                        n_r - (total_pos - left_pos)
                    ) / n_r
                    gain = 2.0 * (parent - child) / m  # impurity decrease
                    if gain > best_gain:
                        best_gain = gain
                        best_feat = f
                        best_thresh = vals[p]
            else:
                total = 0.0
                for p in range(m):
                    total += targets[p]
                parent_score = total * total / m
                left_sum = 0.0
                for p in range(m - 1):
                    left_sum += targets[p]
                    n_l = p + 1
                    n_r = m - n_l
                    if n_l < min_leaf or n_r < min_leaf:
                        continue
                    if vals[p] == vals[p + 1]:
                        continue
                    score = left_sum * left_sum / n_l + (total - left_sum) * (total - left_sum) / n_r
                    gain = (score - parent_score) / m  # variance reduction
                    if gain > best_gain:
                        best_gain = gain
                        best_feat = f
                        best_thresh = vals[p]

        if best_feat < 0:
            continue

        # stable partition of idx[lo:hi]: <= threshold first
        n_l = 0
        for p in range(lo, hi):
            if X[idx[p], best_feat] <= best_thresh:
                scratch[n_l] = idx[p]
                n_l += 1
        n_r = n_l
        for p in range(lo, hi):
            if X[idx[p], best_feat] > best_thresh:
                scratch[n_r] = idx[p]
                n_r += 1
        for p in range(m):
            idx[lo + p] = scratch[p]

        feature[node] = best_feat
        threshold[node] = best_thresh
        left[node] = used
        right[node] = used + 1
        child_l = used
        child_r = used + 1
        used += 2

        stack[top, 0] = child_r
        stack[top, 1] = lo + n_l
        stack[top, 2] = hi
        stack[top, 3] = depth + 1
        top += 1
        stack[top, 0] = child_l
        stack[top, 1] = lo
        stack[top, 2] = lo + n_l
        stack[top, 3] = depth + 1
        top += 1

    return feature[:used], threshold[:used], left[:used], right[:used], value[:used], count[:used]


@njit(cache=True)
def _predict(feature, threshold, left, right, value, X):
    n = X.shape[0]
    out = np.empty(n, dtype=np.float64)
    for i in range(n):
        node = 0
        while feature[node] != LEAF:
            if X[i, feature[node]] <= threshold[node]:
                node = left[node]
            else:
                node = right[node]
        out[i] = value[node]
    return out


class Tree:
    """Immutable fitted tree over the arena arrays."""

    __slots__ = ("feature", "threshold", "left", "right", "value", "count")

    def __init__(self, feature, threshold, left, right, value, count):
        self.feature = feature
        self.threshold = threshold
        self.left = left
        self.right = right
        self.value = value
        self.count = count

    def predict_value(self, X: np.ndarray) -> np.ndarray:
        X = np.ascontiguousarray(X, dtype=np.float64)
        return _predict(self.feature, self.threshold, self.left, self.right, self.value, X)

    def leaf_counts(self) -> np.ndarray:
        return self.count[self.feature == LEAF]

    def n_leaves(self) -> int:
        return int((self.feature == LEAF).sum())


def grow_tree(
    X: np.ndarray,
    y: np.ndarray,
    *,
    sample_idx: np.ndarray | None = None,
    weights: np.ndarray | None = None,
    max_features: int | None = None,
    min_samples_split: int = 2,
    min_samples_leaf: int = 1,
    max_depth: int | None = None,
    criterion: str = "gini",
    rng_seed: int = 0,
) -> Tree:
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    if sample_idx is None:
        sample_idx = np.arange(X.shape[0], dtype=np.int64)
    else:
        sample_idx = np.ascontiguousarray(sample_idx, dtype=np.int64)
    if weights is None:
        weights = np.ones(X.shape[0], dtype=np.float64)
    else:
        weights = np.ascontiguousarray(weights, dtype=np.float64)
    if criterion not in ("gini", "mse"):
        raise ValueError(f"unknown criterion {criterion!r}")
    n_features = X.shape[1]
    k = n_features if max_features is None else min(max_features, n_features)
    depth_cap = np.iinfo(np.int64).max // 2 if max_depth is None else max_depth
    arrays = _grow(
        X,
        y,
        weights,
        sample_idx,
        k,
        min_samples_split,
        min_samples_leaf,
        depth_cap,
        criterion == "gini",
        np.uint64(rng_seed & 0xFFFFFFFFFFFFFFFF),
    )
    return Tree(*arrays)
