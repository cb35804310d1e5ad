"""Bagged CART forest with per-tree majority votes."""

from __future__ import annotations

import numpy as np

from prematch.models.tree import Tree, grow_tree


class ForestModel:
    """Fitted random forest; prediction is the mean of tree votes."""

    def __init__(self, spec, trees: list[Tree], oob_score: float | None, seed: int):
        self.spec = spec
        self.trees = trees
        self.oob_score_ = oob_score
        self.seed = seed
        self.n_features_in_: int = 0

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        from prematch.models.base import check_predict_input

        X, squeeze = check_predict_input(X, self.n_features_in_)
        votes = np.zeros(X.shape[0])
        for tree in self.trees:
            votes += tree.predict_value(X) >= 0.5
        proba = votes / len(self.trees)
        return proba[0] if squeeze else proba

    def predict(self, X: np.ndarray) -> np.ndarray:
        proba = self.predict_proba(X)
        return (np.asarray(proba) >= 0.5).astype(int)


def fit_rf(spec, X: np.ndarray, y: np.ndarray, seed: int) -> ForestModel:
    """Train ``spec.n_estimators`` trees on bootstrap samples.

    Every stochastic element (bootstrap draw, per-node feature subset) comes
    from per-tree substreams of ``seed``. When bootstrapping, the out-of-bag
    vote accuracy is recorded as ``oob_score_``.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = X.shape[0]
    children = np.random.SeedSequence(seed).spawn(spec.n_estimators)
    trees = []
    oob_votes = np.zeros(n)
    oob_counts = np.zeros(n)
    for child in children:
        rng = np.random.default_rng(child)
        tree_seed = int(child.generate_state(1, np.uint64)[0])
        if spec.bootstrap:
            sample_idx = rng.integers(0, n, n).astype(np.int64)
        else:
            sample_idx = np.arange(n, dtype=np.int64)
        tree = grow_tree(
            X,
            y,
            sample_idx=sample_idx,
            max_features=spec.max_features,
            min_samples_split=spec.min_samples_split,
            min_samples_leaf=spec.min_samples_leaf,
            max_depth=spec.max_depth,
            criterion="gini",
            rng_seed=tree_seed,
        )
        trees.append(tree)
        if spec.bootstrap:
            oob = np.ones(n, dtype=bool)
            oob[np.unique(sample_idx)] = False
            if oob.any():
                oob_votes[oob] += tree.predict_value(X[oob]) >= 0.5
                oob_counts[oob] += 1
    oob_score = None
    if spec.bootstrap:
        covered = oob_counts > 0
        if covered.any():
            oob_pred = (oob_votes[covered] / oob_counts[covered]) >= 0.5
            oob_score = float((oob_pred == (y[covered] >= 0.5)).mean())
    model = ForestModel(spec, trees, oob_score, seed)
    model.n_features_in_ = X.shape[1]
    return model
