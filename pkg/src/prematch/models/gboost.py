"""Gradient-boosted depth-3 trees on binomial deviance."""

from __future__ import annotations

import math

import numpy as np
from scipy.special import expit

from prematch.models.tree import Tree, grow_tree


def log_loss_from_scores(scores: np.ndarray, y: np.ndarray) -> float:
    """Mean binomial deviance of raw scores (numerically stable)."""
    return float(np.mean(np.logaddexp(0.0, scores) - y * scores))


class GboostModel:
    """Fitted boosting ensemble: score = base + lr * sum of tree steps."""

    def __init__(self, spec, base_score: float, trees: list[Tree], loss_curve: list[float], seed: int):
        self.spec = spec
        self.base_score = base_score
        self.trees = trees
        #: training log-loss after 0, 1, ..., n_estimators stages
        self.loss_curve_ = loss_curve
        self.seed = seed
        self.n_features_in_: int = 0

    def decision_scores(self, X: np.ndarray) -> np.ndarray:
        X = np.ascontiguousarray(X, dtype=np.float64)
        scores = np.full(X.shape[0], self.base_score)
        for tree in self.trees:
            scores += self.spec.learning_rate * tree.predict_value(X)
        return scores

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        from prematch.models.base import check_predict_input

        X, squeeze = check_predict_input(X, self.n_features_in_)
        proba = expit(self.decision_scores(X))
        return float(proba[0]) if squeeze else proba

    def predict(self, X: np.ndarray) -> np.ndarray:
        proba = self.predict_proba(X)
        return (np.asarray(proba) >= 0.5).astype(int)


def fit_gboost(spec, X: np.ndarray, y: np.ndarray, seed: int) -> GboostModel:
    """Stagewise fit: each tree regresses the current negative gradient.

    The initial score is the log-odds of the base rate. Leaf outputs are the
    Newton step sum(residual) / sum(p(1-p)) over the leaf, shrunk by the
    learning rate. The per-stage training loss is recorded.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    base_rate = float(y.mean())
    base_score = math.log(base_rate / (1.0 - base_rate))
    scores = np.full(X.shape[0], base_score)
    trees: list[Tree] = []
    loss_curve = [log_loss_from_scores(scores, y)]
    for _ in range(spec.n_estimators):
        p = expit(scores)
        residual = y - p
        hessian = p * (1.0 - p)
        tree = grow_tree(
            X,
            residual,
            weights=hessian,
            max_features=None,
            min_samples_split=spec.min_samples_split,
            min_samples_leaf=spec.min_samples_leaf,
            max_depth=spec.max_depth,
            criterion="mse",
        )
        trees.append(tree)
        scores = scores + spec.learning_rate * tree.predict_value(X)
        loss_curve.append(log_loss_from_scores(scores, y))
    model = GboostModel(spec, base_score, trees, loss_curve, seed)
    model.n_features_in_ = X.shape[1]
    return model
