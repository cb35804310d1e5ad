"""k-nearest-neighbour classifier on the two team-average win rates."""

from __future__ import annotations

import warnings

import numpy as np

from prematch.features import N_FEATURES, TEAM_A_WINRATE_MEAN, TEAM_B_WINRATE_MEAN

SUBSET_COLUMNS = (TEAM_A_WINRATE_MEAN, TEAM_B_WINRATE_MEAN)


def _subset(X: np.ndarray, spec) -> np.ndarray:
    """Reduce a full 44-column matrix to the two team-average win rates.

    A 2-column matrix is taken as already reduced, so the model can also be
    driven directly in the reduced space.
    """
    if spec.feature_subset == "none" or X.shape[1] == 2:
        return X
    if X.shape[1] == N_FEATURES:
        return X[:, SUBSET_COLUMNS]
    raise ValueError(f"expected {N_FEATURES} or 2 columns, got {X.shape[1]}")


class KnnModel:
    """Store-only fit; prediction weights neighbours by inverse distance."""

    def __init__(self, spec, X: np.ndarray, y: np.ndarray, seed: int):
        self.spec = spec
        self._X = X
        self._y = y
        self.seed = seed
        self.n_features_in_ = X.shape[1]
        self.k_ = min(spec.n_neighbors, X.shape[0])
        self.k_clamped_ = self.k_ < spec.n_neighbors
        if self.k_clamped_:
            warnings.warn(
                f"n_neighbors={spec.n_neighbors} clamped to training size {X.shape[0]}",
                stacklevel=3,
            )

    def _distances(self, X: np.ndarray) -> np.ndarray:
        diff = np.abs(X[:, None, :] - self._X[None, :, :])
        p = self.spec.minkowski_p
        if p == 1:
            return diff.sum(axis=2)
        return (diff**p).sum(axis=2) ** (1.0 / p)

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        from prematch.models.base import check_predict_input

        X = np.asarray(X, dtype=float)
        squeeze = X.ndim == 1
        if squeeze:
            X = X.reshape(1, -1)
        if X.shape[1] not in (self.n_features_in_, N_FEATURES):
            raise ValueError(f"expected {self.n_features_in_} columns, got {X.shape[1]}")
        if X.shape[1] != self.n_features_in_:
            X = _subset(X, self.spec)
        check_predict_input(X, self.n_features_in_)
        dist = self._distances(X)
        if self.k_ < self._X.shape[0]:
            neighbor_idx = np.argpartition(dist, self.k_ - 1, axis=1)[:, : self.k_]
        else:
            neighbor_idx = np.broadcast_to(np.arange(self._X.shape[0]), dist.shape)
        rows = np.arange(X.shape[0])[:, None]
        nd = dist[rows, neighbor_idx]
        ny = self._y[neighbor_idx]
        proba = np.empty(X.shape[0])
        for i in range(X.shape[0]):
            zero = nd[i] == 0.0
            if zero.any():
                # a coincident training point carries infinite weight
                proba[i] = ny[i][zero].mean()
            else:
                weights = 1.0 / nd[i]
                proba[i] = float(np.dot(weights, ny[i]) / weights.sum())
        return float(proba[0]) if squeeze else proba

    def predict(self, X: np.ndarray) -> np.ndarray:
        proba = self.predict_proba(X)
        return (np.asarray(proba) >= 0.5).astype(int)


def fit_knn(spec, X: np.ndarray, y: np.ndarray, seed: int) -> KnnModel:
    X = np.asarray(X, dtype=float)
    return KnnModel(spec, _subset(X, spec), np.asarray(y, dtype=float), seed)
