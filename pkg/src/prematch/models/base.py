"""Classifier specs with reference hyperparameters and the fit/predict contract.

Every family trains deterministically from (spec, X, y, seed) and predicts a
win probability in [0, 1] with the 0.5 threshold deciding the label.
"""

from __future__ import annotations

import pickle
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Union

import numpy as np

ARTIFACT_FORMAT = "prematch-model-v1"


@dataclass(frozen=True)
class SvcSpec:
    family = "svc"
    C: float = 8.0
    coef0: float = 1.0
    kernel: str = "poly"
    degree: int = 3
    gamma: float | str = "scale"  # 1 / (n_features * mean feature variance)
    tol: float = 1e-2
    max_iter: int = 300_000
    standardize: bool = True


@dataclass(frozen=True)
class KnnSpec:
    family = "knn"
    n_neighbors: int = 600
    minkowski_p: int = 1
    weights: str = "inverse-distance"
    feature_subset: str = "team-average-win-rate"
    standardize: bool = True


@dataclass(frozen=True)
class RfSpec:
    family = "rf"
    n_estimators: int = 350
    min_samples_leaf: int = 3
    min_samples_split: int = 10
    max_features: int = 7
    bootstrap: bool = True
    max_depth: int | None = None
    standardize: bool = False


@dataclass(frozen=True)
class GboostSpec:
    family = "gboost"
    learning_rate: float = 0.14
    n_estimators: int = 55
    max_depth: int = 3
    min_samples_split: int = 2
    min_samples_leaf: int = 1
    standardize: bool = False


@dataclass(frozen=True)
class DnnSpec:
    family = "dnn"
    hidden: tuple[int, ...] = (160, 128, 64, 32, 16)
    dropout_rate: float = 0.69
    group_order: str = "dropout_bn_dense"
    bn_momentum: float = 0.1
    bn_eps: float = 1e-5
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    batch_size: int = 32
    max_epochs: int = 200
    patience: int = 20
    val_fraction: float = 0.1
    restore_best: bool = True
    standardize: bool = True


ModelSpec = Union[SvcSpec, KnnSpec, RfSpec, GboostSpec, DnnSpec]

SPEC_FAMILIES: dict[str, type] = {
    "svc": SvcSpec,
    "knn": KnnSpec,
    "rf": RfSpec,
    "gboost": GboostSpec,
    "dnn": DnnSpec,
}


def make_spec(family: str, overrides: dict | None = None) -> ModelSpec:
    """Build a spec from its family name plus optional field overrides."""
    if family not in SPEC_FAMILIES:
        raise ValueError(f"unknown model family {family!r}, expected one of {sorted(SPEC_FAMILIES)}")
    cls = SPEC_FAMILIES[family]
    overrides = dict(overrides or {})
    known = {f.name for f in fields(cls)}
    unknown = set(overrides) - known
    if unknown:
        raise ValueError(f"unknown {family} spec keys: {sorted(unknown)}")
    if "hidden" in overrides:
        overrides["hidden"] = tuple(overrides["hidden"])
    return cls(**overrides)


def spec_to_dict(spec: ModelSpec) -> dict:
    out = {"family": spec.family}
    for f in fields(spec):
        value = getattr(spec, f.name)
        out[f.name] = list(value) if isinstance(value, tuple) else value
    return out


def validate_fit_inputs(X: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    if X.ndim != 2:
        raise ValueError(f"X must be 2-dimensional, got shape {X.shape}")
    if y.ndim != 1 or y.shape[0] != X.shape[0]:
        raise ValueError(f"y must be one label per row: X has {X.shape[0]} rows, y has shape {y.shape}")
    if X.shape[0] < 2:
        raise ValueError("need at least 2 training rows")
    if not np.isfinite(X).all():
        raise ValueError("X contains non-finite values")
    labels = np.unique(y)
    if not np.isin(labels, (0, 1)).all():
        raise ValueError(f"labels must be 0/1, got {labels}")
    if labels.size < 2:
        raise ValueError("training labels contain a single class")
    return X, y.astype(int)


def check_predict_input(X, n_features: int) -> tuple[np.ndarray, bool]:
    """Normalize a query to 2-D; returns (matrix, was_single_row)."""
    X = np.asarray(X, dtype=float)
    squeeze = X.ndim == 1
    if squeeze:
        X = X.reshape(1, -1)
    if X.ndim != 2 or X.shape[1] != n_features:
        raise ValueError(f"expected {n_features} feature columns, got shape {X.shape}")
    if not np.isfinite(X).all():
        raise ValueError("query contains non-finite values")
    return X, squeeze


def fit(spec: ModelSpec, X: np.ndarray, y: np.ndarray, seed: int):
    """Train the family named by ``spec``; deterministic in (spec, X, y, seed)."""
    from prematch.models.dnn import fit_dnn
    from prematch.models.forest import fit_rf
    from prematch.models.gboost import fit_gboost
    from prematch.models.knn import fit_knn
    from prematch.models.svc import fit_svc

    X, y = validate_fit_inputs(X, y)
    trainers = {"svc": fit_svc, "knn": fit_knn, "rf": fit_rf, "gboost": fit_gboost, "dnn": fit_dnn}
    return trainers[spec.family](spec, X, y, seed)


@dataclass
class TrainedArtifact:
    """What ``train`` persists: the spec, optional scaler, and fitted model."""

    spec: ModelSpec
    model: object
    scaler: object | None
    seed: int

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        squeeze = X.ndim == 1
        if squeeze:
            X = X.reshape(1, -1)
        if self.scaler is not None:
            X = self.scaler.transform(X)
        proba = np.asarray(self.model.predict_proba(X))
        return float(proba[0]) if squeeze else proba

    def predict(self, X: np.ndarray) -> np.ndarray:
        proba = self.predict_proba(X)
        return (np.asarray(proba) >= 0.5).astype(int)


def save_artifact(artifact: TrainedArtifact, path: str | Path) -> None:
    payload = {
        "format": ARTIFACT_FORMAT,
        "spec": spec_to_dict(artifact.spec),
        "artifact": artifact,
    }
    with open(path, "wb") as fh:
        pickle.dump(payload, fh, protocol=4)


def load_artifact(path: str | Path) -> TrainedArtifact:
    with open(path, "rb") as fh:
        payload = pickle.load(fh)
    if not isinstance(payload, dict) or payload.get("format") != ARTIFACT_FORMAT:
        raise ValueError(f"{path}: not a {ARTIFACT_FORMAT} artifact")
    return payload["artifact"]
