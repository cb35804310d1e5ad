"""Stratified k-fold cross-validation and accuracy-table reporting."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal

import numpy as np

from prematch.features import Standardizer
from prematch.models.base import ModelSpec, fit

Z_95 = 1.96


@dataclass(frozen=True)
class FoldAssignment:
    k: int
    fold_index: np.ndarray  # per-row fold in [0, k)


@dataclass(frozen=True)
class EvaluationReport:
    model: str
    fold_accuracies: tuple[float, ...]
    mean_accuracy: float
    std_dev: float  # sample (n-1) std of fold accuracies
    std_error: float  # std_dev / sqrt(k)
    ci_halfwidth: float
    ci_method: str  # "binomial" (over n_ref trials) or "fold" (1.96 * std_error)
    n_ref: int

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "fold_accuracies": list(self.fold_accuracies),
            "mean_accuracy": self.mean_accuracy,
            "std_dev": self.std_dev,
            "std_error": self.std_error,
            "ci_halfwidth": self.ci_halfwidth,
            "ci_method": self.ci_method,
            "n_ref": self.n_ref,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "EvaluationReport":
        return cls(
            model=obj["model"],
            fold_accuracies=tuple(obj["fold_accuracies"]),
            mean_accuracy=obj["mean_accuracy"],
            std_dev=obj["std_dev"],
            std_error=obj["std_error"],
            ci_halfwidth=obj["ci_halfwidth"],
            ci_method=obj["ci_method"],
            n_ref=obj["n_ref"],
        )


def stratified_kfold(y: np.ndarray, k: int, seed: int) -> FoldAssignment:
    """Assign each row a fold so per-fold class counts are off by at most one.

    Within each class the (seeded) shuffled members go round-robin over folds
    0..k-1, so fold sizes and class balance are as even as integer counts
    allow.
    """
    y = np.asarray(y)
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    rng = np.random.default_rng(seed)
    fold_index = np.full(y.shape[0], -1, dtype=int)
    for cls in np.unique(y):
        members = np.flatnonzero(y == cls)
        if members.size < k:
            raise ValueError(f"class {cls!r} has {members.size} members, fewer than k={k}")
        shuffled = rng.permutation(members)
        fold_index[shuffled] = np.arange(shuffled.size) % k
    return FoldAssignment(k=k, fold_index=fold_index)


def cross_validate(
    spec: ModelSpec,
    X: np.ndarray,
    y: np.ndarray,
    k: int = 10,
    seed: int = 0,
    collect_models: bool = False,
):
    """Per-fold held-out accuracy; fitting (and scaling) never sees the held fold.

    Returns the k accuracies in fold order, or (accuracies, models) when
    ``collect_models`` is set. Fold model seeds are substreams of ``seed``.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=int)
    assignment = stratified_kfold(y, k, seed)
    fold_seeds = [int(s.generate_state(1, np.uint64)[0]) for s in np.random.SeedSequence(seed).spawn(k)]
    accuracies = []
    models = []
    for fold in range(k):
        held = assignment.fold_index == fold
        X_train, y_train = X[~held], y[~held]
        X_test, y_test = X[held], y[held]
        if spec.standardize:
            scaler = Standardizer().fit(X_train)
            X_train = scaler.transform(X_train)
            X_test = scaler.transform(X_test)
        model = fit(spec, X_train, y_train, fold_seeds[fold])
        predictions = model.predict(X_test)
        accuracies.append(float((predictions == y_test).mean()))
        if collect_models:
            models.append(model)
    result = np.asarray(accuracies)
    return (result, models) if collect_models else result


def summarize(
    fold_accuracies,
    n_ref: int,
    model: str = "model",
    ci_method: str = "binomial",
) -> EvaluationReport:
    """Aggregate fold accuracies into the reference table's statistics.

    The default confidence half-width is the 95% binomial proportion bound
    1.96 * sqrt(p(1-p)/n_ref) around the mean accuracy; ``ci_method="fold"``
    uses 1.96 * std_error instead.
    """
    accs = np.asarray(fold_accuracies, dtype=float)
    if accs.size < 2:
        raise ValueError("need at least 2 fold accuracies")
    if ci_method not in ("binomial", "fold"):
        raise ValueError(f"ci_method must be binomial or fold, got {ci_method!r}")
    mean = float(accs.mean())
    std = float(accs.std(ddof=1))
    se = std / math.sqrt(accs.size)
    if ci_method == "binomial":
        if n_ref < 1:
            raise ValueError(f"n_ref must be >= 1, got {n_ref}")
        ci = Z_95 * math.sqrt(mean * (1.0 - mean) / n_ref)
    else:
        ci = Z_95 * se
    return EvaluationReport(
        model=model,
        fold_accuracies=tuple(float(a) for a in accs),
        mean_accuracy=mean,
        std_dev=std,
        std_error=se,
        ci_halfwidth=ci,
        ci_method=ci_method,
        n_ref=n_ref,
    )


def format_percent(x: float, decimals: int) -> str:
    """Percentage string rounded half-up to ``decimals`` places."""
    q = Decimal(1).scaleb(-decimals) if decimals > 0 else Decimal(1)
    return f"{Decimal(repr(x * 100)).quantize(q, rounding=ROUND_HALF_UP)}%"


def emit_report(reports: list[EvaluationReport], fmt: str = "markdown") -> str:
    """Render reports as a markdown table or JSON; byte-deterministic."""
    if not reports:
        raise ValueError("need at least one report")
    if fmt == "json":
        return json.dumps({"reports": [r.to_dict() for r in reports]}, indent=2) + "\n"
    if fmt != "markdown":
        raise ValueError(f"unknown format {fmt!r}")
    lines = [
        "| Model | Mean Accuracy ± CI | Std. Dev. | Std. Error |",
        "| --- | --- | --- | --- |",
    ]
    for r in reports:
        lines.append(
            f"| {r.model.upper()} | {format_percent(r.mean_accuracy, 1)} ± "
            f"{format_percent(r.ci_halfwidth, 2)} | {format_percent(r.std_dev, 2)} | "
            f"{format_percent(r.std_error, 2)} |"
        )
    return "\n".join(lines) + "\n"
