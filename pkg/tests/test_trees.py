from __future__ import annotations

import math

import numpy as np
import pytest

from prematch.models.base import GboostSpec, RfSpec, fit
from prematch.models.gboost import log_loss_from_scores
from prematch.models.tree import LEAF, grow_tree
from prematch.synthgen import GenConfig, generate_dataset
from prematch.features import build_feature_matrix


def test_single_unrestricted_tree_memorizes_unique_points() -> None:
    rng = np.random.default_rng(40)
    X = rng.normal(size=(10, 3))
    y = rng.integers(0, 2, 10)
    y[0], y[1] = 0, 1  # both classes present
    spec = RfSpec(n_estimators=1, min_samples_leaf=1, min_samples_split=2, bootstrap=False, max_features=3)
    model = fit(spec, X, y, seed=0)
    assert (model.predict(X) == y).all()


def test_default_forest_leaves_hold_at_least_three_samples() -> None:
    rng = np.random.default_rng(41)
    X = rng.normal(size=(300, 8))
    y = (X[:, 0] + rng.normal(scale=0.8, size=300) > 0).astype(int)
    model = fit(RfSpec(n_estimators=25), X, y, seed=1)
    for tree in model.trees:
        assert tree.leaf_counts().min() >= 3


def test_forest_votes_average_to_probability() -> None:
    rng = np.random.default_rng(42)
    X = rng.normal(size=(200, 5))
    y = (X[:, 0] > 0).astype(int)
    model = fit(RfSpec(n_estimators=20, max_features=3), X, y, seed=2)
    proba = model.predict_proba(X)
    assert ((proba >= 0.0) & (proba <= 1.0)).all()
    scaled = proba * 20
    assert np.allclose(scaled, np.round(scaled))  # multiples of 1/n_trees


def test_oob_accuracy_close_to_cross_validation() -> None:
    from prematch.evaluation import cross_validate

    ds = generate_dataset(GenConfig(n_matches=1000), seed=43)
    X, y = build_feature_matrix(ds)
    spec = RfSpec(n_estimators=120)
    model = fit(spec, X, y, seed=3)
    cv = cross_validate(spec, X, y, k=10, seed=3).mean()
    assert model.oob_score_ == pytest.approx(cv, abs=0.05)


def test_forest_is_deterministic_given_seed() -> None:
    rng = np.random.default_rng(44)
    X = rng.normal(size=(120, 6))
    y = (X[:, 1] > 0).astype(int)
    a = fit(RfSpec(n_estimators=12, max_features=2), X, y, seed=7)
    b = fit(RfSpec(n_estimators=12, max_features=2), X, y, seed=7)
    q = rng.normal(size=(30, 6))
    assert np.array_equal(a.predict_proba(q), b.predict_proba(q))
    c = fit(RfSpec(n_estimators=12, max_features=2), X, y, seed=8)
    assert not np.array_equal(a.predict_proba(q), c.predict_proba(q))


def test_trees_invariant_under_monotone_column_transforms() -> None:
    rng = np.random.default_rng(45)
    n = 150
    X = rng.normal(size=(n, 4))
    assert all(np.unique(X[:, j]).size == n for j in range(4))  # no duplicates
    y = (X[:, 0] + 0.5 * X[:, 2] + rng.normal(scale=0.3, size=n) > 0).astype(int)
    X_test = rng.normal(size=(40, 4))

    transforms = [np.exp, lambda v: v**3, lambda v: np.arctan(v), lambda v: 2.0 * v + 7.0]

    def warp(M: np.ndarray) -> np.ndarray:
        return np.column_stack([transforms[j](M[:, j]) for j in range(4)])

    for spec in (
        RfSpec(n_estimators=15, max_features=2),
        GboostSpec(n_estimators=20),
    ):
        plain = fit(spec, X, y, seed=9)
        warped = fit(spec, warp(X), y, seed=9)
        assert np.array_equal(plain.predict(X_test), warped.predict(warp(X_test))), spec.family


def test_gboost_zero_stages_predicts_base_rate() -> None:
    rng = np.random.default_rng(46)
    X = rng.normal(size=(100, 3))
    y = np.array([1] * 60 + [0] * 40)
    model = fit(GboostSpec(n_estimators=0), X, y, seed=0)
    proba = model.predict_proba(rng.normal(size=(20, 3)))
    assert np.allclose(proba, 0.6)


def test_gboost_training_loss_is_monotone_non_increasing() -> None:
    ds = generate_dataset(GenConfig(n_matches=400), seed=47)
    X, y = build_feature_matrix(ds)
    model = fit(GboostSpec(), X, y, seed=0)
    assert len(model.loss_curve_) == 56  # initial score plus 55 stages
    diffs = np.diff(model.loss_curve_)
    assert diffs.max() <= 1e-12


def test_gboost_loss_curve_matches_recomputation() -> None:
    rng = np.random.default_rng(48)
    X = rng.normal(size=(150, 4))
    y = (X[:, 0] > 0.2).astype(int)
    model = fit(GboostSpec(n_estimators=10), X, y, seed=0)
    scores = np.full(X.shape[0], model.base_score)
    assert model.loss_curve_[0] == pytest.approx(log_loss_from_scores(scores, y.astype(float)))
    for stage, tree in enumerate(model.trees, start=1):
        scores = scores + model.spec.learning_rate * tree.predict_value(X)
        assert model.loss_curve_[stage] == pytest.approx(
            log_loss_from_scores(scores, y.astype(float)), abs=1e-12
        )


def test_gboost_learning_rate_changes_predictions() -> None:
    rng = np.random.default_rng(49)
    X = rng.normal(size=(200, 4))
    y = (X[:, 0] + rng.normal(scale=0.5, size=200) > 0).astype(int)
    full = fit(GboostSpec(learning_rate=0.14), X, y, seed=0)
    half = fit(GboostSpec(learning_rate=0.07), X, y, seed=0)
    q = rng.normal(size=(50, 4))
    assert not np.allclose(full.predict_proba(q), half.predict_proba(q))


def test_gboost_fits_linearly_separable_perfectly(toy_xy) -> None:
    X, y = toy_xy
    model = fit(GboostSpec(), X, y, seed=0)
    assert (model.predict(X) == y).mean() == 1.0


def test_rf_fits_linearly_separable_perfectly(toy_xy) -> None:
    X, y = toy_xy
    model = fit(RfSpec(n_estimators=30, min_samples_leaf=1, min_samples_split=2, max_features=2), X, y, seed=0)
    assert (model.predict(X) == y).mean() == 1.0


def test_grow_tree_tie_breaks_to_lowest_column_then_threshold() -> None:
    # two identical columns: equal gains everywhere, so the split must use
    # column 0; the chosen threshold anchors to the largest left-hand value
    X = np.array([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0], [3.0, 3.0]])
    y = np.array([0.0, 0.0, 1.0, 1.0])
    tree = grow_tree(X, y, criterion="gini")
    assert tree.feature[0] == 0
    assert tree.threshold[0] == 1.0


def test_grow_tree_pure_node_is_leaf() -> None:
    X = np.array([[0.0], [1.0], [2.0]])
    y = np.array([1.0, 1.0, 1.0])
    tree = grow_tree(X, y, criterion="gini")
    assert tree.feature[0] == LEAF
    assert tree.value[0] == 1.0


def test_max_depth_limits_growth() -> None:
    rng = np.random.default_rng(50)
    X = rng.normal(size=(200, 3))
    y = (rng.random(200) > 0.5).astype(float)
    shallow = grow_tree(X, y, criterion="gini", max_depth=2)
    # depth 2 allows at most 4 leaves
    assert shallow.n_leaves() <= 4
