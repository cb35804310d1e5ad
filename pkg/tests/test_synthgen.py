from __future__ import annotations

import dataclasses
import math

import numpy as np
import pytest

from prematch.dataset import validate_match, write_csv
from prematch.synthgen import BayesEstimate, GenConfig, bayes_accuracy, generate_dataset


def test_generated_matches_are_valid_and_unique() -> None:
    d = generate_dataset(GenConfig(n_matches=200), seed=3)
    assert len(d.matches) == 200
    assert d.provenance == "synthetic"
    assert d.seed == 3
    ids = [m.match_id for m in d.matches]
    assert len(set(ids)) == 200
    for m in d.matches:
        assert validate_match(m) == []


def test_generated_records_respect_recent_games_cap() -> None:
    d = generate_dataset(GenConfig(n_matches=300), seed=4)
    for m in d.matches:
        for p in m.team_a + m.team_b:
            assert p.recent_games <= min(20, p.season_games)
            if p.season_games == 0:
                assert p.win_rate_imputed
                assert p.win_rate == 0.5
            else:
                assert not p.win_rate_imputed


def test_same_seed_gives_bit_identical_csv(tmp_path) -> None:
    cfg = GenConfig(n_matches=120)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    write_csv(generate_dataset(cfg, seed=9), a)
    write_csv(generate_dataset(cfg, seed=9), b)
    assert a.read_bytes() == b.read_bytes()
    c = tmp_path / "c.csv"
    write_csv(generate_dataset(cfg, seed=10), c)
    assert a.read_bytes() != c.read_bytes()


def test_zero_signal_outcomes_are_fair_coin_flips() -> None:
    d = generate_dataset(GenConfig(n_matches=10_000, skill_weight=0.0), seed=12)
    frac = sum(m.outcome for m in d.matches) / len(d.matches)
    assert 0.48 <= frac <= 0.52


def test_mastery_calibration_hits_reference_mean() -> None:
    # 5000 matches = 50,000 players; sample mean within 10% of 122,368
    d = generate_dataset(GenConfig(n_matches=5000), seed=13)
    values = [p.mastery_points for m in d.matches for p in m.team_a + m.team_b]
    mean = sum(values) / len(values)
    assert abs(mean - 122_368.44) / 122_368.44 < 0.10


def test_season_games_calibration_hits_reference_mean() -> None:
    d = generate_dataset(GenConfig(n_matches=5000), seed=14)
    values = [p.season_games for m in d.matches for p in m.team_a + m.team_b]
    mean = sum(values) / len(values)
    assert abs(mean - 58.95) / 58.95 < 0.10


def test_bayes_accuracy_zero_signal_is_exactly_half() -> None:
    est = bayes_accuracy(GenConfig(skill_weight=0.0), n_mc=10_000, seed=1)
    assert est.accuracy == 0.5
    assert est.std_error == 0.0


def test_bayes_accuracy_saturates_for_huge_signal() -> None:
    est = bayes_accuracy(GenConfig(skill_weight=500.0), n_mc=10_000, seed=1)
    assert est.accuracy > 0.999


def test_bayes_accuracy_is_self_consistent_across_seeds() -> None:
    cfg = GenConfig()
    a = bayes_accuracy(cfg, n_mc=100_000, seed=1)
    b = bayes_accuracy(cfg, n_mc=100_000, seed=2)
    assert abs(a.accuracy - b.accuracy) < 3.0 * math.hypot(a.std_error, b.std_error)


def test_default_calibration_targets_three_quarters() -> None:
    est = bayes_accuracy(GenConfig(), n_mc=100_000, seed=5)
    assert est.accuracy == pytest.approx(0.75, abs=0.01)


def test_bayes_accuracy_monotone_in_skill_weight() -> None:
    estimates: list[BayesEstimate] = []
    for w in (0.0, 0.2, 0.5, 1.0, 2.0, 5.0):
        estimates.append(bayes_accuracy(GenConfig(skill_weight=max(w, 0.0)), n_mc=50_000, seed=31))
    for lo, hi in zip(estimates, estimates[1:]):
        slack = 2.0 * math.hypot(lo.std_error, hi.std_error)
        assert hi.accuracy >= lo.accuracy - slack


def test_label_symmetry_under_team_swap() -> None:
    # swapping teams and flipping the label gives an identically distributed
    # dataset; the win fraction of the swapped set mirrors the original
    d = generate_dataset(GenConfig(n_matches=4000), seed=15)
    frac = sum(m.outcome for m in d.matches) / len(d.matches)
    swapped = [
        dataclasses.replace(m, team_a=m.team_b, team_b=m.team_a, outcome=1 - m.outcome)
        for m in d.matches
    ]
    frac_swapped = sum(m.outcome for m in swapped) / len(swapped)
    assert frac_swapped == pytest.approx(1.0 - frac, abs=1e-12)
    assert abs(frac - 0.5) < 0.03


def test_model_accuracy_matches_on_swapped_teams() -> None:
    # team-swapped, label-flipped data is identically distributed, so a model
    # trained on it should score within a point of the original
    from prematch.evaluation import cross_validate
    from prematch.features import build_feature_matrix
    from prematch.models.base import GboostSpec

    d = generate_dataset(GenConfig(n_matches=800), seed=16)
    swapped = dataclasses.replace(
        d,
        matches=tuple(
            dataclasses.replace(m, team_a=m.team_b, team_b=m.team_a, outcome=1 - m.outcome)
            for m in d.matches
        ),
    )
    X, y = build_feature_matrix(d)
    Xs, ys = build_feature_matrix(swapped)
    base = cross_validate(GboostSpec(), X, y, k=5, seed=2).mean()
    mirrored = cross_validate(GboostSpec(), Xs, ys, k=5, seed=2).mean()
    assert abs(base - mirrored) <= 0.01


def test_bayes_accuracy_requires_minimum_samples() -> None:
    with pytest.raises(ValueError, match="n_mc"):
        bayes_accuracy(GenConfig(), n_mc=10, seed=0)


def test_config_validation_rejects_bad_values() -> None:
    with pytest.raises(ValueError):
        GenConfig(n_matches=0)
    with pytest.raises(ValueError):
        GenConfig(skill_weight=-0.1)
    with pytest.raises(ValueError):
        GenConfig(noise_scale=0.0)
    with pytest.raises(ValueError, match="unknown GenConfig keys"):
        GenConfig.from_dict({"n_matches": 10, "typo_field": 1})
