"""Synthetic match generator with a computable accuracy ceiling.

Each player gets a latent skill s ~ Normal(0, 1). Observed win rate is a Beta
draw centered on sigmoid(s); mastery points are log-normal and positively
correlated with s; the outcome is Bernoulli of a logistic function of the
team skill difference. Because the generative model is known, the accuracy of
the optimal predictor (the one that sees the latent skills) can be estimated
by direct Monte Carlo and used to bound what any trained model can reach.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields

import numpy as np

from prematch.dataset import Dataset, MatchRecord, PlayerChampionRecord

# Mixing weight between latent skill and independent noise inside the
# log-mastery draw; keeps the marginal log-normal while making mastery
# informative about skill.
MASTERY_SKILL_MIX = 0.5

# Defaults are calibrated so that the mean mastery is ~122,368, the mean
# season game count ~58.95, and the optimal-predictor accuracy ~0.75.
DEFAULT_MASTERY_LOG_MEAN = math.log(122368.44) - 1.4**2 / 2
DEFAULT_MASTERY_LOG_STD = 1.4
DEFAULT_GAMES_MEAN = 58.95
DEFAULT_SKILL_WEIGHT = 0.526


@dataclass(frozen=True)
class GenConfig:
    n_matches: int = 5000
    skill_weight: float = DEFAULT_SKILL_WEIGHT
    noise_scale: float = 1.0
    mastery_log_mean: float = DEFAULT_MASTERY_LOG_MEAN
    mastery_log_std: float = DEFAULT_MASTERY_LOG_STD
    games_mean: float = DEFAULT_GAMES_MEAN
    winrate_concentration: float = 100.0

    def __post_init__(self) -> None:
        if self.n_matches < 1:
            raise ValueError(f"n_matches must be >= 1, got {self.n_matches}")
        if self.skill_weight < 0:
            raise ValueError(f"skill_weight must be >= 0, got {self.skill_weight}")
        for name in ("noise_scale", "mastery_log_std", "games_mean", "winrate_concentration"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0, got {getattr(self, name)}")

    @classmethod
    def from_dict(cls, obj: dict) -> "GenConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(obj) - known
        if unknown:
            raise ValueError(f"unknown GenConfig keys: {sorted(unknown)}")
        return cls(**obj)

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass(frozen=True)
class BayesEstimate:
    """Monte-Carlo estimate of the optimal predictor's accuracy."""

    accuracy: float
    std_error: float
    n_samples: int


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _generate_match(cfg: GenConfig, seed: int, index: int) -> MatchRecord:
    # Substream derived from (seed, index): matches can be generated in any
    # order (or in parallel) without changing the output.
    rng = np.random.default_rng([seed, index])
    skills = rng.standard_normal(10)
    mastery_noise = rng.standard_normal(10)
    log_mastery = cfg.mastery_log_mean + cfg.mastery_log_std * (
        MASTERY_SKILL_MIX * skills + math.sqrt(1.0 - MASTERY_SKILL_MIX**2) * mastery_noise
    )
    mastery = np.rint(np.exp(log_mastery)).astype(np.int64)
    # numpy's geometric counts trials >= 1; shift so zero-game seasons occur
    season_games = rng.geometric(1.0 / (cfg.games_mean + 1.0), 10) - 1
    mu = _sigmoid(skills)
    kappa = cfg.winrate_concentration
    win_rates = rng.beta(mu * kappa, (1.0 - mu) * kappa)
    recent_cap = np.minimum(20, season_games)
    recent = rng.integers(0, recent_cap + 1)
    delta = skills[:5].sum() - skills[5:].sum()
    p_win = _sigmoid(np.asarray([cfg.skill_weight * delta / cfg.noise_scale]))[0]
    outcome = int(rng.random() < p_win)

    players = []
    for j in range(10):
        imputed = season_games[j] == 0
        players.append(
            PlayerChampionRecord(
                mastery_points=int(mastery[j]),
                win_rate=0.5 if imputed else float(win_rates[j]),
                season_games=int(season_games[j]),
                recent_games=int(recent[j]),
                win_rate_imputed=bool(imputed),
            )
        )
    return MatchRecord(
        match_id=f"synth-{index:06d}",
        team_a=tuple(players[:5]),
        team_b=tuple(players[5:]),
        outcome=outcome,
    )


def generate_dataset(cfg: GenConfig, seed: int) -> Dataset:
    """Draw ``cfg.n_matches`` matches deterministically from ``seed``."""
    matches = tuple(_generate_match(cfg, seed, i) for i in range(cfg.n_matches))
    return Dataset(matches=matches, provenance="synthetic", seed=seed)


def bayes_accuracy(cfg: GenConfig, n_mc: int, seed: int) -> BayesEstimate:
    """Accuracy of the predictor that knows the latent skills, by Monte Carlo.

    The optimal call on a match with win probability p is right with
    probability max(p, 1 - p); we average that over the team-skill-difference
    distribution (Normal with variance 10).
    """
    if n_mc < 1000:
        raise ValueError(f"n_mc must be >= 1000, got {n_mc}")
    rng = np.random.default_rng(seed)
    delta = rng.normal(0.0, math.sqrt(10.0), n_mc)
    p = _sigmoid(cfg.skill_weight * np.abs(delta) / cfg.noise_scale)
    acc = float(p.mean())
    se = float(p.std(ddof=1) / math.sqrt(n_mc))
    return BayesEstimate(accuracy=acc, std_error=se, n_samples=n_mc)
