from __future__ import annotations

import numpy as np
import pytest

from prematch.dataset import Dataset, MatchRecord, PlayerChampionRecord


def make_player(
    mastery: int = 5000,
    win_rate: float = 0.5,
    season: int = 10,
    recent: int = 3,
    imputed: bool = False,
) -> PlayerChampionRecord:
    return PlayerChampionRecord(
        mastery_points=mastery,
        win_rate=win_rate,
        season_games=season,
        recent_games=recent,
        win_rate_imputed=imputed,
    )


def make_match(match_id: str = "m1", outcome: int = 1) -> MatchRecord:
    return MatchRecord(
        match_id=match_id,
        team_a=tuple(make_player(win_rate=0.4 + 0.05 * i) for i in range(5)),
        team_b=tuple(make_player(win_rate=0.3 + 0.05 * i) for i in range(5)),
        outcome=outcome,
    )


def random_match(rng: np.random.Generator, match_id: str) -> MatchRecord:
    def player() -> PlayerChampionRecord:
        season = int(rng.integers(0, 120))
        return PlayerChampionRecord(
            mastery_points=int(rng.integers(0, 2_000_000)),
            win_rate=0.5 if season == 0 else float(rng.random()),
            season_games=season,
            recent_games=int(rng.integers(0, min(20, season) + 1)),
            win_rate_imputed=season == 0,
        )

    return MatchRecord(
        match_id=match_id,
        team_a=tuple(player() for _ in range(5)),
        team_b=tuple(player() for _ in range(5)),
        outcome=int(rng.integers(0, 2)),
    )


def random_dataset(rng: np.random.Generator, n: int) -> Dataset:
    return Dataset(
        matches=tuple(random_match(rng, f"r{i:05d}") for i in range(n)),
        provenance="file",
    )


@pytest.fixture(scope="session")
def toy_xy() -> tuple[np.ndarray, np.ndarray]:
    """Linearly separable 20-point set in 2 columns."""
    rng = np.random.default_rng(99)
    X = rng.normal(size=(20, 2))
    y = (X[:, 0] + X[:, 1] > 0).astype(int)
    # nudge points off the boundary so separability is unambiguous
    X[y == 1] += 0.35
    X[y == 0] -= 0.35
    y = (X[:, 0] + X[:, 1] > 0).astype(int)
    return X, y
