"""Core domain types: player-champion records, matches, datasets, CSV I/O.

All types are immutable after construction and deliberately permissive:
invalid values are reported by :func:`validate_match` as data, not raised
at construction time.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable

import numpy as np

PROVENANCES = ("ingested", "synthetic", "file")

#: Column header of the match CSV format, in exact order. p1-p5 are the
#: first-listed team (team_a), p6-p10 the second (team_b).
CSV_PLAYER_FIELDS = ("winrate", "mastery", "season_games", "recent_games")
CSV_HEADER = ["match_id", "outcome"] + [
    f"p{i}_{field}" for i in range(1, 11) for field in CSV_PLAYER_FIELDS
]


@dataclass(frozen=True)
class PlayerChampionRecord:
    """One player's experience on the champion they locked for this match.

    ``win_rate`` is the season ranked victory ratio on the champion; when the
    player has zero season games it is imputed as 0.5 and flagged.
    """

    mastery_points: int
    win_rate: float
    season_games: int
    recent_games: int
    win_rate_imputed: bool = False


@dataclass(frozen=True)
class MatchRecord:
    """Two teams of five players plus the outcome (1 = team_a won)."""

    match_id: str
    team_a: tuple[PlayerChampionRecord, ...]
    team_b: tuple[PlayerChampionRecord, ...]
    outcome: int


@dataclass(frozen=True)
class Dataset:
    """An ordered collection of matches with provenance metadata."""

    matches: tuple[MatchRecord, ...]
    provenance: str
    seed: int | None = None

    def __post_init__(self) -> None:
        if self.provenance not in PROVENANCES:
            raise ValueError(f"provenance must be one of {PROVENANCES}, got {self.provenance!r}")

    def __len__(self) -> int:
        return len(self.matches)


def _validate_player(p: PlayerChampionRecord, where: str) -> list[str]:
    out = []
    if not isinstance(p.mastery_points, int) or isinstance(p.mastery_points, bool):
        out.append(f"{where}.mastery_points: expected integer, got {p.mastery_points!r}")
    elif p.mastery_points < 0:
        out.append(f"{where}.mastery_points: {p.mastery_points} is negative")
    if not isinstance(p.win_rate, float) or not math.isfinite(p.win_rate):
        out.append(f"{where}.win_rate: expected finite float, got {p.win_rate!r}")
    elif not 0.0 <= p.win_rate <= 1.0:
        out.append(f"{where}.win_rate out of [0,1]: {p.win_rate}")
    if not isinstance(p.season_games, int) or isinstance(p.season_games, bool):
        out.append(f"{where}.season_games: expected integer, got {p.season_games!r}")
    elif p.season_games < 0:
        out.append(f"{where}.season_games: {p.season_games} is negative")
    if not isinstance(p.recent_games, int) or isinstance(p.recent_games, bool):
        out.append(f"{where}.recent_games: expected integer, got {p.recent_games!r}")
    elif not 0 <= p.recent_games <= 20:
        out.append(f"{where}.recent_games out of [0,20]: {p.recent_games}")
    if p.win_rate_imputed and isinstance(p.season_games, int) and p.season_games != 0:
        out.append(f"{where}.win_rate_imputed: set but season_games = {p.season_games}")
    return out


def validate_match(m: MatchRecord) -> list[str]:
    """Return every invariant violation in ``m``; empty list means valid."""
    violations = []
    if not m.match_id:
        violations.append("match_id: empty")
    for name, team in (("team_a", m.team_a), ("team_b", m.team_b)):
        if len(team) != 5:
            violations.append(f"{name}: expected 5 players, got {len(team)}")
        for i, player in enumerate(team):
            violations.extend(_validate_player(player, f"{name}[{i}]"))
    if m.outcome not in (0, 1):
        violations.append(f"outcome: expected 0 or 1, got {m.outcome!r}")
    return violations


def dedup(d: Dataset) -> Dataset:
    """Drop matches whose match_id was already seen, keeping first occurrences."""
    seen: set[str] = set()
    kept = []
    for m in d.matches:
        if m.match_id in seen:
            continue
        seen.add(m.match_id)
        kept.append(m)
    return replace(d, matches=tuple(kept))


def split_train_test(d: Dataset, test_fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    """Partition ``d`` into (train, test) with |test| = round-half-up(fraction * n).

    The selection is a seeded uniform permutation; each part keeps the input
    match order.
    """
    if len(d.matches) == 0:
        raise ValueError("empty dataset")
    if len(d.matches) < 2:
        raise ValueError("dataset too small to split: need at least 2 matches")
    if not 0.0 < test_fraction < 1.0:
        raise ValueError(f"test_fraction must be in (0, 1), got {test_fraction}")
    n = len(d.matches)
    n_test = int(math.floor(test_fraction * n + 0.5))
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    test_idx = set(perm[:n_test].tolist())
    train = tuple(m for i, m in enumerate(d.matches) if i not in test_idx)
    test = tuple(m for i, m in enumerate(d.matches) if i in test_idx)
    return replace(d, matches=train), replace(d, matches=test)


def _format_winrate(x: float) -> str:
    # repr gives the shortest string that round-trips the float exactly
    return repr(float(x))


def write_csv(d: Dataset, path: str | Path) -> None:
    """Write the dataset in the canonical match CSV format (see CSV_HEADER)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for m in d.matches:
            row: list[str] = [m.match_id, str(m.outcome)]
            for p in m.team_a + m.team_b:
                row.extend(
                    [
                        _format_winrate(p.win_rate),
                        str(p.mastery_points),
                        str(p.season_games),
                        str(p.recent_games),
                    ]
                )
            writer.writerow(row)


def read_csv(path: str | Path) -> Dataset:
    """Read a match CSV written by :func:`write_csv` (header mandatory).

    Players with season_games = 0 get win_rate_imputed = True; the flag is
    not stored in the file.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file, expected header {CSV_HEADER[:3]}...") from None
        if header != CSV_HEADER:
            raise ValueError(f"{path}: bad header, expected {CSV_HEADER[:4]}..., got {header[:4]}...")
        matches = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(CSV_HEADER):
                raise ValueError(f"{path}:{lineno}: expected {len(CSV_HEADER)} fields, got {len(row)}")
            try:
                match = _parse_row(row)
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
            matches.append(match)
    return Dataset(matches=tuple(matches), provenance="file")


def _parse_row(row: list[str]) -> MatchRecord:
    match_id = row[0]
    outcome = int(row[1])
    players = []
    for i in range(10):
        base = 2 + 4 * i
        season_games = int(row[base + 2])
        players.append(
            PlayerChampionRecord(
                mastery_points=int(row[base + 1]),
                win_rate=float(row[base]),
                season_games=season_games,
                recent_games=int(row[base + 3]),
                win_rate_imputed=season_games == 0,
            )
        )
    return MatchRecord(
        match_id=match_id,
        team_a=tuple(players[:5]),
        team_b=tuple(players[5:]),
        outcome=outcome,
    )


def wins(matches: Iterable[MatchRecord]) -> int:
    """Number of matches won by the first-listed team."""
    return sum(m.outcome for m in matches)
