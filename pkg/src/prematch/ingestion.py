"""Client for a three-endpoint game-statistics API, operable from fixtures.

Endpoints: ``{base}/match/{id}``, ``{base}/mastery/{player}/{champion}``,
``{base}/history/{player}``. Fixture mode reads the same JSON payloads from a
directory (``match_<id>.json``, ``mastery_<player>_<champion>.json``,
``history_<player>.json``), which is how the test suite and the ``--fixtures``
CLI flag drive ingestion without credentials.
"""

from __future__ import annotations

import json
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from prematch.dataset import Dataset, MatchRecord, PlayerChampionRecord, validate_match
from prematch.ratelimit import SlidingWindowLimiter, SystemClock


class IngestionError(Exception):
    """Base class for ingestion failures."""


class NotFound(IngestionError):
    pass


class RateLimited(IngestionError):
    pass


class Malformed(IngestionError):
    """Payload violates the wire schema; message carries the field path."""


class TransportError(IngestionError):
    pass


class SourceExhausted(IngestionError):
    """Raised when the source ran out of unique matches; carries the partial result."""

    def __init__(self, dataset: Dataset, requested: int):
        super().__init__(
            f"source exhausted: collected {len(dataset.matches)} unique matches, wanted {requested}"
        )
        self.dataset = dataset
        self.requested = requested


@dataclass(frozen=True)
class ApiConfig:
    base_url: str = "http://localhost:8080"
    api_key: str = ""
    requests_per_second: float = 20.0
    requests_per_two_minutes: int = 100
    max_retries: int = 3
    max_in_flight: int = 1

    def __post_init__(self) -> None:
        if self.requests_per_second <= 0:
            raise ValueError("requests_per_second must be > 0")
        if self.requests_per_two_minutes <= 0:
            raise ValueError("requests_per_two_minutes must be > 0")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")
        if self.max_in_flight < 1:
            raise ValueError("max_in_flight must be >= 1")

    @classmethod
    def from_dict(cls, obj: dict) -> "ApiConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(obj) - known
        if unknown:
            raise ValueError(f"unknown ApiConfig keys: {sorted(unknown)}")
        return cls(**obj)


@dataclass(frozen=True)
class Participant:
    player_id: str
    champion_id: int
    team: str  # "A" or "B"


@dataclass(frozen=True)
class RawMatchPayload:
    match_id: str
    participants: tuple[Participant, ...]
    winner: str


@dataclass(frozen=True)
class RawMasteryPayload:
    player_id: str
    champion_id: int
    mastery_points: int


@dataclass(frozen=True)
class HistoryEntry:
    champion_id: int
    win: bool


@dataclass(frozen=True)
class RawHistoryPayload:
    """Season-scoped ranked history, most recent entry first."""

    player_id: str
    entries: tuple[HistoryEntry, ...]


def _require(obj: dict, key: str, kind, path: str):
    if key not in obj:
        raise Malformed(f"{path}{key}: missing")
    value = obj[key]
    if kind is int and isinstance(value, bool):
        raise Malformed(f"{path}{key}: expected {kind.__name__}, got bool")
    if not isinstance(value, kind):
        raise Malformed(f"{path}{key}: expected {kind.__name__}, got {type(value).__name__}")
    return value


def parse_match_payload(obj: dict) -> RawMatchPayload:
    match_id = _require(obj, "match_id", str, "")
    raw_parts = _require(obj, "participants", list, "")
    if len(raw_parts) != 10:
        raise Malformed(f"participants: expected 10, got {len(raw_parts)}")
    participants = []
    for i, part in enumerate(raw_parts):
        path = f"participants[{i}]."
        if not isinstance(part, dict):
            raise Malformed(f"participants[{i}]: expected object")
        team = _require(part, "team", str, path)
        if team not in ("A", "B"):
            raise Malformed(f"{path}team: expected A or B, got {team!r}")
        participants.append(
            Participant(
                player_id=_require(part, "player_id", str, path),
                champion_id=_require(part, "champion_id", int, path),
                team=team,
            )
        )
    for team in ("A", "B"):
        count = sum(1 for p in participants if p.team == team)
        if count != 5:
            raise Malformed(f"participants: expected 5 on team {team}, got {count}")
    winner = _require(obj, "winner", str, "")
    if winner not in ("A", "B"):
        raise Malformed(f"winner: expected A or B, got {winner!r}")
    return RawMatchPayload(match_id=match_id, participants=tuple(participants), winner=winner)


def parse_mastery_payload(obj: dict) -> RawMasteryPayload:
    points = _require(obj, "mastery_points", int, "")
    if points < 0:
        raise Malformed(f"mastery_points: {points} is negative")
    return RawMasteryPayload(
        player_id=_require(obj, "player_id", str, ""),
        champion_id=_require(obj, "champion_id", int, ""),
        mastery_points=points,
    )


def parse_history_payload(obj: dict) -> RawHistoryPayload:
    raw_entries = _require(obj, "entries", list, "")
    entries = []
    for i, entry in enumerate(raw_entries):
        path = f"entries[{i}]."
        if not isinstance(entry, dict):
            raise Malformed(f"entries[{i}]: expected object")
        entries.append(
            HistoryEntry(
                champion_id=_require(entry, "champion_id", int, path),
                win=_require(entry, "win", bool, path),
            )
        )
    return RawHistoryPayload(
        player_id=_require(obj, "player_id", str, ""),
        entries=tuple(entries),
    )


class HttpTransport:
    """GET against a real server; auth via the X-Api-Key header."""

    def __init__(self, base_url: str, api_key: str):
        self._base = base_url.rstrip("/")
        self._api_key = api_key

    def get(self, path: str) -> dict:
        import requests

        try:
            resp = requests.get(
                f"{self._base}/{path}", headers={"X-Api-Key": self._api_key}, timeout=30
            )
        except requests.RequestException as exc:
            raise TransportError(f"{path}: {exc}") from exc
        if resp.status_code == 404:
            raise NotFound(path)
        if resp.status_code == 429:
            raise RateLimited(path)
        if resp.status_code != 200:
            raise TransportError(f"{path}: HTTP {resp.status_code}")
        try:
            return resp.json()
        except ValueError as exc:
            raise Malformed(f"{path}: body is not JSON") from exc

    def list_match_ids(self) -> list[str]:
        raise TransportError(
            "random-match sampling requires fixture mode; live player sampling is not supported"
        )


class FixtureTransport:
    """Serves payloads from a directory of JSON files."""

    def __init__(self, directory: str | Path):
        self._dir = Path(directory)
        if not self._dir.is_dir():
            raise TransportError(f"fixture directory not found: {self._dir}")

    def get(self, path: str) -> dict:
        name = path.strip("/").replace("/", "_") + ".json"
        file = self._dir / name
        if not file.exists():
            raise NotFound(path)
        try:
            return json.loads(file.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise Malformed(f"{path}: invalid JSON: {exc}") from exc

    def list_match_ids(self) -> list[str]:
        return sorted(p.stem[len("match_"):] for p in self._dir.glob("match_*.json"))


@dataclass
class ClientStats:
    requests: int = 0
    retries: int = 0


class ApiClient:
    """Rate-limited, retrying access to the three endpoints."""

    BACKOFF_BASE = 0.5  # seconds; doubles per retry

    def __init__(self, cfg: ApiConfig, transport, clock=None):
        self.cfg = cfg
        self.transport = transport
        self.clock = clock if clock is not None else SystemClock()
        self.limiter = SlidingWindowLimiter(
            [(int(cfg.requests_per_second), 1.0), (cfg.requests_per_two_minutes, 120.0)],
            clock=self.clock,
        )
        self.stats = ClientStats()
        self._stats_lock = threading.Lock()

    def _request(self, path: str) -> dict:
        attempt = 0
        while True:
            self.limiter.acquire()
            with self._stats_lock:
                self.stats.requests += 1
            try:
                return self.transport.get(path)
            except RateLimited:
                if attempt >= self.cfg.max_retries:
                    raise
                self.clock.sleep(self.BACKOFF_BASE * 2**attempt)
                attempt += 1
                with self._stats_lock:
                    self.stats.retries += 1

    def fetch_match(self, match_id: str) -> RawMatchPayload:
        if not match_id:
            raise ValueError("match_id must be non-empty")
        return parse_match_payload(self._request(f"match/{match_id}"))

    def fetch_mastery(self, player_id: str, champion_id: int) -> RawMasteryPayload:
        return parse_mastery_payload(self._request(f"mastery/{player_id}/{champion_id}"))

    def fetch_history(self, player_id: str) -> RawHistoryPayload:
        return parse_history_payload(self._request(f"history/{player_id}"))


def build_player_record(
    mastery: RawMasteryPayload, history: RawHistoryPayload, champion_id: int
) -> PlayerChampionRecord:
    """Derive the per-player experience numbers from raw payloads.

    Season games and wins are counted over the full history; recent games over
    its first min(20, len) entries (the history is most-recent-first). A player
    with no season games on the champion gets the imputed 0.5 win rate.
    """
    if mastery.champion_id != champion_id:
        raise Malformed(
            f"champion_id: mastery payload is for champion {mastery.champion_id}, expected {champion_id}"
        )
    on_champion = [e for e in history.entries if e.champion_id == champion_id]
    season_games = len(on_champion)
    recent_window = history.entries[: min(20, len(history.entries))]
    recent_games = sum(1 for e in recent_window if e.champion_id == champion_id)
    if season_games == 0:
        win_rate, imputed = 0.5, True
    else:
        win_rate, imputed = sum(e.win for e in on_champion) / season_games, False
    return PlayerChampionRecord(
        mastery_points=mastery.mastery_points,
        win_rate=win_rate,
        season_games=season_games,
        recent_games=recent_games,
        win_rate_imputed=imputed,
    )


def fetch_match_record(client: ApiClient, match_id: str) -> MatchRecord:
    """Assemble a full MatchRecord: one match payload plus 10 x (mastery, history)."""
    payload = client.fetch_match(match_id)

    def one_player(part: Participant) -> PlayerChampionRecord:
        mastery = client.fetch_mastery(part.player_id, part.champion_id)
        history = client.fetch_history(part.player_id)
        return build_player_record(mastery, history, part.champion_id)

    team_a_parts = [p for p in payload.participants if p.team == "A"]
    team_b_parts = [p for p in payload.participants if p.team == "B"]
    ordered = team_a_parts + team_b_parts
    if client.cfg.max_in_flight > 1:
        with ThreadPoolExecutor(max_workers=client.cfg.max_in_flight) as pool:
            players = list(pool.map(one_player, ordered))
    else:
        players = [one_player(p) for p in ordered]
    record = MatchRecord(
        match_id=payload.match_id,
        team_a=tuple(players[:5]),
        team_b=tuple(players[5:]),
        outcome=1 if payload.winner == "A" else 0,
    )
    violations = validate_match(record)
    if violations:
        raise Malformed("assembled match invalid: " + "; ".join(violations))
    return record


def ingest_random_matches(client: ApiClient, n: int, seed: int) -> Dataset:
    """Collect ``n`` unique matches by seeded random sampling of the source.

    Duplicate draws are skipped and resampled. If the source runs out of
    unique matches first, raises :class:`SourceExhausted` carrying the partial
    dataset. Records come back sorted by match_id.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    available = client.transport.list_match_ids()
    rng = np.random.default_rng(seed)
    records: dict[str, MatchRecord] = {}
    remaining = set(available)
    while len(records) < n:
        if not remaining:
            raise SourceExhausted(_sorted_dataset(records, seed), requested=n)
        candidate = available[int(rng.integers(len(available)))]
        if candidate in records:
            continue  # duplicate draw; resample
        record = fetch_match_record(client, candidate)
        records[record.match_id] = record
        remaining.discard(candidate)
        remaining.discard(record.match_id)
    return _sorted_dataset(records, seed)


def _sorted_dataset(records: dict[str, MatchRecord], seed: int) -> Dataset:
    ordered = tuple(records[k] for k in sorted(records))
    return Dataset(matches=ordered, provenance="ingested", seed=seed)
