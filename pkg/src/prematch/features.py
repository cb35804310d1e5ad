"""Team-experience feature engineering.

A match becomes a 44-column row: ten (win_rate, mastery) player pairs
followed by twelve summary statistics per team. Correlation screening and
per-fold standardization live here too.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import stats as sps

from prematch.dataset import Dataset, MatchRecord, validate_match

N_FEATURES = 44

#: Statistic order of the twelve aggregate columns per team.
AGG_STATS = ("mean", "median", "std", "variance", "skewness", "excess_kurtosis")

# Column indices of the two team-average win rates inside the 44-column layout.
TEAM_A_WINRATE_MEAN = 20
TEAM_B_WINRATE_MEAN = 32


@dataclass(frozen=True)
class StatSummary:
    """Population summary statistics of a five-player sample."""

    mean: float
    median: float
    variance: float
    std_dev: float
    skewness: float
    excess_kurtosis: float

    def feature_row(self) -> tuple[float, ...]:
        """Values in the aggregate-column order (see AGG_STATS)."""
        return (self.mean, self.median, self.std_dev, self.variance,
                self.skewness, self.excess_kurtosis)


@dataclass(frozen=True)
class FeatureVector:
    values: tuple[float, ...]
    outcome: int

    def __post_init__(self) -> None:
        if len(self.values) != N_FEATURES:
            raise ValueError(f"expected {N_FEATURES} values, got {len(self.values)}")


@dataclass(frozen=True)
class FeatureScreen:
    """Screening result for one raw per-player feature."""

    r: float
    p_value: float
    selected: bool


@dataclass(frozen=True)
class ScreeningReport:
    alpha: float
    n_points: int
    features: dict[str, FeatureScreen]


def summary_stats(values) -> StatSummary:
    """Population moments of a 5-value team sample.

    Uses central moments m_k = mean((x - mean)^k): variance = m2,
    skewness = m3 / m2^1.5, excess kurtosis = m4 / m2^2 - 3. A zero-variance
    sample gets skewness = excess_kurtosis = 0 instead of NaN.
    """
    x = np.asarray(values, dtype=float)
    if x.shape != (5,):
        raise ValueError(f"expected exactly 5 values, got shape {x.shape}")
    mean = float(x.mean())
    median = float(np.sort(x)[2])
    centered = x - mean
    m2 = float(np.mean(centered**2))
    m3 = float(np.mean(centered**3))
    m4 = float(np.mean(centered**4))
    if m2 == 0.0:
        skew = 0.0
        exkurt = 0.0
    else:
        skew = m3 / m2**1.5
        exkurt = m4 / m2**2 - 3.0
    return StatSummary(
        mean=mean,
        median=median,
        variance=m2,
        std_dev=math.sqrt(m2),
        skewness=skew,
        excess_kurtosis=exkurt,
    )


def build_feature_vector(m: MatchRecord) -> FeatureVector:
    """Assemble the 44-column row for one match.

    Layout: p1..p10 contribute (win_rate, mastery_points) pairs; then team_a's
    win-rate aggregates, team_a's mastery aggregates, and the same twelve for
    team_b. Raises if the match fails validation.
    """
    violations = validate_match(m)
    if violations:
        raise ValueError("invalid match: " + "; ".join(violations))
    values: list[float] = []
    for p in m.team_a + m.team_b:
        values.append(p.win_rate)
        values.append(float(p.mastery_points))
    for team in (m.team_a, m.team_b):
        winrates = [p.win_rate for p in team]
        masteries = [float(p.mastery_points) for p in team]
        values.extend(summary_stats(winrates).feature_row())
        values.extend(summary_stats(masteries).feature_row())
    return FeatureVector(values=tuple(values), outcome=m.outcome)


def build_feature_matrix(d: Dataset) -> tuple[np.ndarray, np.ndarray]:
    """Featurize every match: returns (X with shape (n, 44), y with shape (n,))."""
    rows = []
    y = []
    for m in d.matches:
        fv = build_feature_vector(m)
        rows.append(fv.values)
        y.append(fv.outcome)
    return np.asarray(rows, dtype=float).reshape(len(rows), N_FEATURES), np.asarray(y, dtype=int)


def feature_names() -> list[str]:
    return [f"f{i:02d}" for i in range(1, N_FEATURES + 1)]


def feature_descriptions() -> dict[str, str]:
    """Human-readable meaning of each feature column."""
    desc = {}
    col = 0
    for i in range(1, 11):
        team = "team_a" if i <= 5 else "team_b"
        desc[f"f{col + 1:02d}"] = f"player {i} ({team}) champion win rate"
        desc[f"f{col + 2:02d}"] = f"player {i} ({team}) champion mastery points"
        col += 2
    for team in ("team_a", "team_b"):
        for metric in ("win rate", "mastery points"):
            for stat in AGG_STATS:
                desc[f"f{col + 1:02d}"] = f"{team} {metric} {stat}"
                col += 1
    return desc


def point_biserial(x, y) -> tuple[float, float]:
    """Pearson correlation of a numeric column with a binary label.

    Returns (r, two-sided p-value from the t distribution with n-2 df).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be one-dimensional with equal length")
    n = x.size
    if n < 3:
        raise ValueError("need at least 3 points")
    if np.all(x == x[0]):
        raise ValueError("undefined correlation: x is constant")
    if np.all(y == y[0]):
        raise ValueError("undefined correlation: y has a single class")
    xc = x - x.mean()
    yc = y - y.mean()
    r = float(np.dot(xc, yc) / math.sqrt(np.dot(xc, xc) * np.dot(yc, yc)))
    r = max(-1.0, min(1.0, r))
    if abs(r) == 1.0:
        return r, 0.0
    t = r * math.sqrt((n - 2) / (1.0 - r * r))
    p = 2.0 * float(sps.t.sf(abs(t), n - 2))
    return r, p


RAW_FEATURES = ("win_rate", "mastery_points", "season_games", "recent_games")


def screen_features(d: Dataset, alpha: float = 0.05) -> ScreeningReport:
    """Correlate each raw per-player feature with the match outcome.

    Player values are pooled across both teams with sign alignment: a team_a
    player is labeled with the outcome, a team_b player with 1 - outcome.
    A feature is selected when its two-sided p-value is below ``alpha``.
    """
    if len(d.matches) < 30:
        raise ValueError(f"need at least 30 matches to screen, got {len(d.matches)}")
    columns: dict[str, list[float]] = {name: [] for name in RAW_FEATURES}
    labels: list[int] = []
    for m in d.matches:
        for team, label in ((m.team_a, m.outcome), (m.team_b, 1 - m.outcome)):
            for p in team:
                columns["win_rate"].append(p.win_rate)
                columns["mastery_points"].append(float(p.mastery_points))
                columns["season_games"].append(float(p.season_games))
                columns["recent_games"].append(float(p.recent_games))
                labels.append(label)
    y = np.asarray(labels, dtype=float)
    screens = {}
    for name in RAW_FEATURES:
        r, p = point_biserial(np.asarray(columns[name]), y)
        screens[name] = FeatureScreen(r=r, p_value=p, selected=p < alpha)
    return ScreeningReport(alpha=alpha, n_points=y.size, features=screens)


def screening_markdown(report: ScreeningReport) -> str:
    lines = [
        "| Feature | r | p-value | Selected |",
        "| --- | --- | --- | --- |",
    ]
    for name, s in report.features.items():
        lines.append(f"| {name} | {s.r:+.4f} | {s.p_value:.3g} | {'yes' if s.selected else 'no'} |")
    return "\n".join(lines) + "\n"


class Standardizer:
    """Per-column z-scoring fit on training rows only.

    Columns with zero spread map to 0 on transform and back to their mean on
    inverse transform.
    """

    def __init__(self) -> None:
        self.mean_: np.ndarray | None = None
        self.std_: np.ndarray | None = None

    def fit(self, X: np.ndarray) -> "Standardizer":
        X = np.asarray(X, dtype=float)
        self.mean_ = X.mean(axis=0)
        self.std_ = X.std(axis=0)
        return self

    def _check(self, X: np.ndarray) -> np.ndarray:
        if self.mean_ is None or self.std_ is None:
            raise RuntimeError("standardizer not fitted")
        X = np.asarray(X, dtype=float)
        if X.shape[1] != self.mean_.size:
            raise ValueError(f"expected {self.mean_.size} columns, got {X.shape[1]}")
        return X

    def transform(self, X: np.ndarray) -> np.ndarray:
        X = self._check(X)
        safe = np.where(self.std_ > 0, self.std_, 1.0)
        out = (X - self.mean_) / safe
        out[:, self.std_ == 0] = 0.0
        return out

    def inverse_transform(self, Z: np.ndarray) -> np.ndarray:
        Z = self._check(Z)
        return Z * self.std_ + self.mean_


def fit_standardizer(X: np.ndarray) -> Standardizer:
    return Standardizer().fit(X)


def write_feature_csv(X: np.ndarray, y: np.ndarray, path: str | Path) -> None:
    """Write features as ``f01..f44,outcome`` rows."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != N_FEATURES:
        raise ValueError(f"expected (n, {N_FEATURES}) matrix, got shape {X.shape}")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(feature_names() + ["outcome"])
        for row, label in zip(X, y):
            writer.writerow([repr(float(v)) for v in row] + [str(int(label))])


def read_feature_csv(path: str | Path) -> tuple[np.ndarray, np.ndarray]:
    """Read a feature CSV written by :func:`write_feature_csv`."""
    expected = feature_names() + ["outcome"]
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != expected:
            raise ValueError(f"{path}: bad header, expected f01..f44,outcome")
        rows = []
        labels = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != N_FEATURES + 1:
                raise ValueError(f"{path}:{lineno}: expected {N_FEATURES + 1} fields, got {len(row)}")
            rows.append([float(v) for v in row[:N_FEATURES]])
            labels.append(int(row[N_FEATURES]))
    return np.asarray(rows, dtype=float).reshape(len(rows), N_FEATURES), np.asarray(labels, dtype=int)
