"""Pre-match outcome prediction for five-versus-five ranked matches.

The pipeline turns per-player champion-experience numbers into team-level
feature vectors, trains five classifier families on them, and scores the
result with stratified cross-validation. A synthetic latent-skill generator
with a computable accuracy ceiling makes the whole chain testable offline.
"""

__version__ = "0.1.0"

from prematch.dataset import Dataset, MatchRecord, PlayerChampionRecord

__all__ = ["Dataset", "MatchRecord", "PlayerChampionRecord", "__version__"]
