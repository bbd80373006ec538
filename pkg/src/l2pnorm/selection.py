"""Row-norm feature ranking and top-k selection."""

from __future__ import annotations

from collections.abc import Iterable
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import DomainError
from .norms import row_l2_norms


@dataclass(frozen=True)
class FeatureRanking:
    """Feature indices sorted by descending score ``||x^i||_2``, ties by
    ascending index."""

    indices: NDArray[np.int64]
    scores: NDArray[np.float64]

    def __len__(self):
        return len(self.indices)

    def __iter__(self):
        return zip(self.indices.tolist(), self.scores.tolist())


def rank_features(X: ArrayLike, bias_row: int | None = None) -> FeatureRanking:
    scores = row_l2_norms(X)
    idx = np.arange(len(scores))
    if bias_row is not None:
        if not 0 <= bias_row < len(scores):
            raise DomainError(f"bias_row {bias_row} out of range")
        keep = idx != bias_row
        idx, scores = idx[keep], scores[keep]
    # lexsort: last key is primary
    order = np.lexsort((idx, -scores))
    return FeatureRanking(indices=idx[order], scores=scores[order])


def select_top_k(ranking: FeatureRanking, k: int) -> list[int]:
    if not 1 <= k <= len(ranking):
        raise DomainError(f"k must lie in [1, {len(ranking)}], got {k}")
    return ranking.indices[:k].tolist()


def support_recovery_rate(selected: Iterable[int], true_support: Iterable[int]) -> float:
    """Fraction of ``true_support`` present in ``selected``."""
    truth = set(true_support)
    if not truth:
        raise DomainError("true support must be non-empty")
    return len(truth & set(selected)) / len(truth)
