"""End-to-end selection: scoring, utility, kernel, spectral ranking."""

from __future__ import annotations

from typing import Sequence

from .scoring import (
    CandidateItem,
    HistoricalProfile,
    build_similarity,
    score_candidates,
)
from .spectral import DEFAULT_INFO, SelectionResult, select
from .termspace import EmbeddingStore
from .utility import UtilityParams, build_lkernel, compute_utility


def run_selection(
    store: EmbeddingStore,
    items: Sequence[CandidateItem],
    profile: HistoricalProfile,
    *,
    params: UtilityParams | None = None,
    info: float = DEFAULT_INFO,
    alpha: float = 0.9,
    select_n: int | None = None,
) -> SelectionResult:
    """Score, weight, and spectrally rank a candidate set against a profile."""
    params = params or UtilityParams()
    scores = score_candidates(profile, items, store, alpha=alpha)
    util = compute_utility(scores.relevance, scores.weights, params)
    S = build_similarity(items, store)
    L = build_lkernel(util.u, S)
    return select(
        [item.item_id for item in items],
        scores.relevance,
        util.w_normalized,
        util.u,
        L,
        info=info,
        evidence=scores.evidence,
        select_n=select_n,
    )
