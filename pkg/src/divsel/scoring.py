"""Relevance and importance scoring of candidate items against a profile.

Given a historical profile of observed terms with importance weights, this
module computes:

* ``S``: the candidate-candidate cosine similarity matrix (redundancy),
* ``Q``: the profile-candidate cosine similarity matrix,
* ``R``: per-candidate relevance, the strongest similarity to any profile
  term,
* ``W``: per-candidate propagated importance, the summed weights of profile
  terms whose similarity to that candidate falls in the top band of its
  column.

All operations are pure functions over immutable inputs.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import InputError
from .termspace import EmbeddingStore

DEFAULT_ALPHA = 0.9


@dataclass(frozen=True)
class CandidateItem:
    """A selectable item mapped to one or more vocabulary terms."""

    item_id: str
    mapped_terms: tuple[str, ...]
    category: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "item_id", self.item_id.strip())
        object.__setattr__(
            self, "mapped_terms", tuple(t.strip() for t in self.mapped_terms)
        )
        if not self.item_id:
            raise InputError("candidate item_id must be non-empty")
        if not self.mapped_terms or any(not t for t in self.mapped_terms):
            raise InputError(
                f"candidate {self.item_id!r} must map to at least one non-empty term"
            )


@dataclass(frozen=True)
class HistoricalProfile:
    """Observed terms with nonnegative importance weights.

    Duplicate terms are merged at construction by summing their weights
    (incidence tables often repeat a term across severity grades). A missing
    weight defaults to 1, i.e. uniform importance.
    """

    terms: tuple[str, ...]
    weights: np.ndarray = field(repr=False)

    def __post_init__(self):
        if len(self.terms) == 0:
            raise InputError("profile must contain at least one term")
        w = np.asarray(self.weights, dtype=np.float64)
        if w.shape != (len(self.terms),):
            raise InputError("profile weights must align with terms")
        if not np.all(np.isfinite(w)):
            raise InputError("profile weights must be finite")
        if np.any(w < 0):
            raise InputError("profile weights must be nonnegative")
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[str, float | None]]) -> "HistoricalProfile":
        """Build a profile from (term, weight) pairs, merging duplicates."""
        order: list[str] = []
        totals: dict[str, float] = {}
        for term, weight in pairs:
            term = term.strip()
            if not term:
                raise InputError("profile term must be non-empty")
            w = 1.0 if weight is None else float(weight)
            if term in totals:
                totals[term] += w
            else:
                order.append(term)
                totals[term] = w
        return cls(terms=tuple(order), weights=np.array([totals[t] for t in order]))

    def __len__(self) -> int:
        return len(self.terms)


@dataclass(frozen=True)
class Evidence:
    """A profile term that contributed weight to a candidate."""

    term: str
    similarity: float
    weight: float


@dataclass(frozen=True)
class RelevanceWeights:
    """Per-candidate relevance, propagated weight, and supporting terms."""

    relevance: np.ndarray
    weights: np.ndarray
    evidence: tuple[tuple[Evidence, ...], ...]


def check_unique_items(items: Sequence[CandidateItem]) -> None:
    seen: set[str] = set()
    for item in items:
        if item.item_id in seen:
            raise InputError(f"duplicate candidate item_id {item.item_id!r}")
        seen.add(item.item_id)


def item_embedding(item: CandidateItem, store: EmbeddingStore) -> np.ndarray:
    """Embed a candidate item.

    A single mapped term yields that term's embedding unchanged; multiple
    terms yield the renormalized component-wise mean. Antipodal mappings
    whose mean vanishes are rejected.
    """
    vectors = store.matrix(item.mapped_terms)
    if vectors.shape[0] == 1:
        return vectors[0]
    mean = vectors.mean(axis=0)
    norm = float(np.linalg.norm(mean))
    if norm < 1e-12:
        raise InputError(
            f"candidate {item.item_id!r}: mapped terms cancel out (zero-norm mean)"
        )
    return mean / norm


def _item_matrix(items: Sequence[CandidateItem], store: EmbeddingStore) -> np.ndarray:
    if not items:
        raise InputError("candidate set must contain at least one item")
    return np.stack([item_embedding(item, store) for item in items])


def build_similarity(items: Sequence[CandidateItem], store: EmbeddingStore) -> np.ndarray:
    """Candidate-candidate similarity ``S``: the Gram matrix of item
    embeddings. Symmetric with unit diagonal (up to roundoff)."""
    check_unique_items(items)
    emb = _item_matrix(items, store)
    return emb @ emb.T


def build_cross_similarity(
    profile: HistoricalProfile,
    items: Sequence[CandidateItem],
    store: EmbeddingStore,
) -> np.ndarray:
    """Profile-candidate similarity ``Q``, shape (n_profile, n_items).

    ``Q[i, j]`` is the cosine between profile term i and candidate j's item
    embedding. Unresolvable profile terms raise with the full missing list.
    """
    trial = store.matrix(profile.terms)
    emb = _item_matrix(items, store)
    return trial @ emb.T


def best_term_similarity(
    profile: HistoricalProfile,
    items: Sequence[CandidateItem],
    store: EmbeddingStore,
) -> np.ndarray:
    """Like ``build_cross_similarity`` but scored against each mapped term.

    Entry (i, j) is the maximum cosine between profile term i and any of
    candidate j's mapped terms, so a multi-term candidate is matched if any
    one of its terms matches; the mean embedding would dilute an exact
    match. Identical to ``Q`` for single-term candidates.
    """
    trial = store.matrix(profile.terms)
    if not items:
        raise InputError("candidate set must contain at least one item")
    columns = []
    for item in items:
        vectors = store.matrix(item.mapped_terms)
        columns.append((trial @ vectors.T).max(axis=1))
    return np.column_stack(columns)


def relevance(Q: np.ndarray) -> np.ndarray:
    """Per-candidate relevance: the column-wise maximum of ``Q``."""
    Q = np.asarray(Q, dtype=np.float64)
    if Q.ndim != 2 or Q.size == 0:
        raise InputError("Q must be a non-empty 2-D matrix")
    return Q.max(axis=0)


def propagate_weights(
    Q: np.ndarray,
    profile: HistoricalProfile,
    alpha: float = DEFAULT_ALPHA,
) -> tuple[np.ndarray, tuple[tuple[Evidence, ...], ...]]:
    """Propagate profile weights to candidates through similarity bands.

    For candidate j, sum the weights of all profile terms i with
    ``Q[i, j] > alpha * max_i(Q[i, j])``. Rows attaining the column maximum
    are always included even though the inequality is strict, so the
    best-matching term always contributes its weight. Returns the weight
    vector and, per candidate, the contributing (term, similarity, weight)
    evidence sorted by similarity descending.
    """
    if not (0.0 < alpha <= 1.0):
        raise InputError(f"alpha must lie in (0, 1], got {alpha}")
    Q = np.asarray(Q, dtype=np.float64)
    if Q.ndim != 2 or Q.shape[0] != len(profile):
        raise InputError("Q rows must align with profile entries")
    n_items = Q.shape[1]
    weights = np.zeros(n_items)
    evidence: list[tuple[Evidence, ...]] = []
    for j in range(n_items):
        column = Q[:, j]
        cmax = column.max()
        included = (column > alpha * cmax) | (column >= cmax)
        idx = np.flatnonzero(included)
        weights[j] = float(profile.weights[idx].sum())
        entries = [
            Evidence(
                term=profile.terms[i],
                similarity=float(column[i]),
                weight=float(profile.weights[i]),
            )
            for i in idx
        ]
        entries.sort(key=lambda e: (-e.similarity, -e.weight, e.term))
        evidence.append(tuple(entries))
    return weights, tuple(evidence)


def load_candidates_csv(path: str | os.PathLike) -> list[CandidateItem]:
    """Read candidates from CSV rows ``item_id,category,term_1[;term_2...]``.

    The category field may be empty; multiple mapped terms are separated by
    ``;``. Blank lines and ``#`` comments are skipped.
    """
    items: list[CandidateItem] = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or (row[0].lstrip().startswith("#")) or not any(f.strip() for f in row):
                continue
            if len(row) != 3:
                raise InputError(
                    f"{path}:{lineno}: expected 3 fields (item_id,category,terms), got {len(row)}"
                )
            item_id, category, terms = row
            try:
                items.append(
                    CandidateItem(
                        item_id=item_id,
                        category=category.strip() or None,
                        mapped_terms=tuple(t for t in terms.split(";")),
                    )
                )
            except InputError as exc:
                raise InputError(f"{path}:{lineno}: {exc}") from None
    if not items:
        raise InputError(f"{path}: no candidate items found")
    try:
        check_unique_items(items)
    except InputError as exc:
        raise InputError(f"{path}: {exc}") from None
    return items


def load_profile_csv(path: str | os.PathLike) -> HistoricalProfile:
    """Read a profile from CSV rows ``term,weight``; a blank or missing
    weight defaults to 1."""
    pairs: list[tuple[str, float | None]] = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or row[0].lstrip().startswith("#") or not any(f.strip() for f in row):
                continue
            if len(row) > 2:
                raise InputError(f"{path}:{lineno}: expected at most 2 fields (term,weight)")
            term = row[0]
            weight: float | None = None
            if len(row) == 2 and row[1].strip():
                try:
                    weight = float(row[1])
                except ValueError:
                    raise InputError(
                        f"{path}:{lineno}: weight {row[1]!r} is not a number"
                    ) from None
                if weight < 0:
                    raise InputError(f"{path}:{lineno}: weight must be nonnegative")
            pairs.append((term, weight))
    if not pairs:
        raise InputError(f"{path}: no profile terms found")
    try:
        return HistoricalProfile.from_pairs(pairs)
    except InputError as exc:
        raise InputError(f"{path}: {exc}") from None


def score_candidates(
    profile: HistoricalProfile,
    items: Sequence[CandidateItem],
    store: EmbeddingStore,
    alpha: float = DEFAULT_ALPHA,
) -> RelevanceWeights:
    """Full scoring pass: relevance and propagated weights with evidence.

    Relevance and weight propagation both use the per-mapped-term maximum
    similarity, so exact matches score 1 and carry their full weight.
    """
    check_unique_items(items)
    Q = best_term_similarity(profile, items, store)
    R = relevance(Q)
    W, evidence = propagate_weights(Q, profile, alpha=alpha)
    return RelevanceWeights(relevance=R, weights=W, evidence=evidence)
