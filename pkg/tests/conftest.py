"""Shared fixtures: small deterministic vocabularies and candidate sets."""

from __future__ import annotations

import numpy as np
import pytest

from divsel import CandidateItem, EmbeddingStore, HistoricalProfile, build_store


@pytest.fixture
def basis_store() -> EmbeddingStore:
    """Six orthogonal unit vectors named t0..t5 (dimension 6)."""
    eye = np.eye(6)
    return build_store((f"t{i}", eye[i]) for i in range(6))


@pytest.fixture
def basis_items(basis_store) -> list[CandidateItem]:
    return [
        CandidateItem(item_id=f"item{i}", mapped_terms=(f"t{i}",)) for i in range(4)
    ]


@pytest.fixture
def exact_profile() -> HistoricalProfile:
    return HistoricalProfile.from_pairs([("t0", 9.0), ("t1", 5.0), ("t2", 2.0)])


def random_store(rng: np.random.Generator, n_terms: int, dimension: int) -> EmbeddingStore:
    vectors = rng.standard_normal((n_terms, dimension))
    return build_store((f"r{i:03d}", vectors[i]) for i in range(n_terms))
