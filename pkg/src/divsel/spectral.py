"""Spectral selection: eigendecomposition, subspace sizing, leverage ranking.

The selection kernel is decomposed as ``L = V diag(lambda) V^T``. The
number of concept axes to retain, ``k_optimal``, is the smallest count of
leading eigenvalues whose cumulative share of the total reaches the target
information fraction. Each item's diversity leverage is the squared mass of
its eigenvector row across those top axes; items are ranked by leverage and
the top ``k_optimal`` are flagged as the recommended minimal subset.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ComputationError, InputError
from .scoring import Evidence

PSD_TOL = 1e-8
SYMMETRY_TOL = 1e-9

# Leverage and utility are quantized to this many decimals before ranking so
# that numerically identical items (e.g. exact duplicates, whose scores agree
# only up to eigensolver roundoff) tie deterministically and fall through to
# the item_id tie-break.
RANK_DECIMALS = 12

DEFAULT_INFO = 0.90
SIMULATION_INFO = 0.975


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues sorted descending with column-aligned eigenvectors."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


@dataclass(frozen=True)
class ScoredCandidate:
    """One output row: scores, selection flag, and supporting terms."""

    item_id: str
    relevance: float
    weight_normalized: float
    utility: float
    leverage: float
    selected: bool
    evidence: tuple[Evidence, ...] = ()


@dataclass(frozen=True)
class SelectionResult:
    k_optimal: int
    info_threshold: float
    ranked: tuple[ScoredCandidate, ...]
    explained_curve: np.ndarray = field(repr=False)

    @property
    def selected_ids(self) -> tuple[str, ...]:
        return tuple(c.item_id for c in self.ranked if c.selected)


def eigendecompose(L: np.ndarray) -> EigenDecomposition:
    """Dense symmetric eigendecomposition with PSD validation.

    Eigenvalues below ``-PSD_TOL`` signal a non-PSD kernel upstream and are
    an error; tiny negatives within tolerance are clamped to zero.
    """
    L = np.asarray(L, dtype=np.float64)
    if L.ndim != 2 or L.shape[0] != L.shape[1]:
        raise InputError("kernel must be a square matrix")
    if L.size == 0:
        raise InputError("kernel must be non-empty")
    if np.abs(L - L.T).max() > SYMMETRY_TOL:
        raise InputError("kernel must be symmetric")
    try:
        values, vectors = np.linalg.eigh(L)
    except np.linalg.LinAlgError as exc:
        raise ComputationError(f"eigendecomposition failed to converge: {exc}") from None
    values = values[::-1].copy()
    vectors = vectors[:, ::-1].copy()
    smallest = float(values[-1])
    if smallest < -PSD_TOL:
        raise ComputationError(
            f"kernel is not positive semidefinite (eigenvalue {smallest:.3e})"
        )
    np.clip(values, 0.0, None, out=values)
    return EigenDecomposition(eigenvalues=values, eigenvectors=vectors)


def explained_curve(eigenvalues: np.ndarray) -> np.ndarray:
    """Cumulative explained-variance ratios; nondecreasing, ends at 1."""
    ev = np.asarray(eigenvalues, dtype=np.float64)
    if ev.size == 0:
        raise InputError("empty spectrum")
    if np.any(ev < 0):
        raise InputError("eigenvalues must be nonnegative (clamp first)")
    cum = np.cumsum(ev)
    total = cum[-1]
    if total <= 0:
        raise ComputationError("all-zero spectrum: nothing to explain")
    return cum / total


def k_optimal(eigenvalues: np.ndarray, info: float = DEFAULT_INFO) -> int:
    """Smallest number of leading eigenvalues explaining >= ``info`` of the
    total. Eigenvalues must be nonnegative and sorted descending."""
    if not (0.0 < info <= 1.0):
        raise InputError(f"info must lie in (0, 1], got {info}")
    ev = np.asarray(eigenvalues, dtype=np.float64)
    if ev.size > 1 and np.any(np.diff(ev) > 0):
        raise InputError("eigenvalues must be sorted descending")
    curve = explained_curve(ev)
    return int(np.searchsorted(curve, info, side="left")) + 1


def leverage(eigenvectors: np.ndarray, k: int) -> np.ndarray:
    """Diversity leverage: per row, the squared mass over the first k
    eigenvector columns. Lies in [0, 1] and sums to k across rows."""
    V = np.asarray(eigenvectors, dtype=np.float64)
    if V.ndim != 2:
        raise InputError("eigenvectors must be a 2-D matrix")
    n = V.shape[0]
    if not (1 <= k <= n):
        raise InputError(f"k must lie in [1, {n}], got {k}")
    return np.sum(V[:, :k] ** 2, axis=1)


def _rank_key(lev: float, util: float, item_id: str):
    return (-round(lev, RANK_DECIMALS), -round(util, RANK_DECIMALS), item_id)


def select(
    item_ids: Sequence[str],
    relevance: np.ndarray,
    weight_normalized: np.ndarray,
    utility: np.ndarray,
    L: np.ndarray,
    info: float = DEFAULT_INFO,
    evidence: Sequence[tuple[Evidence, ...]] | None = None,
    select_n: int | None = None,
) -> SelectionResult:
    """Rank all items by diversity leverage and flag the recommended subset.

    Runs the full spectral stage: eigendecompose ``L``, size the subspace at
    the ``info`` threshold, score leverage, then order by (leverage desc,
    utility desc, item_id asc). Exactly ``k_optimal`` items are flagged
    unless ``select_n`` overrides the count; the complete ranking is always
    returned so callers can extend beyond the minimum.
    """
    n = len(item_ids)
    if len(set(item_ids)) != n:
        raise InputError("item_ids must be unique")
    relevance = np.asarray(relevance, dtype=np.float64)
    weight_normalized = np.asarray(weight_normalized, dtype=np.float64)
    utility = np.asarray(utility, dtype=np.float64)
    for name, arr in (
        ("relevance", relevance),
        ("weight_normalized", weight_normalized),
        ("utility", utility),
    ):
        if arr.shape != (n,):
            raise InputError(f"{name} must have one entry per item")
    if evidence is not None and len(evidence) != n:
        raise InputError("evidence must have one entry per item")
    if select_n is not None and not (1 <= select_n <= n):
        raise InputError(f"select_n must lie in [1, {n}], got {select_n}")

    decomposition = eigendecompose(L)
    if decomposition.eigenvalues.shape[0] != n:
        raise InputError("kernel size must match the number of items")
    curve = explained_curve(decomposition.eigenvalues)
    k = k_optimal(decomposition.eigenvalues, info)
    lev = leverage(decomposition.eigenvectors, k)

    order = sorted(
        range(n), key=lambda j: _rank_key(float(lev[j]), float(utility[j]), item_ids[j])
    )
    n_selected = k if select_n is None else select_n
    ranked = tuple(
        ScoredCandidate(
            item_id=item_ids[j],
            relevance=float(relevance[j]),
            weight_normalized=float(weight_normalized[j]),
            utility=float(utility[j]),
            leverage=float(lev[j]),
            selected=position < n_selected,
            evidence=tuple(evidence[j]) if evidence is not None else (),
        )
        for position, j in enumerate(order)
    )
    return SelectionResult(
        k_optimal=k, info_threshold=info, ranked=ranked, explained_curve=curve
    )
