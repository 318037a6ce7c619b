"""Embedded vocabulary store: loading, validation, synthetic generation.

Every vector is renormalized to unit Euclidean length on ingestion, so a
plain dot product is a cosine similarity everywhere downstream. Stores are
immutable after construction and safe to share across threads.

Two interchange formats are supported:

* TSV: one row per term, ``term<TAB>v1<TAB>...<TAB>vD``; lines starting
  with ``#`` are skipped.
* JSON: ``{"dimension": D, "terms": {"<id>": [v1, ..., vD], ...}}``.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .errors import InputError, UnknownTermError

UNIT_NORM_TOL = 1e-9


@dataclass(frozen=True)
class EmbeddingStore:
    """Immutable map from term id to a unit-norm embedding vector."""

    dimension: int
    _vectors: Mapping[str, np.ndarray] = field(repr=False)

    def __len__(self) -> int:
        return len(self._vectors)

    def __contains__(self, term: str) -> bool:
        return term in self._vectors

    def __iter__(self) -> Iterator[str]:
        return iter(self._vectors)

    def terms(self) -> list[str]:
        """Term ids in insertion order."""
        return list(self._vectors)

    def vector(self, term: str) -> np.ndarray:
        """Unit embedding for ``term``; absent terms are a reported error."""
        try:
            return self._vectors[term]
        except KeyError:
            raise UnknownTermError([term]) from None

    def matrix(self, terms: Sequence[str]) -> np.ndarray:
        """Stack embeddings for ``terms`` row-wise, in the given order.

        Raises ``UnknownTermError`` listing every missing term, not just
        the first.
        """
        missing = [t for t in terms if t not in self._vectors]
        if missing:
            raise UnknownTermError(missing)
        if not terms:
            return np.empty((0, self.dimension))
        return np.stack([self._vectors[t] for t in terms])


def build_store(entries: Iterable[tuple[str, np.ndarray]]) -> EmbeddingStore:
    """Validate and normalize raw (term, vector) pairs into a store.

    Term ids are stripped of surrounding whitespace and must be unique and
    non-empty. All vectors must share one dimension, contain only finite
    components, and have nonzero norm; each is renormalized to unit length.
    """
    vectors: dict[str, np.ndarray] = {}
    dimension: int | None = None
    for term, vec in entries:
        term = term.strip()
        if not term:
            raise InputError("empty term id")
        if term in vectors:
            raise InputError(f"duplicate term {term!r}")
        v = np.asarray(vec, dtype=np.float64)
        if v.ndim != 1:
            raise InputError(f"term {term!r}: embedding must be a flat vector")
        if dimension is None:
            dimension = int(v.shape[0])
            if dimension < 1:
                raise InputError(f"term {term!r}: empty embedding vector")
        elif v.shape[0] != dimension:
            raise InputError(
                f"term {term!r}: dimension {v.shape[0]} does not match "
                f"store dimension {dimension}"
            )
        if not np.all(np.isfinite(v)):
            raise InputError(f"term {term!r}: non-finite component")
        norm = float(np.linalg.norm(v))
        if norm == 0.0:
            raise InputError(f"term {term!r}: zero-norm vector")
        u = v / norm
        u.flags.writeable = False
        vectors[term] = u
    if not vectors:
        raise InputError("embedding source contains no entries")
    assert dimension is not None
    return EmbeddingStore(dimension=dimension, _vectors=vectors)


# ----------------------------------------------------------------------
# File I/O
# ----------------------------------------------------------------------


def load_tsv(path: str | os.PathLike) -> EmbeddingStore:
    """Load a TSV embedding file. Errors name the offending line and term."""
    entries: list[tuple[str, np.ndarray]] = []
    seen: set[str] = set()
    dimension: int | None = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) < 2:
                raise InputError(f"{path}:{lineno}: expected term and vector components")
            term = parts[0].strip()
            if not term:
                raise InputError(f"{path}:{lineno}: empty term id")
            if term in seen:
                raise InputError(f"{path}:{lineno}: duplicate term {term!r}")
            seen.add(term)
            try:
                vec = np.array([float(p) for p in parts[1:]], dtype=np.float64)
            except ValueError as exc:
                raise InputError(f"{path}:{lineno}: term {term!r}: {exc}") from None
            if dimension is None:
                dimension = vec.shape[0]
            elif vec.shape[0] != dimension:
                raise InputError(
                    f"{path}:{lineno}: term {term!r}: dimension {vec.shape[0]} "
                    f"does not match earlier rows ({dimension})"
                )
            if not np.all(np.isfinite(vec)):
                raise InputError(f"{path}:{lineno}: term {term!r}: non-finite component")
            if float(np.linalg.norm(vec)) == 0.0:
                raise InputError(f"{path}:{lineno}: term {term!r}: zero-norm vector")
            entries.append((term, vec))
    try:
        return build_store(entries)
    except InputError as exc:
        raise InputError(f"{path}: {exc}") from None


def load_json(path: str | os.PathLike) -> EmbeddingStore:
    """Load a JSON embedding file of the documented schema."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InputError(f"{path}: invalid JSON: {exc}") from None
    if not isinstance(doc, dict) or "terms" not in doc:
        raise InputError(f"{path}: expected an object with a 'terms' mapping")
    terms = doc["terms"]
    if not isinstance(terms, dict):
        raise InputError(f"{path}: 'terms' must map ids to vectors")
    declared = doc.get("dimension")
    entries = []
    for term, vec in terms.items():
        if not isinstance(vec, list):
            raise InputError(f"{path}: term {term!r}: vector must be a list")
        entries.append((term, np.asarray(vec, dtype=np.float64)))
    try:
        store = build_store(entries)
    except InputError as exc:
        raise InputError(f"{path}: {exc}") from None
    if declared is not None and int(declared) != store.dimension:
        raise InputError(
            f"{path}: declared dimension {declared} does not match vectors "
            f"({store.dimension})"
        )
    return store


def load_store(path: str | os.PathLike, fmt: str | None = None) -> EmbeddingStore:
    """Load an embedding file; format inferred from the suffix unless given."""
    fmt = fmt or _infer_format(path)
    if fmt == "tsv":
        return load_tsv(path)
    if fmt == "json":
        return load_json(path)
    raise InputError(f"unsupported embedding format {fmt!r} (expected tsv or json)")


def save_tsv(store: EmbeddingStore, path: str | os.PathLike) -> None:
    """Write a store as TSV. Floats use shortest round-trip representation."""
    with open(path, "w", encoding="utf-8") as fh:
        for term in store.terms():
            vec = store.vector(term)
            fh.write(term + "\t" + "\t".join(repr(float(x)) for x in vec) + "\n")


def save_json(store: EmbeddingStore, path: str | os.PathLike) -> None:
    """Write a store as JSON of the documented schema."""
    doc = {
        "dimension": store.dimension,
        "terms": {t: [float(x) for x in store.vector(t)] for t in store.terms()},
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)
        fh.write("\n")


def save_store(store: EmbeddingStore, path: str | os.PathLike, fmt: str | None = None) -> None:
    fmt = fmt or _infer_format(path)
    if fmt == "tsv":
        save_tsv(store, path)
    elif fmt == "json":
        save_json(store, path)
    else:
        raise InputError(f"unsupported embedding format {fmt!r} (expected tsv or json)")


def _infer_format(path: str | os.PathLike) -> str:
    suffix = os.path.splitext(os.fspath(path))[1].lower()
    if suffix in (".tsv", ".txt"):
        return "tsv"
    if suffix == ".json":
        return "json"
    raise InputError(f"cannot infer embedding format from {path!r}; pass fmt explicitly")


# ----------------------------------------------------------------------
# Synthetic vocabularies
# ----------------------------------------------------------------------


def _random_unit(rng: np.random.Generator, dimension: int) -> np.ndarray:
    """Uniform draw on the unit sphere (normalized Gaussian)."""
    while True:
        v = rng.standard_normal(dimension)
        norm = np.linalg.norm(v)
        if norm > 0:
            return v / norm


def _mean_cosine(sigma: float, dimension: int) -> float:
    """Approximate expected cosine between a unit centroid c and the
    renormalized perturbation c + sigma * g, g ~ N(0, I).

    Splitting g into its component along c (z ~ N(0,1)) and the orthogonal
    remainder (squared norm concentrated at dimension - 1), the cosine is
    (1 + sigma z) / sqrt((1 + sigma z)^2 + sigma^2 (dimension - 1)).
    The expectation over z is evaluated with Gauss-Hermite quadrature.
    """
    if sigma == 0.0:
        return 1.0
    nodes, weights = np.polynomial.hermite_e.hermegauss(101)
    along = 1.0 + sigma * nodes
    cos = along / np.sqrt(along**2 + sigma**2 * (dimension - 1))
    return float(np.sum(weights * cos) / np.sqrt(2.0 * np.pi))


def _solve_sigma(target: float, dimension: int) -> float:
    """Bisection for the perturbation scale whose mean cosine hits target."""
    lo, hi = 0.0, 1.0
    while _mean_cosine(hi, dimension) > target:
        hi *= 2.0
        if hi > 1e8:  # target ~0; practically unreachable for target in (0,1)
            break
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if _mean_cosine(mid, dimension) > target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def synth_vocabulary(
    n_clusters: int,
    terms_per_cluster: int,
    n_noise: int,
    dimension: int,
    intra_cluster_similarity: float,
    seed: int,
) -> tuple[EmbeddingStore, dict[str, list[str]]]:
    """Generate a synthetic embedded vocabulary with planted clusters.

    Each cluster has a centroid drawn uniformly on the unit sphere; members
    are the centroid plus isotropic Gaussian noise, renormalized. The noise
    scale is solved numerically so the expected cosine between a member and
    its centroid is approximately ``intra_cluster_similarity``. Noise terms
    are drawn uniformly on the sphere and belong to no cluster.

    Returns the store and a ground-truth map from cluster id to its member
    term ids. Deterministic in ``seed``: identical arguments give an
    identical store.
    """
    if dimension < 2:
        raise InputError(f"dimension must be >= 2, got {dimension}")
    if not (0.0 < intra_cluster_similarity < 1.0):
        raise InputError(
            f"intra_cluster_similarity must lie in (0, 1), got {intra_cluster_similarity}"
        )
    if n_clusters < 0 or terms_per_cluster < 1 or n_noise < 0:
        raise InputError("cluster and noise counts must be nonnegative")
    if n_clusters * terms_per_cluster + n_noise < 1:
        raise InputError("vocabulary would be empty")

    rng = np.random.default_rng(seed)
    sigma = _solve_sigma(intra_cluster_similarity, dimension)
    entries: list[tuple[str, np.ndarray]] = []
    clusters: dict[str, list[str]] = {}
    for c in range(n_clusters):
        centroid = _random_unit(rng, dimension)
        cluster_id = f"c{c:03d}"
        members: list[str] = []
        for t in range(terms_per_cluster):
            term = f"{cluster_id}_t{t:02d}"
            vec = centroid + sigma * rng.standard_normal(dimension)
            entries.append((term, vec))
            members.append(term)
        clusters[cluster_id] = members
    for i in range(n_noise):
        entries.append((f"noise{i:04d}", _random_unit(rng, dimension)))
    return build_store(entries), clusters
