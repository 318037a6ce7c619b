"""Monte Carlo recovery harness.

Plants ground-truth items in a synthetic embedded vocabulary, generates
noisy historical profiles, runs the full selection pipeline, and reports
confusion counts (TP/FP/FN), precision, recall, and F1 per run plus
aggregate statistics. A one-item-at-a-time mode measures each candidate's
true-positive incidence rate (TPIR).

Seeding is a splittable counter-based scheme (see ``derive_seed``): every
run's seed is a pure function of the master seed and the run index, so
reports are bit-identical regardless of worker count or execution order.
"""

from __future__ import annotations

import dataclasses
import json
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import InputError
from .pipeline import run_selection
from .scoring import CandidateItem, HistoricalProfile, build_similarity
from .spectral import SIMULATION_INFO
from .termspace import EmbeddingStore, synth_vocabulary
from .utility import UtilityParams

# Study-design bounds the defaults honor; wider ranges need allow_wide_ranges.
SYMPTOM_RANGE_BOUNDS = (5, 40)
AES_RANGE_BOUNDS = (1, 3)
NOISE_RANGE_BOUNDS = (10, 50)

TPIR_DEFAULT_INFO = 0.80

_MASK64 = (1 << 64) - 1

# Stream ids partition the master seed into independent substreams.
STREAM_RUNS = 0
STREAM_VOCAB = 1
STREAM_TPIR = 2


def derive_seed(seed: int, index: int) -> int:
    """Counter-based seed derivation: splitmix64 finalizer over
    ``seed XOR (golden_gamma * (index + offset))``, all mod 2**64.

    Pure and stateless, so independent runs can be seeded in any order or
    in parallel and still reproduce exactly.
    """
    z = (seed ^ ((index + 0x632BE59BD9B4E019) * 0x9E3779B97F4A7C15)) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def run_seed(master_seed: int, run_index: int) -> int:
    """Seed for Monte Carlo run ``run_index``."""
    return derive_seed(derive_seed(master_seed, STREAM_RUNS), run_index)


def _check_range(name: str, value: tuple[int, int], bounds: tuple[int, int],
                 allow_wide: bool, hard_floor: int) -> None:
    lo, hi = value
    if lo > hi:
        raise InputError(f"{name}: empty range {value}")
    if lo < hard_floor:
        raise InputError(f"{name}: lower bound must be >= {hard_floor}, got {lo}")
    if lo < bounds[0] or hi > bounds[1]:
        if not allow_wide:
            raise InputError(
                f"{name}: range {value} outside the study design bounds {bounds}; "
                f"set allow_wide_ranges to override"
            )
        warnings.warn(f"{name}: range {value} is outside the study design bounds {bounds}")


@dataclass(frozen=True)
class SimulationConfig:
    """Vocabulary, trial-generation, and pipeline parameters for one study.

    ``n_symptoms``, ``aes_per_symptom``, and ``n_noise`` are inclusive
    ranges sampled uniformly per run; a fixed value is a degenerate range.
    """

    n_candidates: int = 80
    terms_per_cluster: int = 5
    dimension: int = 256
    intra_cluster_similarity: float = 0.99
    noise_pool_size: int = 500
    n_symptoms: tuple[int, int] = SYMPTOM_RANGE_BOUNDS
    aes_per_symptom: tuple[int, int] = AES_RANGE_BOUNDS
    n_noise: tuple[int, int] = NOISE_RANGE_BOUNDS
    weight_range: tuple[int, int] = (1, 10)
    info: float = SIMULATION_INFO
    alpha: float = 0.9
    utility_params: UtilityParams = field(default_factory=UtilityParams)
    n_runs: int = 1000
    master_seed: int = 0
    n_workers: int = 1
    allow_wide_ranges: bool = False

    def validate(self) -> None:
        if self.n_candidates < 1:
            raise InputError("n_candidates must be positive")
        if self.terms_per_cluster < 1:
            raise InputError("terms_per_cluster must be positive")
        if self.n_runs < 1:
            raise InputError("n_runs must be positive")
        if self.n_workers < 1:
            raise InputError("n_workers must be positive")
        _check_range("n_symptoms", self.n_symptoms, SYMPTOM_RANGE_BOUNDS,
                     self.allow_wide_ranges, hard_floor=1)
        _check_range("aes_per_symptom", self.aes_per_symptom, AES_RANGE_BOUNDS,
                     self.allow_wide_ranges, hard_floor=1)
        _check_range("n_noise", self.n_noise, NOISE_RANGE_BOUNDS,
                     self.allow_wide_ranges, hard_floor=0)
        if self.n_symptoms[1] > self.n_candidates:
            raise InputError(
                f"n_symptoms upper bound {self.n_symptoms[1]} exceeds the "
                f"candidate count {self.n_candidates}"
            )
        if self.aes_per_symptom[1] > self.terms_per_cluster:
            raise InputError(
                f"aes_per_symptom upper bound {self.aes_per_symptom[1]} exceeds "
                f"terms_per_cluster {self.terms_per_cluster}"
            )
        if self.n_noise[1] > self.noise_pool_size:
            raise InputError(
                f"n_noise upper bound {self.n_noise[1]} exceeds the noise pool "
                f"size {self.noise_pool_size}"
            )
        if self.weight_range[0] < 1 or self.weight_range[0] > self.weight_range[1]:
            raise InputError(f"invalid weight_range {self.weight_range}")


@dataclass(frozen=True)
class SimulationWorld:
    """A fixed synthetic universe: vocabulary, candidates, cluster map."""

    store: EmbeddingStore
    candidates: tuple[CandidateItem, ...]
    clusters: Mapping[str, tuple[str, ...]]  # item_id -> cluster member terms
    noise_terms: tuple[str, ...]


def build_world(config: SimulationConfig) -> SimulationWorld:
    """Generate the candidate universe for a config, deterministically.

    One cluster is planted per candidate; each candidate maps to the first
    term of its cluster and its trial AEs are drawn from the full cluster.
    """
    config.validate()
    vocab_seed = derive_seed(derive_seed(config.master_seed, STREAM_VOCAB), 0)
    store, cluster_map = synth_vocabulary(
        n_clusters=config.n_candidates,
        terms_per_cluster=config.terms_per_cluster,
        n_noise=config.noise_pool_size,
        dimension=config.dimension,
        intra_cluster_similarity=config.intra_cluster_similarity,
        seed=vocab_seed,
    )
    candidates = []
    clusters: dict[str, tuple[str, ...]] = {}
    for index, (cluster_id, members) in enumerate(sorted(cluster_map.items())):
        item_id = f"item{index:03d}"
        candidates.append(CandidateItem(item_id=item_id, mapped_terms=(members[0],)))
        clusters[item_id] = tuple(members)
    in_cluster = {t for members in clusters.values() for t in members}
    noise_terms = tuple(t for t in store.terms() if t not in in_cluster)
    return SimulationWorld(
        store=store,
        candidates=tuple(candidates),
        clusters=clusters,
        noise_terms=noise_terms,
    )


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    fn: int
    precision: float
    recall: float
    f1: float


def score_run(selected: frozenset[str] | set[str], truth: frozenset[str] | set[str]) -> ConfusionCounts:
    """Confusion counts of a selection against planted ground truth.

    Zero denominators resolve to 0 (not NaN) so aggregates stay defined:
    an empty selection has precision 0, an empty truth set recall 0.
    """
    selected = frozenset(selected)
    truth = frozenset(truth)
    tp = len(selected & truth)
    fp = len(selected - truth)
    fn = len(truth - selected)
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return ConfusionCounts(tp=tp, fp=fp, fn=fn, precision=precision, recall=recall, f1=f1)


def _draw_profile(
    world: SimulationWorld,
    config: SimulationConfig,
    rng: np.random.Generator,
    truth_indices: Sequence[int],
) -> HistoricalProfile:
    """Emit AE terms for the planted items plus noise terms, with weights."""
    w_lo, w_hi = config.weight_range
    entries: list[tuple[str, float]] = []
    for index in truth_indices:
        item = world.candidates[index]
        members = world.clusters[item.item_id]
        n_aes = int(rng.integers(config.aes_per_symptom[0], config.aes_per_symptom[1] + 1))
        chosen = rng.choice(len(members), size=n_aes, replace=False)
        for t in sorted(chosen):
            entries.append((members[t], float(rng.integers(w_lo, w_hi + 1))))
    n_noise = int(rng.integers(config.n_noise[0], config.n_noise[1] + 1))
    if n_noise:
        chosen = rng.choice(len(world.noise_terms), size=n_noise, replace=False)
        for t in sorted(chosen):
            entries.append((world.noise_terms[t], float(rng.integers(w_lo, w_hi + 1))))
    return HistoricalProfile.from_pairs(entries)


def generate_trial(
    world: SimulationWorld,
    config: SimulationConfig,
    seed: int,
) -> tuple[HistoricalProfile, frozenset[str]]:
    """One simulated trial: planted items' AEs mixed with noise terms.

    Ground-truth items are drawn uniformly without replacement; each emits
    a config-ranged number of AE terms from its own cluster; noise terms
    come from the cluster-free pool. Weights are integer incidence counts
    drawn uniformly from ``weight_range``. Deterministic in ``seed``.
    """
    rng = np.random.default_rng(seed)
    n_symptoms = int(rng.integers(config.n_symptoms[0], config.n_symptoms[1] + 1))
    if n_symptoms > len(world.candidates):
        raise InputError(
            f"n_symptoms {n_symptoms} exceeds candidate count {len(world.candidates)}"
        )
    drawn = rng.choice(len(world.candidates), size=n_symptoms, replace=False)
    truth_indices = sorted(int(i) for i in drawn)
    profile = _draw_profile(world, config, rng, truth_indices)
    truth = frozenset(world.candidates[i].item_id for i in truth_indices)
    return profile, truth


@dataclass(frozen=True)
class RunRecord:
    run_index: int
    seed: int
    n_symptoms: int
    n_profile_terms: int
    k_optimal: int
    n_selected: int
    counts: ConfusionCounts


SUMMARY_METRICS = ("size_simulated", "recall", "precision", "f1")
SUMMARY_STATS = ("mean", "std", "min", "median", "max")


def summarize_runs(runs: Sequence[RunRecord]) -> dict[str, dict[str, float]]:
    """Aggregate mean/std/min/median/max per metric over run records.

    Std is the population standard deviation (ddof=0) so a single run
    reports 0. Records are sorted by run index first, making the result
    independent of execution order.
    """
    ordered = sorted(runs, key=lambda r: r.run_index)
    series = {
        "size_simulated": np.array([r.n_symptoms for r in ordered], dtype=np.float64),
        "recall": np.array([r.counts.recall for r in ordered]),
        "precision": np.array([r.counts.precision for r in ordered]),
        "f1": np.array([r.counts.f1 for r in ordered]),
    }
    summary: dict[str, dict[str, float]] = {}
    for metric, values in series.items():
        summary[metric] = {
            "mean": float(values.mean()),
            "std": float(values.std(ddof=0)),
            "min": float(values.min()),
            "median": float(np.median(values)),
            "max": float(values.max()),
        }
    return summary


@dataclass(frozen=True)
class SimulationReport:
    config: SimulationConfig
    runs: tuple[RunRecord, ...]
    summary: dict[str, dict[str, float]]

    def to_payload(self) -> dict:
        config = dataclasses.asdict(self.config)
        # Worker count is an execution detail, not a study parameter; keeping
        # it out makes reports bit-identical across thread counts.
        config.pop("n_workers")
        return {
            "config": config,
            "conventions": {
                "empty_selection_precision": 0.0,
                "std_ddof": 0,
                "seed_scheme": "splitmix64(master_seed, stream, index)",
            },
            "summary": self.summary,
            "runs": [dataclasses.asdict(r) for r in self.runs],
        }

    def to_json(self) -> str:
        """Canonical JSON: identical bytes for identical reports."""
        return json.dumps(self.to_payload(), indent=2, sort_keys=True) + "\n"


def _single_run(world: SimulationWorld, config: SimulationConfig, index: int) -> RunRecord:
    seed = run_seed(config.master_seed, index)
    profile, truth = generate_trial(world, config, seed)
    result = run_selection(
        world.store,
        world.candidates,
        profile,
        params=config.utility_params,
        info=config.info,
        alpha=config.alpha,
    )
    selected = frozenset(result.selected_ids)
    counts = score_run(selected, truth)
    return RunRecord(
        run_index=index,
        seed=seed,
        n_symptoms=len(truth),
        n_profile_terms=len(profile),
        k_optimal=result.k_optimal,
        n_selected=len(selected),
        counts=counts,
    )


def run_monte_carlo(config: SimulationConfig, world: SimulationWorld | None = None) -> SimulationReport:
    """Run ``config.n_runs`` independent trials and aggregate the results.

    Each run is seeded purely from (master_seed, run index); records are
    reduced in index order, so the report is identical for any worker count.
    """
    config.validate()
    if world is None:
        world = build_world(config)
    indices = range(config.n_runs)
    if config.n_workers > 1:
        with ThreadPoolExecutor(max_workers=config.n_workers) as pool:
            records = list(pool.map(lambda i: _single_run(world, config, i), indices))
    else:
        records = [_single_run(world, config, i) for i in indices]
    records.sort(key=lambda r: r.run_index)
    return SimulationReport(
        config=config, runs=tuple(records), summary=summarize_runs(records)
    )


def per_symptom_tpir(
    config: SimulationConfig,
    n_reps: int,
    info: float = TPIR_DEFAULT_INFO,
    world: SimulationWorld | None = None,
) -> dict[str, float]:
    """TPIR per candidate: plant one item at a time, measure recovery rate.

    For each candidate, runs ``n_reps`` trials containing only that item's
    AEs plus noise and reports the fraction of reps in which the item made
    the selected subset. Uses its own stricter information threshold
    (default 0.80), independent of ``config.info``.
    """
    config.validate()
    if n_reps < 1:
        raise InputError(f"n_reps must be positive, got {n_reps}")
    if world is None:
        world = build_world(config)
    tpir_stream = derive_seed(config.master_seed, STREAM_TPIR)
    rates: dict[str, float] = {}
    for index, item in enumerate(world.candidates):
        item_stream = derive_seed(tpir_stream, index)
        hits = 0
        for rep in range(n_reps):
            rng = np.random.default_rng(derive_seed(item_stream, rep))
            profile = _draw_profile(world, config, rng, [index])
            result = run_selection(
                world.store,
                world.candidates,
                profile,
                params=config.utility_params,
                info=info,
                alpha=config.alpha,
            )
            if item.item_id in result.selected_ids:
                hits += 1
        rates[item.item_id] = hits / n_reps
    return rates


def similarity_vs_tpir(
    world: SimulationWorld,
    tpir: Mapping[str, float],
) -> list[tuple[str, float | None, float]]:
    """Per candidate: its maximum off-diagonal similarity and its TPIR.

    A single-candidate universe has no pairs; the similarity field is None
    there (an empty field in CSV output).
    """
    S = build_similarity(world.candidates, world.store)
    rows: list[tuple[str, float | None, float]] = []
    for j, item in enumerate(world.candidates):
        if S.shape[0] < 2:
            max_sim: float | None = None
        else:
            column = np.delete(S[j], j)
            max_sim = float(column.max())
        rows.append((item.item_id, max_sim, float(tpir[item.item_id])))
    return rows
