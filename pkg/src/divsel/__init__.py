"""divsel: diverse subset selection over embedded vocabularies.

Scores candidate items for relevance against a weighted historical profile,
builds a utility-weighted similarity kernel, and extracts a minimal,
diverse, maximally informative subset by spectral decomposition. Includes a
Monte Carlo harness that measures recovery of planted ground truth, a CLI,
and an HTTP service.
"""

__version__ = "0.1.0"

from .errors import ComputationError, DivselError, InputError, UnknownTermError
from .termspace import (
    EmbeddingStore,
    build_store,
    load_store,
    save_store,
    synth_vocabulary,
)
from .scoring import (
    CandidateItem,
    Evidence,
    HistoricalProfile,
    RelevanceWeights,
    best_term_similarity,
    build_cross_similarity,
    build_similarity,
    item_embedding,
    load_candidates_csv,
    load_profile_csv,
    propagate_weights,
    relevance,
    score_candidates,
)
from .utility import (
    UtilityParams,
    UtilityResult,
    build_lkernel,
    compute_utility,
    logistic_transform,
    normalize_weights,
    utility,
)
from .spectral import (
    EigenDecomposition,
    ScoredCandidate,
    SelectionResult,
    eigendecompose,
    explained_curve,
    k_optimal,
    leverage,
    select,
)
from .pipeline import run_selection
from .simulate import (
    ConfusionCounts,
    SimulationConfig,
    SimulationReport,
    SimulationWorld,
    build_world,
    derive_seed,
    generate_trial,
    per_symptom_tpir,
    run_monte_carlo,
    score_run,
    similarity_vs_tpir,
)

__all__ = [
    "__version__",
    "ComputationError",
    "DivselError",
    "InputError",
    "UnknownTermError",
    "EmbeddingStore",
    "build_store",
    "load_store",
    "save_store",
    "synth_vocabulary",
    "CandidateItem",
    "Evidence",
    "HistoricalProfile",
    "RelevanceWeights",
    "best_term_similarity",
    "build_cross_similarity",
    "build_similarity",
    "item_embedding",
    "load_candidates_csv",
    "load_profile_csv",
    "propagate_weights",
    "relevance",
    "score_candidates",
    "UtilityParams",
    "UtilityResult",
    "build_lkernel",
    "compute_utility",
    "logistic_transform",
    "normalize_weights",
    "utility",
    "EigenDecomposition",
    "ScoredCandidate",
    "SelectionResult",
    "eigendecompose",
    "explained_curve",
    "k_optimal",
    "leverage",
    "select",
    "run_selection",
    "ConfusionCounts",
    "SimulationConfig",
    "SimulationReport",
    "SimulationWorld",
    "build_world",
    "derive_seed",
    "generate_trial",
    "per_symptom_tpir",
    "run_monte_carlo",
    "score_run",
    "similarity_vs_tpir",
]
