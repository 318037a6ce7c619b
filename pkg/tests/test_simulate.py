"""Monte Carlo harness: trial generation, scoring, aggregation, TPIR."""

from __future__ import annotations

import warnings

import numpy as np
import pytest

from divsel import (
    CandidateItem,
    InputError,
    SimulationConfig,
    SimulationWorld,
    build_world,
    derive_seed,
    generate_trial,
    per_symptom_tpir,
    run_monte_carlo,
    score_run,
    similarity_vs_tpir,
    synth_vocabulary,
)
from divsel.simulate import run_seed, summarize_runs


def small_config(**overrides) -> SimulationConfig:
    """A fast desk-scale config; ranges are intentionally narrow."""
    defaults = dict(
        n_candidates=12,
        terms_per_cluster=4,
        dimension=64,
        intra_cluster_similarity=0.99,
        noise_pool_size=80,
        n_symptoms=(3, 6),
        aes_per_symptom=(1, 3),
        n_noise=(5, 15),
        n_runs=5,
        master_seed=123,
        allow_wide_ranges=True,
    )
    defaults.update(overrides)
    return SimulationConfig(**defaults)


@pytest.fixture(autouse=True)
def _quiet_range_warnings():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        yield


class TestSeedDerivation:
    def test_pure_function(self):
        assert derive_seed(42, 7) == derive_seed(42, 7)

    def test_indices_give_distinct_seeds(self):
        seeds = {derive_seed(0, i) for i in range(10000)}
        assert len(seeds) == 10000

    def test_masters_give_distinct_streams(self):
        assert derive_seed(1, 0) != derive_seed(2, 0)

    def test_output_is_64_bit(self):
        for i in range(100):
            assert 0 <= derive_seed(123456789, i) < 2**64


class TestConfigValidation:
    def test_defaults_valid(self):
        SimulationConfig().validate()

    def test_out_of_design_range_needs_flag(self):
        with pytest.raises(InputError, match="n_noise"):
            SimulationConfig(n_noise=(0, 5)).validate()
        SimulationConfig(n_noise=(0, 5), allow_wide_ranges=True).validate()

    def test_wide_range_warns(self):
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            with pytest.raises(UserWarning):
                SimulationConfig(n_symptoms=(1, 4), allow_wide_ranges=True).validate()

    def test_symptoms_cannot_exceed_candidates(self):
        with pytest.raises(InputError, match="candidate count"):
            small_config(n_candidates=4, n_symptoms=(3, 6)).validate()

    def test_aes_cannot_exceed_cluster_size(self):
        with pytest.raises(InputError, match="terms_per_cluster"):
            small_config(terms_per_cluster=2, aes_per_symptom=(1, 3)).validate()

    def test_noise_cannot_exceed_pool(self):
        with pytest.raises(InputError, match="noise pool"):
            small_config(noise_pool_size=10, n_noise=(5, 15)).validate()


class TestWorld:
    def test_one_cluster_per_candidate(self):
        config = small_config()
        world = build_world(config)
        assert len(world.candidates) == config.n_candidates
        assert set(world.clusters) == {c.item_id for c in world.candidates}
        for item in world.candidates:
            assert item.mapped_terms[0] in world.clusters[item.item_id]

    def test_noise_terms_disjoint_from_clusters(self):
        world = build_world(small_config())
        in_cluster = {t for ms in world.clusters.values() for t in ms}
        assert not in_cluster & set(world.noise_terms)
        assert len(world.noise_terms) == small_config().noise_pool_size

    def test_world_deterministic(self):
        w1 = build_world(small_config())
        w2 = build_world(small_config())
        assert w1.candidates == w2.candidates
        for t in w1.store.terms():
            np.testing.assert_array_equal(w1.store.vector(t), w2.store.vector(t))


class TestGenerateTrial:
    def test_exact_counts_with_degenerate_ranges(self):
        config = small_config(n_symptoms=(5, 5), aes_per_symptom=(1, 1), n_noise=(0, 0))
        world = build_world(config)
        profile, truth = generate_trial(world, config, seed=99)
        assert len(truth) == 5
        assert len(profile) == 5

    def test_deterministic_in_seed(self):
        config = small_config()
        world = build_world(config)
        p1, t1 = generate_trial(world, config, seed=7)
        p2, t2 = generate_trial(world, config, seed=7)
        assert t1 == t2
        assert p1.terms == p2.terms
        np.testing.assert_array_equal(p1.weights, p2.weights)

    def test_noise_terms_have_no_cluster_membership(self):
        config = small_config(n_noise=(50, 50), noise_pool_size=80)
        world = build_world(config)
        profile, truth = generate_trial(world, config, seed=11)
        in_cluster = {t for ms in world.clusters.values() for t in ms}
        outside = [t for t in profile.terms if t not in in_cluster]
        assert len(outside) == 50

    def test_symptom_overflow_rejected(self):
        config = small_config()
        world = build_world(config)
        wide = small_config(n_symptoms=(20, 20), n_candidates=20)
        with pytest.raises(InputError, match="exceeds candidate count"):
            generate_trial(world, wide, seed=0)

    def test_weights_are_integer_counts_in_range(self):
        config = small_config(weight_range=(1, 10))
        world = build_world(config)
        profile, _ = generate_trial(world, config, seed=3)
        assert np.all(profile.weights >= 1)
        assert np.all(profile.weights <= 10)
        assert np.all(profile.weights == np.round(profile.weights))


class TestScoreRun:
    def test_perfect_recovery(self):
        counts = score_run({"a", "b", "c"}, {"a", "b", "c"})
        assert (counts.tp, counts.fp, counts.fn) == (3, 0, 0)
        assert counts.precision == counts.recall == counts.f1 == 1.0

    def test_empty_selection_defines_precision_zero(self):
        counts = score_run(set(), {"a"})
        assert (counts.tp, counts.fn) == (0, 1)
        assert counts.precision == 0.0
        assert counts.recall == 0.0
        assert counts.f1 == 0.0

    def test_half_overlap_hand_count(self):
        counts = score_run({"a", "b"}, {"b", "c"})
        assert (counts.tp, counts.fp, counts.fn) == (1, 1, 1)
        assert counts.precision == counts.recall == counts.f1 == 0.5

    def test_count_identities(self):
        rng = np.random.default_rng(40)
        universe = [f"u{i}" for i in range(20)]
        for _ in range(50):
            selected = set(rng.choice(universe, size=int(rng.integers(0, 10)), replace=False))
            truth = set(rng.choice(universe, size=int(rng.integers(1, 10)), replace=False))
            counts = score_run(selected, truth)
            assert counts.tp + counts.fn == len(truth)
            assert counts.tp + counts.fp == len(selected)


class TestRunMonteCarlo:
    def test_single_run_aggregates(self):
        report = run_monte_carlo(small_config(n_runs=1))
        assert len(report.runs) == 1
        run = report.runs[0]
        assert report.summary["recall"]["mean"] == run.counts.recall
        assert report.summary["recall"]["std"] == 0.0
        assert report.summary["size_simulated"]["mean"] == run.n_symptoms

    def test_bit_identical_across_worker_counts(self):
        r1 = run_monte_carlo(small_config(n_runs=8, n_workers=1))
        r4 = run_monte_carlo(small_config(n_runs=8, n_workers=4))
        assert r1.to_json() == r4.to_json()

    def test_deterministic_in_master_seed(self):
        r1 = run_monte_carlo(small_config(n_runs=4))
        r2 = run_monte_carlo(small_config(n_runs=4))
        assert r1.to_json() == r2.to_json()
        r3 = run_monte_carlo(small_config(n_runs=4, master_seed=124))
        assert r3.to_json() != r1.to_json()

    def test_aggregates_recomputable_from_records(self):
        report = run_monte_carlo(small_config(n_runs=6))
        assert summarize_runs(report.runs) == report.summary

    def test_run_seeds_match_documented_scheme(self):
        config = small_config(n_runs=3)
        report = run_monte_carlo(config)
        for record in report.runs:
            assert record.seed == run_seed(config.master_seed, record.run_index)

    def test_recall_improves_with_cluster_tightness(self):
        # Averaged over enough runs, tighter clusters must recover better.
        base = dict(
            n_candidates=15,
            terms_per_cluster=4,
            dimension=32,
            noise_pool_size=100,
            n_symptoms=(4, 8),
            aes_per_symptom=(1, 3),
            n_noise=(10, 30),
            n_runs=200,
            master_seed=555,
            allow_wide_ranges=True,
        )
        tight = run_monte_carlo(SimulationConfig(intra_cluster_similarity=0.99, **base))
        loose = run_monte_carlo(SimulationConfig(intra_cluster_similarity=0.80, **base))
        assert tight.summary["recall"]["mean"] > loose.summary["recall"]["mean"]


class TestPerSymptomTpir:
    def test_zero_reps_rejected(self):
        with pytest.raises(InputError, match="n_reps"):
            per_symptom_tpir(small_config(), n_reps=0)

    def test_isolated_tight_clusters_always_recovered(self):
        # Zero noise overlap and near-exact matches: recovery every time.
        config = small_config(
            n_candidates=6,
            dimension=128,
            intra_cluster_similarity=0.999,
            n_noise=(5, 10),
            master_seed=2024,
        )
        rates = per_symptom_tpir(config, n_reps=100)
        assert all(rate == 1.0 for rate in rates.values())

    def test_deterministic(self):
        config = small_config(n_candidates=4, n_symptoms=(1, 2))
        r1 = per_symptom_tpir(config, n_reps=5)
        r2 = per_symptom_tpir(config, n_reps=5)
        assert r1 == r2


class TestSimilarityVsTpir:
    def test_single_candidate_has_empty_similarity(self):
        store, clusters = synth_vocabulary(1, 2, 5, 16, 0.95, seed=1)
        item = CandidateItem(item_id="solo", mapped_terms=(clusters["c000"][0],))
        world = SimulationWorld(
            store=store,
            candidates=(item,),
            clusters={"solo": tuple(clusters["c000"])},
            noise_terms=tuple(t for t in store.terms() if t.startswith("noise")),
        )
        rows = similarity_vs_tpir(world, {"solo": 1.0})
        assert rows == [("solo", None, 1.0)]

    def test_orthogonal_pair_has_zero_similarity(self, basis_store):
        items = (
            CandidateItem(item_id="a", mapped_terms=("t0",)),
            CandidateItem(item_id="b", mapped_terms=("t1",)),
        )
        world = SimulationWorld(
            store=basis_store,
            candidates=items,
            clusters={"a": ("t0",), "b": ("t1",)},
            noise_terms=(),
        )
        rows = similarity_vs_tpir(world, {"a": 0.5, "b": 0.75})
        assert rows[0][1] == pytest.approx(0.0, abs=1e-12)
        assert rows[1][1] == pytest.approx(0.0, abs=1e-12)
        assert rows[1][2] == 0.75

    def test_near_duplicates_top_the_similarity_table(self):
        world = build_world(small_config(n_candidates=5, n_symptoms=(2, 4)))
        # Append a duplicate of the first candidate under a new id.
        first = world.candidates[0]
        dup = CandidateItem(item_id="zz_dup", mapped_terms=first.mapped_terms)
        clusters = dict(world.clusters)
        clusters["zz_dup"] = clusters[first.item_id]
        world2 = SimulationWorld(
            store=world.store,
            candidates=world.candidates + (dup,),
            clusters=clusters,
            noise_terms=world.noise_terms,
        )
        tpir = {c.item_id: 1.0 for c in world2.candidates}
        rows = similarity_vs_tpir(world2, tpir)
        best = max(rows, key=lambda r: r[1])
        assert best[0] in (first.item_id, "zz_dup")
        assert best[1] == pytest.approx(1.0, abs=1e-9)
