"""
Tests for simulated datasets and true-set generation.
"""
import math

import numpy as np
import pytest
from pydantic import ValidationError
from scipy.stats import norm

from varsel_engine.fitness import cv_fitness, make_folds
from varsel_engine.generator import (
    GenerationError,
    SimSpec,
    default_true_set,
    generate,
    read_truth,
    resolve_true_terms,
    write_truth,
)
from varsel_engine.predictor_space import PredictorSpace
from varsel_engine.seed_data import SIMULATION_GRID


def _within_sigmas(observed, expected, n, sigmas=3.0):
    return abs(observed - expected) <= sigmas * math.sqrt(expected * (1 - expected) / n)


# -- generate -----------------------------------------------------------------------

def test_single_main_effect_matches_gaussian_tail():
    result = generate(SimSpec(n_main=1, n_samples=100_000, true_terms=["x1"], noise_variance=0.0, rng_seed=3))
    assert _within_sigmas(result.positive_rate, 1 - norm.cdf(2.0), 100_000)


def test_very_low_threshold_gives_all_positive():
    result = generate(SimSpec(n_main=3, n_samples=200, true_terms=["x2"], threshold=-1e9))
    assert result.positive_rate == 1.0
    assert np.all(result.dataset.response == 1)


def test_three_term_rate_matches_brute_force_latent():
    spec = SimSpec(n_main=4, n_samples=100_000, true_terms=["x1", "x2", "x1:x2"], rng_seed=5)
    observed = generate(spec).positive_rate

    rng = np.random.default_rng(99)
    x = rng.standard_normal((1_000_000, 2))
    latent = x[:, 0] + x[:, 1] + x[:, 0] * x[:, 1] + rng.normal(0, math.sqrt(0.02), 1_000_000)
    expected = float(np.mean(latent > 2.0))
    sigma = math.sqrt(expected * (1 - expected) * (1 / 100_000 + 1 / 1_000_000))
    assert abs(observed - expected) <= 3 * sigma


def test_generate_is_deterministic_per_seed():
    spec = SimSpec(n_main=6, n_samples=500, n_true=5, rng_seed=11)
    a, b = generate(spec), generate(spec)
    assert a.true_terms == b.true_terms
    assert np.array_equal(a.dataset.main_matrix, b.dataset.main_matrix)
    assert np.array_equal(a.dataset.response, b.dataset.response)

    other = generate(spec.model_copy(update={"rng_seed": 12}))
    assert not np.array_equal(a.dataset.main_matrix, other.dataset.main_matrix)


def test_main_effect_columns_are_standard_normal():
    dataset = generate(SimSpec(n_main=5, n_true=3, rng_seed=2)).dataset
    n = dataset.n_rows
    assert n == 1000
    assert np.all(np.abs(dataset.main_matrix.mean(axis=0)) <= 4 / math.sqrt(n))
    assert np.all(np.abs(dataset.main_matrix.std(axis=0, ddof=1) - 1) <= 4 / math.sqrt(2 * n))
    assert dataset.column_names == ("x1", "x2", "x3", "x4", "x5")
    assert dataset.standardized is False


def test_true_set_beats_random_competitors(sim5):
    dataset = sim5.dataset
    folds = make_folds(dataset.n_rows, 10, 0)
    truth = cv_fitness(dataset, sim5.true_terms, folds, "auc").mean_value
    rng = np.random.default_rng(4)
    competitors = 0
    while competitors < 20:
        fraction = float(rng.choice([0.0, 0.4, 1.0]))
        terms = default_true_set(5, 3, fraction, rng)
        if terms == sim5.true_terms:
            continue
        assert cv_fitness(dataset, terms, folds, "auc").mean_value < truth
        competitors += 1


def test_non_hierarchical_truth_rejected_or_completed():
    with pytest.raises(GenerationError):
        generate(SimSpec(n_main=4, true_terms=["x1:x3"]))
    result = generate(SimSpec(n_main=4, true_terms=["x1:x3"], complete_hierarchy=True, n_samples=50))
    space = PredictorSpace(4)
    assert result.true_terms == space.parse_terms(["x1", "x3", "x1:x3"])


def test_unknown_true_term_rejected():
    with pytest.raises(GenerationError):
        resolve_true_terms(SimSpec(n_main=3, true_terms=["x7"]))


def test_sim_spec_needs_exactly_one_truth_source():
    with pytest.raises(ValidationError):
        SimSpec(n_main=3)
    with pytest.raises(ValidationError):
        SimSpec(n_main=3, true_terms=["x1"], n_true=1)
    with pytest.raises(ValidationError):
        SimSpec(n_main=3, n_true=1, n_samples=0)


# -- default_true_set ----------------------------------------------------------------------

def test_single_term_is_a_main_effect(rng):
    terms = default_true_set(10, 1, 0.4, rng)
    assert len(terms) == 1 and terms[0] <= 10


def test_three_of_five_is_hierarchical(rng):
    space = PredictorSpace(5)
    terms = default_true_set(5, 3, 0.4, rng)
    assert len(terms) == 3
    assert space.is_hierarchical(terms)
    mains = [t for t in terms if t <= 5]
    assert len(mains) == 2
    assert space.parents_of(max(terms)) == set(mains)


def test_zero_interaction_fraction_gives_mains_only(rng):
    assert all(t <= 8 for t in default_true_set(8, 6, 0.0, rng))


@pytest.mark.parametrize("row", SIMULATION_GRID, ids=lambda row: str(row["n_main"]))
def test_grid_true_sets_have_exact_size(row):
    n_main, max_length, n_true = row["n_main"], row["max_length"], row["n_true"]
    space = PredictorSpace(n_main)
    terms = default_true_set(n_main, n_true, 0.4, np.random.default_rng(n_main))
    assert len(terms) == n_true == len(set(terms))
    assert space.is_hierarchical(terms)
    assert n_true <= max_length


def test_every_size_up_to_total_is_feasible():
    space = PredictorSpace(4)
    for n_true in range(1, space.total_terms + 1):
        for fraction in (0.0, 0.5, 1.0):
            terms = default_true_set(4, n_true, fraction, np.random.default_rng(n_true))
            assert len(terms) == n_true
            assert space.is_hierarchical(terms)


def test_out_of_range_sizes_rejected(rng):
    with pytest.raises(GenerationError):
        default_true_set(5, 16, 0.4, rng)
    with pytest.raises(GenerationError):
        default_true_set(5, 0, 0.4, rng)


def test_default_true_set_is_deterministic():
    a = default_true_set(30, 28, 0.4, np.random.default_rng(1))
    b = default_true_set(30, 28, 0.4, np.random.default_rng(1))
    assert a == b


# -- truth sidecar -----------------------------------------------------------------------------

def test_truth_file_round_trip(tmp_path, sim5):
    space = PredictorSpace(5)
    path = str(tmp_path / "truth.txt")
    write_truth(path, sim5.true_terms, space)
    assert (tmp_path / "truth.txt").read_text().splitlines() == ["x1", "x2", "x1:x2"]
    assert read_truth(path, space) == sim5.true_terms
