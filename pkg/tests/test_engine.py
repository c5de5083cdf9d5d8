"""
Tests for the GA loop: selection, generation steps and whole runs.
"""
import math

import numpy as np
import pytest
from pydantic import ValidationError

from varsel_engine.chromosome import init_indexed, init_standard
from varsel_engine.database import FitnessCache
from varsel_engine.engine import (
    FitnessEvaluator,
    GaConfig,
    evaluate_population,
    initial_population,
    rank_key,
    run,
    step_generation,
    tournament_select,
)
from varsel_engine.fitness import FitnessEvaluationError, make_folds
from varsel_engine.generator import SimSpec, generate
from varsel_engine.ingest import IngestSpec, load_delimited
from varsel_engine.models import Dataset
from varsel_engine.predictor_space import PredictorSpace

TARGET = frozenset({1, 2, 6})  # x1, x2, x1:x2 among five mains


def closeness(terms):
    """Synthetic fitness, higher when closer to TARGET."""
    return -float(len(set(terms) ^ TARGET))


def _population(space, encoding, size, seed, max_length=8):
    rng = np.random.default_rng(seed)
    if encoding == "standard":
        return [init_standard(space, 0.3, rng=rng) for _ in range(size)]
    return [init_indexed(space, max_length, rng=rng) for _ in range(size)]


def _assert_valid(population, space):
    for member in population:
        terms = member.active_terms()
        assert space.is_hierarchical(terms), member.to_text()
        assert len(set(terms)) == len(terms)


# -- tournament selection -------------------------------------------------------

def test_full_tournament_picks_global_best(space5, rng):
    population = _population(space5, "standard", 6, 1)
    values = [0.3, 0.9, 0.1, 0.5, 0.9, 0.2]
    for _ in range(50):
        assert tournament_select(population, values, 6, rng, maximize=True) == 1
        assert tournament_select(population, values, 6, rng, maximize=False) == 2


def test_two_member_tournament_better_always_wins(space5, rng):
    population = _population(space5, "standard", 2, 2)
    for _ in range(200):
        assert tournament_select(population, [0.4, 0.7], 2, rng) == 1
        assert tournament_select(population, [10.0, 3.0], 2, rng, maximize=False) == 1


def test_tournament_non_finite_is_worst(space5, rng):
    population = _population(space5, "standard", 2, 3)
    assert tournament_select(population, [math.nan, -5.0], 2, rng) == 1
    assert tournament_select(population, [math.inf, 5.0], 2, rng, maximize=False) == 1


def test_tournament_errors(space5, rng):
    population = _population(space5, "standard", 3, 4)
    with pytest.raises(ValueError):
        tournament_select(population, [1.0, 2.0, 3.0], 4, rng)
    with pytest.raises(ValueError):
        tournament_select(population, [1.0, 2.0], 2, rng)
    with pytest.raises(ValueError):
        tournament_select([], [], 1, rng)


def _uniformity(draws, n, rng, sigmas):
    population = list(range(n))
    counts = np.bincount(
        [tournament_select(population, [0.0] * n, 1, rng) for _ in range(draws)],
        minlength=n,
    )
    p = 1 / n
    bound = sigmas * math.sqrt(draws * p * (1 - p))
    assert np.all(np.abs(counts - draws * p) <= bound)


def test_size_one_tournament_is_uniform():
    _uniformity(20_000, 5, np.random.default_rng(21), sigmas=4)


@pytest.mark.slow
def test_size_one_tournament_is_uniform_large_sample():
    _uniformity(100_000, 5, np.random.default_rng(22), sigmas=3)


# -- ranking and evaluation ----------------------------------------------------------

def test_rank_key_ties_prefer_small_then_lexicographic():
    assert rank_key(0.8, (1, 2), True) < rank_key(0.8, (1, 2, 3), True)
    assert rank_key(0.8, (1, 3), True) < rank_key(0.8, (2, 3), True)
    assert rank_key(100.0, (1,), False) < rank_key(101.0, (), False)
    assert rank_key(math.nan, (), True) > rank_key(-1e9, (1, 2, 3), True)


def test_evaluate_population_failures_get_worst(space5):
    population = _population(space5, "standard", 8, 5)

    def picky(terms):
        if 1 in terms:
            raise FitnessEvaluationError("no fit")
        return float(len(terms))

    values, failures = evaluate_population(population, picky, maximize=True)
    expected_failures = sum(1 in c.active_terms() for c in population)
    assert failures == expected_failures
    for member, value in zip(population, values):
        if 1 in member.active_terms():
            assert value == -math.inf
        else:
            assert value == len(member.active_terms())


def test_evaluate_population_threads_match_serial(space5):
    population = _population(space5, "indexed", 12, 6)
    serial, _ = evaluate_population(population, closeness, True, workers=1)
    threaded, _ = evaluate_population(population, closeness, True, workers=4)
    assert serial == threaded


# -- config ---------------------------------------------------------------------------

def test_ga_config_validation():
    with pytest.raises(ValidationError):
        GaConfig(population_size=4, tournament_size=5, max_length=5)
    with pytest.raises(ValidationError):
        GaConfig(population_size=4, elite_count=4, max_length=5)
    with pytest.raises(ValidationError):
        GaConfig(encoding="indexed")
    with pytest.raises(ValidationError):
        GaConfig(max_length=5, mutation_rate=0.1)
    with pytest.raises(ValidationError):
        GaConfig(max_length=5, cv_folds=1)
    assert GaConfig(encoding="standard").maximize is False
    assert GaConfig(max_length=5, fitness_metric="cv_auc").maximize is True


# -- step_generation ----------------------------------------------------------------------

def test_copy_only_generation_draws_from_current_members(space5):
    config = GaConfig(
        encoding="indexed", max_length=8, population_size=10, tournament_size=3,
        p_crossover=0.0, p_mutate=0.0, p_add=0.0, p_del=0.0, elite_count=0,
        fitness_metric="cv_auc", workers=1,
    )
    population = _population(space5, "indexed", 10, 7)
    texts = {c.to_text() for c in population}
    nxt, stats = step_generation(population, config, closeness, np.random.default_rng(8))
    assert len(nxt) == 10
    assert all(c.to_text() in texts for c in nxt)
    assert stats.skipped_mutations == 0


@pytest.mark.parametrize("encoding", ["standard", "indexed"])
def test_elitism_never_worsens_best(space5, encoding):
    config = GaConfig(
        encoding=encoding, max_length=8, population_size=12, tournament_size=2,
        elite_count=1, fitness_metric="cv_auc", workers=1,
    )
    population = _population(space5, encoding, 12, 9)
    rng = np.random.default_rng(10)
    best = []
    for generation in range(50):
        population, stats = step_generation(population, config, closeness, rng, generation)
        best.append(stats.best_fitness)
    assert all(b >= a for a, b in zip(best, best[1:]))


def test_odd_offspring_count_keeps_population_size(space5):
    config = GaConfig(
        encoding="standard", population_size=7, tournament_size=2, elite_count=2,
        fitness_metric="cv_auc", workers=1,
    )
    population = _population(space5, "standard", 7, 11)
    for generation in range(10):
        population, _ = step_generation(population, config, closeness, np.random.default_rng(generation), generation)
        assert len(population) == 7


def _aggressive_hierarchy_run(encoding, generations):
    space = PredictorSpace(6)
    config = GaConfig(
        encoding=encoding, max_length=10, population_size=20, tournament_size=2,
        p_crossover=0.9, p_mutate=0.5, p_add=0.5, p_del=0.5, elite_count=1,
        fitness_metric="cv_auc", workers=1,
    )
    population = initial_population(config, space, np.random.SeedSequence(12))
    rng = np.random.default_rng(13)
    _assert_valid(population, space)
    for generation in range(generations):
        population, _ = step_generation(population, config, lambda t: -float(len(t)), rng, generation)
        _assert_valid(population, space)


@pytest.mark.parametrize("encoding", ["standard", "indexed"])
def test_hierarchy_holds_in_every_generation(encoding):
    _aggressive_hierarchy_run(encoding, 40)


@pytest.mark.slow
@pytest.mark.parametrize("encoding", ["standard", "indexed"])
def test_hierarchy_holds_over_long_aggressive_run(encoding):
    _aggressive_hierarchy_run(encoding, 250)


def test_initial_population_seeds_member_zero_only(space5):
    config = GaConfig(encoding="indexed", max_length=6, population_size=5, tournament_size=2)
    population = initial_population(config, space5, np.random.SeedSequence(0), seed_terms=(1, 2, 6))
    assert population[0].active_terms() == (1, 2, 6)
    assert len(population) == 5


# -- fitness evaluator and cache -------------------------------------------------------------

def test_evaluator_caches_by_term_set(noisy_dataset, tmp_path):
    space = PredictorSpace(4)
    folds = make_folds(noisy_dataset.n_rows, 5, 0)
    db = str(tmp_path / "cache.db")
    first = FitnessEvaluator(noisy_dataset, space, folds, "cv_aic", cache=FitnessCache("s", db))
    value = first((1, 2))
    assert first((2, 1)) == value
    assert first.evaluations == 1

    second = FitnessEvaluator(noisy_dataset, space, folds, "cv_aic", cache=FitnessCache("s", db))
    assert second((1, 2)) == value
    assert second.evaluations == 0

    other_scope = FitnessEvaluator(noisy_dataset, space, folds, "cv_aic", cache=FitnessCache("t", db))
    other_scope((1, 2))
    assert other_scope.evaluations == 1


def test_evaluator_remembers_failures(noisy_dataset):
    folds = make_folds(noisy_dataset.n_rows, 5, 0)
    evaluator = FitnessEvaluator(noisy_dataset, PredictorSpace(4), folds, "cv_aic", max_iter=1)
    with pytest.raises(FitnessEvaluationError, match="did not converge"):
        evaluator((1, 2))
    with pytest.raises(FitnessEvaluationError):
        evaluator((1, 2))
    assert evaluator.evaluations == 1
    assert not evaluator.is_separated((1, 2))


@pytest.fixture(scope="module")
def sim20():
    return generate(SimSpec(n_main=20, n_true=19, rng_seed=1))


@pytest.mark.parametrize("metric", ["cv_aic", "cv_auc"])
def test_separated_true_set_gets_finite_fitness(sim20, metric):
    dataset = sim20.dataset
    space = PredictorSpace(20)
    folds = make_folds(dataset.n_rows, 10, 0)
    evaluator = FitnessEvaluator(dataset, space, folds, metric)
    truth = sim20.true_terms
    value = evaluator(truth)
    assert math.isfinite(value)
    assert evaluator.is_separated(truth)

    extra_main = next(t for t in range(1, 21) if t not in truth)
    superset = tuple(sorted(truth + (extra_main,)))
    assert math.isfinite(evaluator(superset))


def test_separated_fits_are_counted_per_generation(sim20):
    config = GaConfig(encoding="indexed", max_length=50, population_size=4, generations=1,
                      cv_folds=5, rng_seed=0, seed_terms=list(sim20.true_terms))
    report = run(config, sim20.dataset)
    assert report.history[0].separated_fits >= 1
    assert report.separated_fits == sum(s.separated_fits for s in report.history)
    assert math.isfinite(report.best_fitness)


def test_separated_flag_survives_sqlite_cache(sim20, tmp_path):
    dataset = sim20.dataset
    folds = make_folds(dataset.n_rows, 5, 0)
    db = str(tmp_path / "cache.db")
    first = FitnessEvaluator(dataset, PredictorSpace(20), folds, "cv_aic", cache=FitnessCache("s", db))
    value = first(sim20.true_terms)
    second = FitnessEvaluator(dataset, PredictorSpace(20), folds, "cv_aic", cache=FitnessCache("s", db))
    assert second(sim20.true_terms) == value
    assert second.evaluations == 0
    assert second.is_separated(sim20.true_terms)


# -- run ------------------------------------------------------------------------------------------

def _small_config(**overrides):
    settings = dict(
        encoding="indexed", max_length=6, population_size=10, generations=5,
        tournament_size=2, cv_folds=5, rng_seed=42, workers=1,
    )
    settings.update(overrides)
    return GaConfig(**settings)


@pytest.mark.parametrize("encoding", ["standard", "indexed"])
def test_run_is_deterministic(noisy_dataset, encoding):
    config = _small_config(encoding=encoding)
    a = run(config, noisy_dataset)
    b = run(config, noisy_dataset)
    assert a.to_dict(include_timing=False) == b.to_dict(include_timing=False)
    assert a.fold_digest == b.fold_digest


def test_run_report_contents(noisy_dataset):
    config = _small_config()
    report = run(config, noisy_dataset)
    space = PredictorSpace(4)
    assert space.is_hierarchical(report.active_terms)
    assert len(report.history) == config.generations
    assert [s.generation for s in report.history] == list(range(config.generations))
    assert report.best_fitness <= min(s.best_fitness for s in report.history)
    assert len(report.coefficient_table) == report.model_size + 1
    assert report.term_names == [space.term_name(t) for t in report.active_terms]
    assert report.final_fit["null_deviance"] >= report.final_fit["residual_deviance"]
    assert report.config == config.model_dump()


def test_zero_generations_reports_initial_best(noisy_dataset):
    report = run(_small_config(generations=0), noisy_dataset)
    assert report.history == []
    assert math.isfinite(report.best_fitness)
    assert PredictorSpace(4).is_hierarchical(report.active_terms)


def test_seed_changes_outcome_stream(noisy_dataset):
    a = run(_small_config(rng_seed=1), noisy_dataset)
    b = run(_small_config(rng_seed=2), noisy_dataset)
    assert a.fold_digest != b.fold_digest


def test_degenerate_dataset_refused():
    dataset = Dataset(np.random.default_rng(0).standard_normal((20, 3)), np.zeros(20))
    with pytest.raises(ValueError, match="constant"):
        run(_small_config(), dataset)


def test_resume_matches_uninterrupted_run(noisy_dataset, tmp_path):
    checkpoint = str(tmp_path / "ckpt.json")
    full = run(_small_config(generations=6, checkpoint_every=3), noisy_dataset)
    run(_small_config(generations=3, checkpoint_every=3), noisy_dataset, checkpoint_path=checkpoint)
    resumed = run(_small_config(generations=6, checkpoint_every=3), noisy_dataset, resume_from=checkpoint)
    assert resumed.to_dict(include_timing=False) == full.to_dict(include_timing=False)


def test_resume_rejects_changed_config(noisy_dataset, tmp_path):
    checkpoint = str(tmp_path / "ckpt.json")
    run(_small_config(generations=2, checkpoint_every=1), noisy_dataset, checkpoint_path=checkpoint)
    with pytest.raises(ValueError, match="p_add"):
        run(_small_config(generations=4, p_add=0.9), noisy_dataset, resume_from=checkpoint)


@pytest.mark.slow
@pytest.mark.parametrize("encoding", ["standard", "indexed"])
def test_recovers_true_terms_on_five_main_effects(sim5, encoding):
    config = GaConfig(
        encoding=encoding, max_length=15, population_size=30, generations=250,
        tournament_size=2, rng_seed=0,
    )
    report = run(config, sim5.dataset)
    assert set(sim5.true_terms) <= set(report.active_terms)
    if encoding == "indexed":
        assert report.model_size <= 8


@pytest.mark.slow
@pytest.mark.parametrize("encoding", ["standard", "indexed"])
def test_recovers_drawn_true_sets_in_most_seeds(encoding):
    recovered = 0
    for seed in range(5):
        simulated = generate(SimSpec(n_main=5, n_true=3, rng_seed=seed))
        config = GaConfig(encoding=encoding, max_length=15, rng_seed=seed)
        report = run(config, simulated.dataset)
        if set(simulated.true_terms) <= set(report.active_terms):
            recovered += 1
        if encoding == "indexed":
            assert report.model_size <= 8
    assert recovered >= 4


@pytest.mark.slow
def test_full_run_on_white_wine_reaches_auc(wine_path):
    dataset = load_delimited(IngestSpec(path=wine_path, transform="wine_white"))
    config = GaConfig(encoding="standard", fitness_metric="cv_auc", rng_seed=1)
    report = run(config, dataset)
    assert report.metric == "cv_auc"
    assert report.best_fitness >= 0.83
