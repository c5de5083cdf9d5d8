"""
Core GA engine: the generational loop over either chromosome encoding.
"""
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Literal, Optional, Sequence, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from . import config as defaults
from .chromosome import (
    Chromosome,
    MutationRates,
    chromosome_from_text,
    crossover,
    init_indexed,
    init_standard,
    mutate,
)
from .database import FitnessCache, load_checkpoint, save_checkpoint
from .fitness import (
    FitnessEvaluationError,
    coefficient_table,
    cv_fitness,
    design_matrix,
    fit_logistic,
    fold_digest,
    make_folds,
    normalize_metric,
    null_deviance,
)
from .models import Dataset, GenerationStats, OperatorLog, RunReport
from .predictor_space import PredictorSpace

logger = logging.getLogger(__name__)

FitnessFn = Callable[[tuple[int, ...]], float]


class GaConfig(BaseModel):
    """GA meta-parameters. Every field maps to a key of the `[ga]` config section."""
    model_config = ConfigDict(extra="forbid", frozen=True)

    encoding: Literal["standard", "indexed"] = "indexed"
    population_size: int = Field(defaults.POPULATION_SIZE, ge=2)
    generations: int = Field(defaults.GENERATIONS, ge=0)
    p_crossover: float = Field(defaults.P_CROSSOVER, ge=0.0, le=1.0)
    p_mutate: float = Field(defaults.P_MUTATE, ge=0.0, le=1.0)
    p_add: float = Field(defaults.P_ADD, ge=0.0, le=1.0)
    p_del: float = Field(defaults.P_DEL, ge=0.0, le=1.0)
    tournament_size: int = Field(defaults.TOURNAMENT_SIZE, ge=1)
    max_length: Optional[int] = Field(None, ge=1)
    fitness_metric: Literal["cv_auc", "cv_aic"] = "cv_aic"
    cv_folds: int = Field(defaults.CV_FOLDS, ge=2)
    elite_count: int = Field(defaults.ELITE_COUNT, ge=0)
    rng_seed: int = Field(0, ge=0, lt=2**64)
    init_density: float = Field(defaults.INIT_DENSITY, ge=0.0, le=1.0)
    seed_terms: list[Union[int, str]] = Field(default_factory=list)
    include_interactions: bool = True
    max_iter: int = Field(defaults.IRLS_MAX_ITER, ge=1)
    tol: float = Field(defaults.IRLS_TOL, gt=0.0)
    workers: int = Field(defaults.DEFAULT_WORKERS, ge=1)
    checkpoint_every: int = Field(defaults.CHECKPOINT_EVERY, ge=0)

    @model_validator(mode="after")
    def _check_consistency(self) -> 'GaConfig':
        if self.tournament_size > self.population_size:
            raise ValueError(
                f"tournament_size ({self.tournament_size}) exceeds "
                f"population_size ({self.population_size})"
            )
        if self.elite_count >= self.population_size:
            raise ValueError(
                f"elite_count ({self.elite_count}) must be below "
                f"population_size ({self.population_size})"
            )
        if self.encoding == "indexed" and self.max_length is None:
            raise ValueError("max_length is required for the indexed encoding")
        return self

    @property
    def rates(self) -> MutationRates:
        return MutationRates(p_mutate=self.p_mutate, p_add=self.p_add, p_del=self.p_del)

    @property
    def maximize(self) -> bool:
        return self.fitness_metric == "cv_auc"


def worst_fitness(maximize: bool) -> float:
    return -math.inf if maximize else math.inf


def rank_key(value: float, terms: tuple[int, ...], maximize: bool) -> tuple:
    """
    Sort key where smaller is better.

    Fitness first, then smaller model size, then the lexicographically
    smaller term set.
    """
    if not math.isfinite(value):
        value = worst_fitness(maximize)
    return (-value if maximize else value, len(terms), terms)


class FitnessEvaluator:
    """
    Cross-validated fitness of term sets, cached by sorted term set.

    A fit that stops on separation is scored from its capped coefficients
    and remembered as separated. Any other non-converged fit, or a
    non-finite value, is a failure: cached as NaN and re-raised on every
    lookup.
    """

    def __init__(
        self,
        dataset: Dataset,
        space: PredictorSpace,
        folds: np.ndarray,
        metric: str,
        max_iter: int = defaults.IRLS_MAX_ITER,
        tol: float = defaults.IRLS_TOL,
        cache: Optional[FitnessCache] = None
    ):
        self.dataset = dataset
        self.space = space
        self.folds = folds
        self.metric = normalize_metric(metric)
        self.max_iter = max_iter
        self.tol = tol
        self.cache = cache or FitnessCache(scope="memory")
        self.evaluations = 0

    def __call__(self, terms: tuple[int, ...]) -> float:
        cached = self.cache.get(terms)
        if cached is not None:
            if math.isnan(cached):
                raise FitnessEvaluationError(f"Term set {terms} previously failed to fit")
            return cached

        self.evaluations += 1
        try:
            result = cv_fitness(
                self.dataset, terms, self.folds, self.metric,
                space=self.space, max_iter=self.max_iter, tol=self.tol
            )
            if result.unconverged_folds:
                raise FitnessEvaluationError(
                    f"IRLS did not converge for term set {terms} "
                    f"(folds {list(result.unconverged_folds)})"
                )
            if not math.isfinite(result.mean_value):
                raise FitnessEvaluationError(f"Non-finite fitness for term set {terms}")
        except (FitnessEvaluationError, ValueError):
            self.cache.put(terms, float("nan"))
            raise
        if result.separated:
            logger.debug(
                "Term set %s scored from separated fits (folds %s)",
                terms, list(result.separated_folds)
            )
        self.cache.put(terms, result.mean_value, separated=result.separated)
        return result.mean_value

    def is_separated(self, terms: tuple[int, ...]) -> bool:
        return self.cache.is_separated(terms)


def evaluate_population(
    population: Sequence[Chromosome],
    fitness_fn: FitnessFn,
    maximize: bool,
    workers: int = 1
) -> tuple[list[float], int]:
    """
    Fitness of every member, placed by member position.

    A member whose evaluation raises receives the worst possible fitness.
    Returns the values and the number of failed members.
    """
    term_sets = [c.active_terms() for c in population]
    unique = list(dict.fromkeys(term_sets))

    def evaluate(terms: tuple[int, ...]) -> Optional[float]:
        try:
            return float(fitness_fn(terms))
        except Exception as e:
            logger.debug("Fitness evaluation failed for %s: %s", terms, e)
            return None

    if workers > 1 and len(unique) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(evaluate, unique))
    else:
        results = [evaluate(terms) for terms in unique]

    by_terms = dict(zip(unique, results))
    values = []
    failures = 0
    for terms in term_sets:
        value = by_terms[terms]
        if value is None or math.isnan(value):
            failures += 1
            value = worst_fitness(maximize)
        values.append(value)
    return values, failures


def tournament_select(
    population: Sequence[Chromosome],
    fitness_values: Sequence[float],
    tournament_size: int,
    rng: np.random.Generator,
    maximize: bool = True
) -> int:
    """
    Index of the fittest of tournament_size members drawn without
    replacement; ties go to the lowest index.
    """
    n = len(population)
    if n == 0:
        raise ValueError("Cannot select from an empty population")
    if len(fitness_values) != n:
        raise ValueError(f"{len(fitness_values)} fitness values for {n} members")
    if not 1 <= tournament_size <= n:
        raise ValueError(f"tournament_size must be within 1..{n}, got {tournament_size}")

    def score(i: int) -> float:
        value = fitness_values[i]
        if not math.isfinite(value):
            value = worst_fitness(maximize)
        return value if maximize else -value

    entrants = np.sort(rng.choice(n, size=tournament_size, replace=False))
    winner = int(entrants[0])
    for i in entrants[1:]:
        if score(int(i)) > score(winner):
            winner = int(i)
    return winner


def step_generation(
    population: Sequence[Chromosome],
    config: GaConfig,
    fitness_fn: FitnessFn,
    rng: np.random.Generator,
    generation: int = 0
) -> tuple[list[Chromosome], GenerationStats]:
    """
    Produce the next generation.

    The elite_count best members are copied unchanged. The remaining slots
    are filled pairwise: two tournament winners are crossed over with
    probability p_crossover (otherwise copied) and every offspring is
    mutated with its own random stream. An odd final slot takes one of the
    pair by a fair coin.
    """
    start = time.perf_counter()
    n = len(population)
    maximize = config.maximize
    values, failures = evaluate_population(population, fitness_fn, maximize, config.workers)
    term_sets = [c.active_terms() for c in population]
    is_separated = getattr(fitness_fn, "is_separated", None)
    separated = sum(1 for terms in term_sets if is_separated(terms)) if is_separated else 0
    order = sorted(range(n), key=lambda i: rank_key(values[i], term_sets[i], maximize))
    best = order[0]
    finite = [v for v in values if math.isfinite(v)]

    log = OperatorLog()
    rates = config.rates
    next_population = [population[i] for i in order[:config.elite_count]]
    remaining = n - config.elite_count
    offspring: list[Chromosome] = []

    while len(offspring) < remaining:
        i = tournament_select(population, values, config.tournament_size, rng, maximize)
        j = tournament_select(population, values, config.tournament_size, rng, maximize)
        if rng.random() < config.p_crossover:
            first, second = crossover(population[i], population[j], rng=rng, log=log)
        else:
            first, second = population[i], population[j]
        streams = rng.integers(0, 2**63, size=2)
        first = mutate(first, rates, np.random.default_rng(int(streams[0])), log=log)
        second = mutate(second, rates, np.random.default_rng(int(streams[1])), log=log)
        if remaining - len(offspring) == 1:
            offspring.append(first if rng.random() < 0.5 else second)
        else:
            offspring.extend((first, second))

    next_population.extend(offspring)
    stats = GenerationStats(
        generation=generation,
        best_fitness=values[best],
        mean_fitness=float(np.mean(finite)) if finite else float("nan"),
        best_model_size=len(term_sets[best]),
        repair_overflows=log.repair_overflows,
        evaluation_failures=failures,
        separated_fits=separated,
        skipped_mutations=log.skipped_mutations,
        elapsed=time.perf_counter() - start,
    )
    return next_population, stats


def initial_population(
    config: GaConfig,
    space: PredictorSpace,
    seed_sequence: np.random.SeedSequence,
    seed_terms: Sequence[int] = (),
    log: Optional[OperatorLog] = None
) -> list[Chromosome]:
    """
    One independent stream per member. Member 0 carries the seed terms,
    if any.
    """
    population = []
    for position, child in enumerate(seed_sequence.spawn(config.population_size)):
        member_rng = np.random.default_rng(child)
        seeds = seed_terms if position == 0 and seed_terms else None
        if config.encoding == "standard":
            member = init_standard(space, config.init_density, seeds=seeds, rng=member_rng, log=log)
        else:
            member = init_indexed(space, config.max_length, seeds=seeds, rng=member_rng, log=log)
        population.append(member)
    return population


class _BestTracker:
    """Best member seen across all generations."""

    def __init__(self, maximize: bool):
        self.maximize = maximize
        self.key = None
        self.chromosome: Optional[Chromosome] = None
        self.value = worst_fitness(maximize)

    def update(self, population: Sequence[Chromosome], values: Sequence[float]) -> None:
        for member, value in zip(population, values):
            key = rank_key(value, member.active_terms(), self.maximize)
            if self.key is None or key < self.key:
                self.key, self.chromosome, self.value = key, member, value


def validate_dataset(dataset: Dataset) -> None:
    if dataset.response.min() == dataset.response.max():
        raise ValueError(
            f"Degenerate dataset: response is constant ({int(dataset.response[0])}) "
            f"across all {dataset.n_rows} rows"
        )


def run(
    config: GaConfig,
    dataset: Dataset,
    cache_path: Optional[str] = None,
    checkpoint_path: Optional[str] = None,
    resume_from: Optional[str] = None
) -> RunReport:
    """
    Run the GA for config.generations generations and report the best-ever
    member, refitted on the full data.

    Raises:
        ValueError: If the dataset is degenerate or does not match the config
    """
    validate_dataset(dataset)
    start = time.perf_counter()

    space = PredictorSpace(dataset.n_main, config.include_interactions, dataset.column_names)
    folds = make_folds(dataset.n_rows, config.cv_folds, config.rng_seed)
    digest = fold_digest(folds)
    scope = f"{dataset.fingerprint}:{digest}:{config.fitness_metric}:{config.max_iter}:{config.tol}"
    evaluator = FitnessEvaluator(
        dataset, space, folds, config.fitness_metric,
        max_iter=config.max_iter, tol=config.tol,
        cache=FitnessCache(scope, cache_path),
    )
    maximize = config.maximize
    seed_terms = space.parse_terms(config.seed_terms) if config.seed_terms else ()

    init_sequence, loop_sequence = np.random.SeedSequence(config.rng_seed).spawn(2)
    init_log = OperatorLog()
    population = initial_population(config, space, init_sequence, seed_terms, init_log)
    rng = np.random.default_rng(loop_sequence)
    history: list[GenerationStats] = []
    best = _BestTracker(maximize)
    first_generation = 0

    if resume_from:
        state = load_checkpoint(resume_from)
        _check_resumable(state["config"], config)
        population = [chromosome_from_text(text, space, config.encoding) for text in state["population"]]
        rng.bit_generator.state = state["rng_state"]
        history = [GenerationStats.from_dict(s) for s in state["history"]]
        if state.get("best") is not None:
            best.update(
                [chromosome_from_text(state["best"]["chromosome"], space, config.encoding)],
                [float(state["best"]["value"])],
            )
        first_generation = int(state["generation"])
        logger.info("Resuming from generation %d (%s)", first_generation, resume_from)

    for generation in range(first_generation, config.generations):
        values, _ = evaluate_population(population, evaluator, maximize, config.workers)
        best.update(population, values)
        population, stats = step_generation(population, config, evaluator, rng, generation)
        if generation == 0:
            stats.repair_overflows += init_log.repair_overflows
        history.append(stats)
        logger.debug(
            "Generation %d: best %.4f mean %.4f size %d",
            generation, stats.best_fitness, stats.mean_fitness, stats.best_model_size
        )
        if checkpoint_path and config.checkpoint_every and (generation + 1) % config.checkpoint_every == 0:
            save_checkpoint(checkpoint_path, {
                "config": config.model_dump(),
                "generation": generation + 1,
                "rng_state": rng.bit_generator.state,
                "population": [c.to_text() for c in population],
                "history": [s.to_dict() for s in history],
                "best": {"chromosome": best.chromosome.to_text(), "value": best.value},
            })

    values, _ = evaluate_population(population, evaluator, maximize, config.workers)
    best.update(population, values)

    terms = best.chromosome.active_terms()
    names = [space.term_name(t) for t in terms]
    fit = fit_logistic(
        design_matrix(dataset, terms, space), dataset.response,
        max_iter=config.max_iter, tol=config.tol,
    )
    final_fit = fit.to_dict()
    final_fit["null_deviance"] = null_deviance(dataset.response)
    final_fit["residual_deviance"] = fit.deviance
    elapsed = time.perf_counter() - start
    logger.info(
        "Run finished: %d terms, %s %.4f, %d evaluations, %.2fs",
        len(terms), config.fitness_metric, best.value, evaluator.evaluations, elapsed
    )

    return RunReport(
        config=config.model_dump(),
        encoding=config.encoding,
        metric=config.fitness_metric,
        best_chromosome=best.chromosome.to_text(),
        active_terms=list(terms),
        term_names=names,
        best_fitness=best.value,
        final_fit=final_fit,
        coefficient_table=coefficient_table(fit, names),
        history=history,
        fold_digest=digest,
        n_main=space.n_main,
        # Generation 0 stats already include the initialization overflows.
        repair_overflows=sum(s.repair_overflows for s in history) or init_log.repair_overflows,
        evaluation_failures=sum(s.evaluation_failures for s in history),
        separated_fits=sum(s.separated_fits for s in history),
        total_seconds=elapsed,
        run_times=[elapsed],
    )


def _check_resumable(saved: dict, config: GaConfig) -> None:
    current = config.model_dump()
    mismatched = [
        key for key in current
        if key not in ("generations", "workers", "checkpoint_every") and saved.get(key) != current[key]
    ]
    if mismatched:
        raise ValueError(f"Checkpoint config differs from the current config in: {mismatched}")
