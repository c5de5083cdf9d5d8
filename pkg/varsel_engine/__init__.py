"""
Varsel Engine - genetic-algorithm variable selection over main effects and
pairwise interactions, with standard and indexed chromosome encodings.
"""
from .models import Dataset, FitResult, CvFitness, GenerationStats, RunReport
from .predictor_space import PredictorSpace, MainEffect, Interaction, term_count
from .chromosome import (
    StandardChromosome,
    IndexedChromosome,
    MutationRates,
    repair_hierarchy,
    init_standard,
    init_indexed,
    crossover,
    mutate,
)
from .fitness import FitnessEvaluationError, fit_logistic, cv_fitness, auc, aic
from .engine import GaConfig, run, step_generation, tournament_select
from .generator import SimSpec, SimResult, GenerationError, generate, default_true_set
from .ingest import IngestSpec, DatasetError, load_delimited
from .experiment import ExperimentConfig, BenchGrid, BenchCell, ConfigError, load_experiment, load_grid

__all__ = [
    'Dataset',
    'FitResult',
    'CvFitness',
    'GenerationStats',
    'RunReport',
    'PredictorSpace',
    'MainEffect',
    'Interaction',
    'term_count',
    'StandardChromosome',
    'IndexedChromosome',
    'MutationRates',
    'repair_hierarchy',
    'init_standard',
    'init_indexed',
    'crossover',
    'mutate',
    'FitnessEvaluationError',
    'fit_logistic',
    'cv_fitness',
    'auc',
    'aic',
    'GaConfig',
    'run',
    'step_generation',
    'tournament_select',
    'SimSpec',
    'SimResult',
    'GenerationError',
    'generate',
    'default_true_set',
    'IngestSpec',
    'DatasetError',
    'load_delimited',
    'ExperimentConfig',
    'BenchGrid',
    'BenchCell',
    'ConfigError',
    'load_experiment',
    'load_grid',
]
