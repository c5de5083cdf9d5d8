"""
Configuration settings for the variable-selection engine.
"""
import os

# Output settings
DEFAULT_OUT_DIR = os.path.join(os.getcwd(), 'results')

# Worker pool settings
THREADS_ENV_VAR = "GA_VARSEL_THREADS"
DEFAULT_WORKERS = 1

# GA meta-parameters
POPULATION_SIZE = 30
GENERATIONS = 250
P_CROSSOVER = 0.5
P_MUTATE = 0.5
P_ADD = 0.5
P_DEL = 0.5
TOURNAMENT_SIZE = 2
ELITE_COUNT = 1
INIT_DENSITY = 0.5
CHECKPOINT_EVERY = 0  # 0 disables checkpoints

# Fitness settings
CV_FOLDS = 10
IRLS_MAX_ITER = 25
IRLS_TOL = 1e-8
SCORE_TOL = 1e-6
SEPARATION_THRESHOLD = 15.0
RIDGE = 1e-8

# Simulation settings
SIM_SAMPLES = 1000
SIM_NOISE_VARIANCE = 0.02
SIM_THRESHOLD = 2.0
INTERACTION_FRACTION = 0.4


def worker_limit(requested: int | None = None) -> int:
    """
    Resolve the number of workers to use.

    The environment variable caps whatever was requested on the command line.
    """
    workers = requested if requested and requested > 0 else DEFAULT_WORKERS
    cap = os.environ.get(THREADS_ENV_VAR)
    if cap:
        try:
            workers = min(workers, max(1, int(cap)))
        except ValueError:
            pass
    return workers
