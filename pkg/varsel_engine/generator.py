"""
Simulated datasets with a known set of true terms.

Main effects are i.i.d. standard normal. The latent score is the unweighted
sum of the true terms' columns (interaction values are products of their
parents) plus Gaussian noise, and y = 1 iff the latent exceeds a threshold.
"""
import logging
import math
from dataclasses import dataclass
from itertools import combinations
from typing import Optional, Sequence, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .config import INTERACTION_FRACTION, SIM_NOISE_VARIANCE, SIM_SAMPLES, SIM_THRESHOLD
from .models import Dataset
from .predictor_space import Interaction, MainEffect, PredictorSpace, term_count

logger = logging.getLogger(__name__)

RESPONSE_COLUMN = "y"


class GenerationError(ValueError):
    """Raised when a simulation spec or true set cannot be realized."""
    pass


class SimSpec(BaseModel):
    """
    Simulation settings; the `[simulation]` config section.

    Give either `true_terms` (names like "x3", "x1:x5" or ids) or `n_true`
    to have a hierarchical true set drawn.
    """
    model_config = ConfigDict(extra="forbid", frozen=True)

    n_main: int = Field(ge=1)
    n_samples: int = Field(SIM_SAMPLES, ge=1)
    true_terms: list[Union[int, str]] = Field(default_factory=list)
    n_true: Optional[int] = Field(None, ge=1)
    interaction_fraction: float = Field(INTERACTION_FRACTION, ge=0.0, le=1.0)
    noise_variance: float = Field(SIM_NOISE_VARIANCE, ge=0.0)
    threshold: float = SIM_THRESHOLD
    rng_seed: int = Field(0, ge=0, lt=2**64)
    complete_hierarchy: bool = False

    @model_validator(mode="after")
    def _one_truth_source(self) -> 'SimSpec':
        if bool(self.true_terms) == (self.n_true is not None):
            raise ValueError("Give exactly one of true_terms or n_true")
        return self


@dataclass(frozen=True, eq=False)
class SimResult:
    dataset: Dataset
    spec: SimSpec
    true_terms: tuple[int, ...]

    @property
    def positive_rate(self) -> float:
        return self.dataset.positive_rate


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def default_true_set(
    n_main: int,
    n_true: int,
    interaction_fraction: float = INTERACTION_FRACTION,
    rng: Optional[np.random.Generator] = None
) -> tuple[int, ...]:
    """
    Draw a hierarchical true set of exactly n_true terms.

    A pool of main effects is sampled and interactions are drawn from pairs
    within the pool, so every interaction's parents are included. The number
    of interactions is the feasible count closest to
    interaction_fraction * n_true.

    Raises:
        GenerationError: If no hierarchical set of that size exists
    """
    total = term_count(n_main)
    if not 1 <= n_true <= total:
        raise GenerationError(f"n_true must be within 1..{total} for n_main={n_main}, got {n_true}")
    rng = rng or np.random.default_rng()
    target = _round_half_up(interaction_fraction * n_true)

    def feasible(n_pairs: int) -> bool:
        pool = n_true - n_pairs
        return 1 <= pool <= n_main and math.comb(pool, 2) >= n_pairs

    candidates = sorted(range(n_true + 1), key=lambda x: (abs(x - target), x))
    n_pairs = next((x for x in candidates if feasible(x)), None)
    if n_pairs is None:
        raise GenerationError(f"No hierarchical set of {n_true} terms exists for n_main={n_main}")

    space = PredictorSpace(n_main)
    mains = sorted(int(m) for m in rng.choice(n_main, size=n_true - n_pairs, replace=False) + 1)
    pairs = list(combinations(mains, 2))
    chosen = rng.choice(len(pairs), size=n_pairs, replace=False) if n_pairs else []
    interactions = [space.encode(Interaction(*pairs[k])) for k in chosen]
    return tuple(sorted(mains + interactions))


def resolve_true_terms(spec: SimSpec, rng: Optional[np.random.Generator] = None) -> tuple[int, ...]:
    space = PredictorSpace(spec.n_main)
    if spec.n_true is not None:
        return default_true_set(spec.n_main, spec.n_true, spec.interaction_fraction, rng)
    try:
        terms = space.parse_terms(spec.true_terms)
    except ValueError as e:
        raise GenerationError(str(e))
    if not space.is_hierarchical(terms):
        if not spec.complete_hierarchy:
            raise GenerationError(
                f"True terms {[space.term_name(t) for t in terms]} violate strong hierarchy "
                "(set complete_hierarchy to add the missing main effects)"
            )
        terms = space.complete_hierarchy(terms)
    return terms


def term_values(matrix: np.ndarray, term: int, space: PredictorSpace) -> np.ndarray:
    descriptor = space.decode(term)
    if isinstance(descriptor, MainEffect):
        return matrix[:, descriptor.index - 1]
    return matrix[:, descriptor.first - 1] * matrix[:, descriptor.second - 1]


def generate(spec: SimSpec) -> SimResult:
    """Simulate a dataset; deterministic per spec.rng_seed."""
    truth_sequence, data_sequence = np.random.SeedSequence(spec.rng_seed).spawn(2)
    true_terms = resolve_true_terms(spec, np.random.default_rng(truth_sequence))

    rng = np.random.default_rng(data_sequence)
    space = PredictorSpace(spec.n_main)
    matrix = rng.standard_normal((spec.n_samples, spec.n_main))
    latent = np.zeros(spec.n_samples)
    for term in true_terms:
        latent += term_values(matrix, term, space)
    latent += rng.normal(0.0, math.sqrt(spec.noise_variance), size=spec.n_samples)
    response = (latent > spec.threshold).astype(np.int8)

    dataset = Dataset(
        main_matrix=matrix,
        response=response,
        column_names=tuple(f"x{i}" for i in range(1, spec.n_main + 1)),
        standardized=False,
    )
    result = SimResult(dataset=dataset, spec=spec, true_terms=true_terms)
    if result.positive_rate in (0.0, 1.0):
        logger.warning(
            "Simulated response is constant (positive rate %.3f); choose another seed",
            result.positive_rate
        )
    return result


def write_dataset(dataset: Dataset, path: str, delimiter: str = ",") -> None:
    """Write the data in the delimited format read by the ingest module."""
    names = dataset.column_names or tuple(f"x{i}" for i in range(1, dataset.n_main + 1))
    frame = pd.DataFrame(dataset.main_matrix, columns=list(names))
    frame[RESPONSE_COLUMN] = dataset.response.astype(int)
    frame.to_csv(path, sep=delimiter, index=False, float_format="%.17g")


def write_truth(path: str, true_terms: Sequence[int], space: PredictorSpace) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for term in sorted(true_terms):
            handle.write(f"{space.term_name(term)}\n")


def read_truth(path: str, space: PredictorSpace) -> tuple[int, ...]:
    with open(path, encoding="utf-8") as handle:
        names = [line.strip() for line in handle if line.strip() and not line.startswith("#")]
    return space.parse_terms(names)
