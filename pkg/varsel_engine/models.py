"""
Data models for the variable-selection engine.
"""
import hashlib
from dataclasses import asdict, dataclass, field
from functools import cached_property
from typing import Optional

import numpy as np


@dataclass(frozen=True, eq=False)
class Dataset:
    """
    Main-effect design matrix plus a binary response.

    Interaction columns are never stored; they are formed on demand from
    `model_matrix`, which holds the (optionally standardized) main effects.
    """
    main_matrix: np.ndarray
    response: np.ndarray
    column_names: Optional[tuple[str, ...]] = None
    standardized: bool = True

    def __post_init__(self):
        matrix = np.array(self.main_matrix, dtype=np.float64)
        if matrix.ndim == 1:
            matrix = matrix.reshape(-1, 1)
        if matrix.ndim != 2 or matrix.shape[0] < 1 or matrix.shape[1] < 1:
            raise ValueError(f"Dataset needs at least one row and column, got shape {matrix.shape}")
        response = np.asarray(self.response)
        if response.shape != (matrix.shape[0],):
            raise ValueError(
                f"Response length {response.shape} does not match {matrix.shape[0]} rows"
            )
        if not np.all(np.isfinite(matrix)):
            raise ValueError("Dataset contains missing or non-finite values")
        if not np.all(np.isin(response, (0, 1))):
            raise ValueError("Response must be binary (0/1)")
        if self.column_names is not None and len(self.column_names) != matrix.shape[1]:
            raise ValueError(
                f"Expected {matrix.shape[1]} column names, got {len(self.column_names)}"
            )
        response = response.astype(np.int8)
        matrix.flags.writeable = False
        response.flags.writeable = False
        object.__setattr__(self, "main_matrix", matrix)
        object.__setattr__(self, "response", response)
        if self.column_names is not None:
            object.__setattr__(self, "column_names", tuple(self.column_names))

    @property
    def n_rows(self) -> int:
        return self.main_matrix.shape[0]

    @property
    def n_main(self) -> int:
        return self.main_matrix.shape[1]

    @property
    def positive_rate(self) -> float:
        return float(self.response.mean())

    @cached_property
    def model_matrix(self) -> np.ndarray:
        """Main-effect columns as used for fitting (centered and scaled if enabled)."""
        if not self.standardized:
            return self.main_matrix
        centered = self.main_matrix - self.main_matrix.mean(axis=0)
        scale = self.main_matrix.std(axis=0, ddof=1) if self.n_rows > 1 else np.ones(self.n_main)
        scale = np.where(scale > 0, scale, 1.0)
        matrix = centered / scale
        matrix.flags.writeable = False
        return matrix

    @cached_property
    def fingerprint(self) -> str:
        digest = hashlib.sha256()
        digest.update(self.main_matrix.tobytes())
        digest.update(self.response.tobytes())
        digest.update(b"std" if self.standardized else b"raw")
        return digest.hexdigest()


@dataclass(frozen=True, eq=False)
class FitResult:
    """Outcome of a logistic-regression fit (intercept first)."""
    coefficients: np.ndarray
    standard_errors: np.ndarray
    log_likelihood: float
    converged: bool
    iterations: int
    separation_flag: bool
    ridge_used: bool = False
    score_norm: float = float("nan")
    loglik_trace: tuple[float, ...] = ()

    @property
    def n_parameters(self) -> int:
        return len(self.coefficients)

    @property
    def aic(self) -> float:
        return 2.0 * self.n_parameters - 2.0 * self.log_likelihood

    @property
    def deviance(self) -> float:
        return -2.0 * self.log_likelihood

    def to_dict(self) -> dict:
        return {
            "coefficients": [float(c) for c in self.coefficients],
            "standard_errors": [float(s) for s in self.standard_errors],
            "log_likelihood": float(self.log_likelihood),
            "aic": float(self.aic),
            "converged": bool(self.converged),
            "iterations": int(self.iterations),
            "separation_flag": bool(self.separation_flag),
            "ridge_used": bool(self.ridge_used),
        }


@dataclass(frozen=True)
class CvFitness:
    """
    Cross-validated fitness: one value per evaluated fold plus their mean.

    Folds whose fit stopped on separation are scored from the capped
    coefficients and listed in separated_folds. Folds whose fit stalled for
    any other reason are listed in unconverged_folds.
    """
    metric: str
    fold_values: tuple[float, ...]
    mean_value: float
    skipped_folds: tuple[int, ...] = ()
    separated_folds: tuple[int, ...] = ()
    unconverged_folds: tuple[int, ...] = ()

    @property
    def converged(self) -> bool:
        return not self.separated_folds and not self.unconverged_folds

    @property
    def separated(self) -> bool:
        return bool(self.separated_folds)


@dataclass
class RepairLog:
    """What a hierarchy repair changed."""
    inserted: list[int] = field(default_factory=list)
    removed: list[int] = field(default_factory=list)

    @property
    def overflows(self) -> int:
        return len(self.removed)


@dataclass
class OperatorLog:
    """Counters collected while applying genetic operators."""
    repair_overflows: int = 0
    skipped_additions: int = 0
    skipped_deletions: int = 0

    def absorb(self, repair: RepairLog) -> None:
        self.repair_overflows += repair.overflows

    @property
    def skipped_mutations(self) -> int:
        return self.skipped_additions + self.skipped_deletions


@dataclass
class GenerationStats:
    """Summary of one evaluated generation."""
    generation: int
    best_fitness: float
    mean_fitness: float
    best_model_size: int
    repair_overflows: int = 0
    evaluation_failures: int = 0
    separated_fits: int = 0
    skipped_mutations: int = 0
    elapsed: float = 0.0

    def to_dict(self, include_timing: bool = True) -> dict:
        data = asdict(self)
        if not include_timing:
            data.pop("elapsed")
        return data

    @classmethod
    def from_dict(cls, data: dict) -> 'GenerationStats':
        return cls(**data)


@dataclass
class RunReport:
    """
    Everything a GA run produces.

    Timing fields (`total_seconds`, `run_times`, per-generation `elapsed`)
    are the only parts that differ between two runs of the same config.
    """
    config: dict
    encoding: str
    metric: str
    best_chromosome: str
    active_terms: list[int]
    term_names: list[str]
    best_fitness: float
    final_fit: dict
    coefficient_table: list[dict]
    history: list[GenerationStats]
    fold_digest: str
    n_main: int
    repair_overflows: int = 0
    evaluation_failures: int = 0
    separated_fits: int = 0
    total_seconds: float = 0.0
    run_times: list[float] = field(default_factory=list)
    truth: Optional[list[str]] = None

    @property
    def model_size(self) -> int:
        return len(self.active_terms)

    @property
    def mean_run_time(self) -> float:
        times = self.run_times or [self.total_seconds]
        return float(sum(times) / len(times))

    def to_dict(self, include_timing: bool = True) -> dict:
        data = {
            "config": self.config,
            "encoding": self.encoding,
            "metric": self.metric,
            "best_chromosome": self.best_chromosome,
            "active_terms": list(self.active_terms),
            "term_names": list(self.term_names),
            "best_fitness": self.best_fitness,
            "final_fit": self.final_fit,
            "coefficient_table": self.coefficient_table,
            "history": [s.to_dict(include_timing) for s in self.history],
            "fold_digest": self.fold_digest,
            "n_main": self.n_main,
            "repair_overflows": self.repair_overflows,
            "evaluation_failures": self.evaluation_failures,
            "separated_fits": self.separated_fits,
            "truth": self.truth,
        }
        if include_timing:
            data["total_seconds"] = self.total_seconds
            data["run_times"] = list(self.run_times)
            data["mean_run_time"] = self.mean_run_time
        return data

    @classmethod
    def from_dict(cls, data: dict) -> 'RunReport':
        return cls(
            config=data["config"],
            encoding=data["encoding"],
            metric=data["metric"],
            best_chromosome=data["best_chromosome"],
            active_terms=[int(t) for t in data["active_terms"]],
            term_names=list(data["term_names"]),
            best_fitness=float(data["best_fitness"]),
            final_fit=data["final_fit"],
            coefficient_table=list(data["coefficient_table"]),
            history=[GenerationStats.from_dict(s) for s in data["history"]],
            fold_digest=data["fold_digest"],
            n_main=int(data["n_main"]),
            repair_overflows=int(data.get("repair_overflows", 0)),
            evaluation_failures=int(data.get("evaluation_failures", 0)),
            separated_fits=int(data.get("separated_fits", 0)),
            total_seconds=float(data.get("total_seconds", 0.0)),
            run_times=[float(t) for t in data.get("run_times", [])],
            truth=data.get("truth"),
        )
