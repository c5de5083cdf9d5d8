"""
Logistic-regression fitness: design assembly, IRLS fitting, AIC, AUC and
k-fold cross-validated model fitness.
"""
import hashlib
import logging
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy import linalg
from scipy.special import expit
from scipy.stats import norm, rankdata

from .config import IRLS_MAX_ITER, IRLS_TOL, RIDGE, SCORE_TOL, SEPARATION_THRESHOLD
from .models import CvFitness, Dataset, FitResult
from .predictor_space import PredictorSpace

logger = logging.getLogger(__name__)

METRICS = ("auc", "aic")

# Allowed log-likelihood decrease per IRLS step (floating-point slack).
LOGLIK_SLACK = 1e-10


class FitnessEvaluationError(RuntimeError):
    """Raised when a term set cannot be given a cross-validated fitness."""
    pass


def normalize_metric(metric: str) -> str:
    name = metric.lower().removeprefix("cv_")
    if name not in METRICS:
        raise ValueError(f"Unknown fitness metric '{metric}'. Choose from {METRICS}")
    return name


def design_matrix(
    dataset: Dataset,
    terms: Iterable[int],
    space: PredictorSpace
) -> np.ndarray:
    """
    Intercept column followed by one column per term in ascending id order.

    Interaction columns are the elementwise product of their parents'
    (standardized, if enabled) main-effect columns.
    """
    if dataset.n_rows < 1:
        raise ValueError("Cannot build a design matrix for an empty dataset")
    if dataset.n_main != space.n_main:
        raise ValueError(
            f"Dataset has {dataset.n_main} predictors but the space expects {space.n_main}"
        )
    ordered = sorted(set(int(t) for t in terms))
    for t in ordered:
        if not space.is_valid(t):
            raise ValueError(f"Term id {t} outside 1..{space.total_terms}")

    base = dataset.model_matrix
    mains = np.array([t for t in ordered if t <= space.n_main], dtype=np.int64)
    pairs = [t for t in ordered if t > space.n_main]

    X = np.empty((dataset.n_rows, 1 + len(ordered)), dtype=np.float64)
    X[:, 0] = 1.0
    X[:, 1:1 + mains.size] = base[:, mains - 1]
    if pairs:
        first, second = space.interaction_columns(pairs)
        X[:, 1 + mains.size:] = base[:, first] * base[:, second]
    return X


def log_likelihood(y: np.ndarray, eta: np.ndarray) -> float:
    return float(np.sum(y * eta - np.logaddexp(0.0, eta)))


def _solve_spd(matrix: np.ndarray, rhs: np.ndarray) -> tuple[np.ndarray, bool]:
    """Cholesky solve, falling back to a small ridge when the matrix is singular."""
    try:
        return linalg.cho_solve(linalg.cho_factor(matrix), rhs), False
    except linalg.LinAlgError:
        pass
    ridged = matrix + RIDGE * np.eye(matrix.shape[0])
    try:
        solution = linalg.cho_solve(linalg.cho_factor(ridged), rhs)
    except linalg.LinAlgError:
        solution = np.linalg.lstsq(ridged, rhs, rcond=None)[0]
    logger.debug("Weighted normal equations singular; ridge %.0e applied", RIDGE)
    return solution, True


def fit_logistic(
    X: np.ndarray,
    y: np.ndarray,
    max_iter: int = IRLS_MAX_ITER,
    tol: float = IRLS_TOL,
    separation_threshold: float = SEPARATION_THRESHOLD,
    score_tol: float = SCORE_TOL
) -> FitResult:
    """
    Fit a logistic regression by Fisher scoring (IRLS).

    Iterates until the largest relative coefficient change drops below tol
    and the score vector is below score_tol, or max_iter is reached. A step
    that would lower the log-likelihood is halved until it does not.

    Raises:
        ValueError: If shapes disagree or the response has a single class
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise ValueError(f"Design matrix {X.shape} does not match response length {y.shape[0]}")
    if y.size == 0 or y.min() == y.max():
        raise ValueError("Response must contain both classes to fit a logistic regression")

    beta = np.zeros(X.shape[1])
    eta = X @ beta
    loglik = log_likelihood(y, eta)
    trace = [loglik]
    ridge_used = False
    converged = False
    iterations = 0

    for iterations in range(1, max_iter + 1):
        mu = expit(eta)
        weights = mu * (1.0 - mu)
        score = X.T @ (y - mu)
        information = (X * weights[:, None]).T @ X
        step, ridged = _solve_spd(information, score)
        ridge_used |= ridged

        scale = 1.0
        for _ in range(40):
            candidate = beta + scale * step
            candidate_eta = X @ candidate
            candidate_loglik = log_likelihood(y, candidate_eta)
            if candidate_loglik + LOGLIK_SLACK >= loglik:
                break
            scale *= 0.5
        else:
            # No step improves the fit; treat as a stall.
            break

        change = np.max(np.abs(candidate - beta) / np.maximum(np.abs(candidate), 1.0))
        beta, eta, loglik = candidate, candidate_eta, candidate_loglik
        trace.append(loglik)

        if change < tol:
            score_norm = float(np.max(np.abs(X.T @ (y - expit(eta)))))
            if score_norm < score_tol:
                converged = True
                break

    mu = expit(eta)
    weights = mu * (1.0 - mu)
    score_norm = float(np.max(np.abs(X.T @ (y - mu))))
    if not converged and score_norm < score_tol:
        converged = True
    information = (X * weights[:, None]).T @ X
    covariance, ridged = _solve_spd(information, np.eye(X.shape[1]))
    with np.errstate(invalid="ignore"):
        standard_errors = np.sqrt(np.diag(covariance))

    separation = bool(np.any(np.abs(beta) > separation_threshold))
    if not converged:
        logger.debug(
            "IRLS stopped after %d iterations without converging (score %.2e)",
            iterations, score_norm
        )

    return FitResult(
        coefficients=beta,
        standard_errors=standard_errors,
        log_likelihood=loglik,
        converged=converged,
        iterations=iterations,
        separation_flag=separation,
        ridge_used=ridge_used or ridged,
        score_norm=score_norm,
        loglik_trace=tuple(trace),
    )


def aic(fit: FitResult) -> float:
    """2k - 2 log-likelihood, k counting the intercept."""
    return 2.0 * fit.n_parameters - 2.0 * fit.log_likelihood


def null_deviance(y: np.ndarray) -> float:
    y = np.asarray(y, dtype=np.float64)
    p = y.mean()
    if p in (0.0, 1.0):
        return 0.0
    return float(-2.0 * (y.sum() * np.log(p) + (y.size - y.sum()) * np.log(1.0 - p)))


def auc(scores: Sequence[float], labels: Sequence[int]) -> float:
    """
    Area under the ROC curve via the rank-sum (Mann-Whitney) statistic.

    Ties between a positive and a negative count one half.
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    if scores.shape != labels.shape:
        raise ValueError(f"scores {scores.shape} and labels {labels.shape} differ in shape")
    positive = labels == 1
    n_pos = int(positive.sum())
    n_neg = labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUC needs both classes present in labels")
    ranks = rankdata(scores)
    u = ranks[positive].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def make_folds(n_rows: int, k: int, seed: int) -> np.ndarray:
    """Fold id (0..k-1) per row; a seeded permutation dealt round-robin."""
    if k < 1:
        raise ValueError(f"Number of folds must be >= 1, got {k}")
    if k > n_rows:
        raise ValueError(f"Cannot split {n_rows} rows into {k} folds")
    order = np.random.default_rng(seed).permutation(n_rows)
    folds = np.empty(n_rows, dtype=np.int64)
    folds[order] = np.arange(n_rows) % k
    return folds


def fold_digest(folds: np.ndarray) -> str:
    return hashlib.sha256(np.asarray(folds, dtype=np.int64).tobytes()).hexdigest()


def cv_fitness(
    dataset: Dataset,
    terms: Iterable[int],
    folds: np.ndarray,
    metric: str,
    space: Optional[PredictorSpace] = None,
    max_iter: int = IRLS_MAX_ITER,
    tol: float = IRLS_TOL
) -> CvFitness:
    """
    Fit on every fold's complement and score the held-out fold.

    For AUC the held-out linear predictor is ranked. For AIC the held-out
    log-likelihood is scaled by n_total / n_fold so fold values sit on the
    full-sample scale, then combined with the training coefficient count.
    A fold whose fit stops on separation is still scored, from the
    coefficients IRLS reached when it stopped.

    Raises:
        FitnessEvaluationError: If no fold could be scored
    """
    metric = normalize_metric(metric)
    space = space or PredictorSpace(dataset.n_main)
    folds = np.asarray(folds)
    if folds.shape != (dataset.n_rows,):
        raise ValueError(f"Fold vector length {folds.shape} does not match {dataset.n_rows} rows")

    X = design_matrix(dataset, terms, space)
    y = dataset.response.astype(np.float64)
    values: list[float] = []
    skipped: list[int] = []
    separated: list[int] = []
    unconverged: list[int] = []

    for fold in np.unique(folds):
        held_out = folds == fold
        train = ~held_out
        y_train = y[train]
        if y_train.size == 0 or y_train.min() == y_train.max():
            logger.warning("Fold %d: training rows hold a single class; fold skipped", fold)
            skipped.append(int(fold))
            continue
        fit = fit_logistic(X[train], y_train, max_iter=max_iter, tol=tol)
        if not fit.converged:
            if fit.separation_flag and np.isfinite(fit.log_likelihood):
                separated.append(int(fold))
            else:
                unconverged.append(int(fold))
        eta = X[held_out] @ fit.coefficients
        y_test = y[held_out]
        if metric == "auc":
            if y_test.min() == y_test.max():
                logger.warning("Fold %d: held-out rows hold a single class; fold skipped", fold)
                skipped.append(int(fold))
                continue
            values.append(auc(eta, y_test))
        else:
            scale = dataset.n_rows / held_out.sum()
            values.append(2.0 * fit.n_parameters - 2.0 * scale * log_likelihood(y_test, eta))

    if not values:
        raise FitnessEvaluationError("No fold could be evaluated")
    return CvFitness(
        metric=metric,
        fold_values=tuple(values),
        mean_value=float(np.mean(values)),
        skipped_folds=tuple(skipped),
        separated_folds=tuple(separated),
        unconverged_folds=tuple(unconverged),
    )


def significance_code(p_value: float) -> str:
    if not np.isfinite(p_value):
        return ""
    for cut, code in ((0.001, "***"), (0.01, "**"), (0.05, "*"), (0.1, ".")):
        if p_value < cut:
            return code
    return ""


def coefficient_table(fit: FitResult, names: Sequence[str]) -> list[dict]:
    """Estimate, standard error, z-value and two-sided p-value per coefficient."""
    labels = ["(Intercept)", *names]
    if len(labels) != fit.n_parameters:
        raise ValueError(f"{len(labels)} labels for {fit.n_parameters} coefficients")
    rows = []
    for label, estimate, se in zip(labels, fit.coefficients, fit.standard_errors):
        with np.errstate(divide="ignore", invalid="ignore"):
            z = float(estimate / se) if se > 0 else float("nan")
        p_value = float(2.0 * norm.sf(abs(z))) if np.isfinite(z) else float("nan")
        rows.append({
            "term": label,
            "estimate": float(estimate),
            "std_error": float(se),
            "z_value": z,
            "p_value": p_value,
            "signif": significance_code(p_value),
        })
    return rows
