"""Scoring machinery: component alignment, zero-pattern counts, model error,
replication aggregation, and cross-validated prediction error.

Mixture components are only identified up to relabeling, so every metric
that compares an estimate against a reference first aligns components by
minimizing the summed squared coefficient distance over all permutations.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import NumericalError
from .params import Dataset, MixtureParams

logger = logging.getLogger(__name__)

# |beta| at or below this counts as a declared zero when scoring patterns.
# Distinct from the EM freeze threshold: fitted zeros are exact by
# construction, so this only guards numeric noise in externally supplied
# estimates.
ZERO_DECISION_TOL = 1e-4


def align_components(estimate: MixtureParams, reference: MixtureParams):
    """Permutation aligning estimate components to the reference.

    Returns ``perm`` such that ``estimate.permuted(perm)`` matches the
    reference ordering; minimizes the total squared coefficient distance,
    ties resolved toward the identity-closest permutation.
    """
    m = reference.n_components
    if estimate.n_components != m or estimate.n_coefficients != reference.n_coefficients:
        raise ValueError("estimate and reference have different shapes")
    best_perm, best_cost = None, np.inf
    for perm in itertools.permutations(range(m)):
        cost = float(
            np.sum((estimate.coefficients[list(perm)] - reference.coefficients) ** 2)
        )
        if cost < best_cost:
            best_perm, best_cost = perm, cost
    return best_perm


@dataclass(frozen=True, eq=False)
class ZeroPatternScore:
    """Per-component zero/nonzero bookkeeping for slope coefficients."""

    correct_zeros: np.ndarray  # (m,) int
    incorrect_zeros: np.ndarray  # (m,) int
    exact_model: np.ndarray  # (m,) bool


def count_zero_pattern(beta_hat: np.ndarray, beta_true: np.ndarray, tol: float = ZERO_DECISION_TOL) -> ZeroPatternScore:
    """Count correct and incorrect zero declarations among slopes.

    Intercepts (first column) are excluded.  A slope is declared zero when
    its magnitude is at most ``tol``.
    """
    beta_hat = np.atleast_2d(np.asarray(beta_hat, dtype=float))
    beta_true = np.atleast_2d(np.asarray(beta_true, dtype=float))
    if beta_hat.shape != beta_true.shape:
        raise ValueError(f"shape mismatch: {beta_hat.shape} vs {beta_true.shape}")
    hat_zero = np.abs(beta_hat[:, 1:]) <= tol
    true_zero = beta_true[:, 1:] == 0.0
    correct = (hat_zero & true_zero).sum(axis=1)
    incorrect = (hat_zero & ~true_zero).sum(axis=1)
    exact = (correct == true_zero.sum(axis=1)) & (incorrect == 0)
    return ZeroPatternScore(correct_zeros=correct, incorrect_zeros=incorrect, exact_model=exact)


def model_error(beta_hat: np.ndarray, beta_true: np.ndarray, exx: np.ndarray) -> np.ndarray:
    """Quadratic form (b_hat - b_true)' E(xx') (b_hat - b_true), per component."""
    beta_hat = np.atleast_2d(np.asarray(beta_hat, dtype=float))
    beta_true = np.atleast_2d(np.asarray(beta_true, dtype=float))
    exx = np.asarray(exx, dtype=float)
    if beta_hat.shape != beta_true.shape:
        raise ValueError(f"shape mismatch: {beta_hat.shape} vs {beta_true.shape}")
    if exx.shape != (beta_hat.shape[1], beta_hat.shape[1]):
        raise ValueError(f"second-moment matrix must be {beta_hat.shape[1]}x{beta_hat.shape[1]}")
    if np.max(np.abs(exx - exx.T)) > 1e-10:
        raise ValueError("second-moment matrix must be symmetric")
    diff = beta_hat - beta_true
    return np.einsum("ji,ik,jk->j", diff, exx, diff)


@dataclass(frozen=True, eq=False)
class CellAggregate:
    """Aggregates of one study cell over its successful replications."""

    mean_correct_zeros: np.ndarray
    mean_incorrect_zeros: np.ndarray
    median_model_error: np.ndarray
    model_accuracy: np.ndarray
    n_replications: int


def aggregate_replications(scores: Sequence[tuple]) -> CellAggregate:
    """Combine per-replication (ZeroPatternScore, model-error vector) pairs."""
    if not scores:
        raise ValueError("no replications to aggregate")
    correct = np.array([s.correct_zeros for s, _ in scores], dtype=float)
    incorrect = np.array([s.incorrect_zeros for s, _ in scores], dtype=float)
    exact = np.array([s.exact_model for s, _ in scores], dtype=float)
    errors = np.array([e for _, e in scores], dtype=float)
    return CellAggregate(
        mean_correct_zeros=correct.mean(axis=0),
        mean_incorrect_zeros=incorrect.mean(axis=0),
        median_model_error=np.median(errors, axis=0),
        model_accuracy=exact.mean(axis=0),
        n_replications=len(scores),
    )


def mixture_mean_prediction(theta: MixtureParams, X: np.ndarray) -> np.ndarray:
    """Point prediction E(y|x) = sum_j pi_j x' beta_j under the fitted model."""
    return np.asarray(X, dtype=float) @ (theta.coefficients.T @ theta.proportions)


def top_component_prediction(theta: MixtureParams, X: np.ndarray) -> np.ndarray:
    """Prediction from the highest-proportion component alone."""
    j = int(np.argmax(theta.proportions))
    return np.asarray(X, dtype=float) @ theta.coefficients[j]


_PREDICTORS = {
    "mixture_mean": mixture_mean_prediction,
    "top_component": top_component_prediction,
}


def kfold_partition(n: int, k: int, rng: np.random.Generator) -> list[np.ndarray]:
    """Random partition into k folds whose sizes differ by at most one."""
    order = rng.permutation(n)
    return [np.sort(fold) for fold in np.array_split(order, k)]


def _holdout_mspe(data: Dataset, m: int, method, train: np.ndarray, test: np.ndarray, seed: int):
    theta = method.fit_subset(data, train, m, seed)
    pred = _PREDICTORS[getattr(method, "prediction", "mixture_mean")](theta, data.design[test])
    return float(np.mean((data.responses[test] - pred) ** 2)), test.size


def kfold_cv_error(data: Dataset, m: int, method, k: int, rng: np.random.Generator) -> float:
    """Mean squared prediction error under k-fold cross-validation.

    Folds whose fit fails numerically are skipped (and logged); more than
    half skipped is an error.
    """
    if k < 2:
        raise ValueError("k must be at least 2")
    if data.n_rows < k:
        raise ValueError("need at least k rows")
    folds = kfold_partition(data.n_rows, k, rng)
    all_rows = np.arange(data.n_rows)
    sq_sum, n_pred, skipped = 0.0, 0, 0
    for i, test in enumerate(folds):
        train = np.setdiff1d(all_rows, test)
        try:
            mspe, size = _holdout_mspe(data, m, method, train, test, seed=i)
        except (NumericalError, np.linalg.LinAlgError) as exc:
            skipped += 1
            logger.warning("fold %d skipped: %s", i, exc)
            continue
        sq_sum += mspe * size
        n_pred += size
    if skipped > k // 2:
        raise NumericalError(f"{skipped} of {k} folds failed to fit")
    return sq_sum / n_pred


def mccv_error(data: Dataset, m: int, method, d: int, reps: int, rng: np.random.Generator) -> float:
    """Monte-Carlo cross-validation: repeated random holdout of d rows."""
    n = data.n_rows
    if not 1 <= d < n:
        raise ValueError("d must satisfy 1 <= d < n")
    if reps < 1:
        raise ValueError("reps must be at least 1")
    errors, skipped = [], 0
    for t in range(reps):
        test = np.sort(rng.choice(n, size=d, replace=False))
        train = np.setdiff1d(np.arange(n), test)
        try:
            mspe, _ = _holdout_mspe(data, m, method, train, test, seed=t)
        except (NumericalError, np.linalg.LinAlgError) as exc:
            skipped += 1
            logger.warning("holdout %d skipped: %s", t, exc)
            continue
        errors.append(mspe)
    if skipped > reps // 2:
        raise NumericalError(f"{skipped} of {reps} holdouts failed to fit")
    return float(np.mean(errors))
