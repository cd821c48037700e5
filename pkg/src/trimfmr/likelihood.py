"""Mixture density, log-likelihood, and the penalized objective.

Everything is computed in log space; per-row mixture densities come out of
a log-sum-exp, which keeps rows far from every component (exactly the rows
trimming targets) from underflowing to zero.
"""

from __future__ import annotations

import math
from typing import Optional, Sequence

import numpy as np
from scipy.special import logsumexp

from .params import Dataset, MixtureParams
from .penalties import PenaltySpec, penalty_value

LOG_2PI = math.log(2.0 * math.pi)


def resolve_subset(data: Dataset, subset) -> np.ndarray:
    """Validate an optional row-index subset; None means all rows."""
    if subset is None:
        return np.arange(data.n_rows)
    idx = np.asarray(subset, dtype=int)
    if idx.ndim != 1 or idx.size == 0:
        raise ValueError("subset must be a non-empty 1-d index collection")
    if np.any(idx < 0) or np.any(idx >= data.n_rows):
        raise ValueError("subset indices out of range")
    if np.unique(idx).size != idx.size:
        raise ValueError("subset indices must be distinct")
    return idx


def log_component_density(y: float, x, beta, sigma2: float) -> float:
    """log phi(y; x^T beta, sigma2) for a single observation."""
    if not sigma2 > 0:
        raise ValueError(f"sigma2 must be positive, got {sigma2!r}")
    mu = float(np.dot(np.asarray(x, dtype=float), np.asarray(beta, dtype=float)))
    return -0.5 * (LOG_2PI + math.log(sigma2)) - (y - mu) ** 2 / (2.0 * sigma2)


def component_density(y: float, x, beta, sigma2: float) -> float:
    """Normal density of y given covariates x under one regression component."""
    return math.exp(log_component_density(y, x, beta, sigma2))


def component_log_matrix(data: Dataset, theta: MixtureParams, subset=None) -> np.ndarray:
    """Matrix of log phi(y_i; x_i^T beta_j, sigma_j^2) over subset rows."""
    idx = resolve_subset(data, subset)
    y = data.responses[idx]
    X = data.design[idx]
    means = X @ theta.coefficients.T  # (n, m)
    s2 = theta.variances
    return -0.5 * (LOG_2PI + np.log(s2)) - (y[:, None] - means) ** 2 / (2.0 * s2)


def row_log_mixture(data: Dataset, theta: MixtureParams, subset=None) -> np.ndarray:
    """Per-row log mixture density log f(y_i | x_i, theta)."""
    logs = component_log_matrix(data, theta, subset) + np.log(theta.proportions)
    return logsumexp(logs, axis=1)


def mixture_density(y: float, x, theta: MixtureParams) -> float:
    """Mixture density sum_j pi_j phi(y; x^T beta_j, sigma_j^2)."""
    logs = [
        math.log(theta.proportions[j])
        + log_component_density(y, x, theta.coefficients[j], theta.variances[j])
        for j in range(theta.n_components)
    ]
    return math.exp(logsumexp(logs))


def log_likelihood(data: Dataset, theta: MixtureParams, subset=None) -> float:
    """Observed-data log-likelihood over the subset (all rows by default)."""
    return float(np.sum(row_log_mixture(data, theta, subset)))


def total_penalty(theta: MixtureParams, specs: Sequence[PenaltySpec], n: int) -> float:
    """Sum of penalties over all non-intercept coefficients of all components."""
    if len(specs) != theta.n_components:
        raise ValueError(f"{len(specs)} penalty specs for {theta.n_components} components")
    total = 0.0
    for j, spec in enumerate(specs):
        slopes = theta.coefficients[j, 1:]
        total += float(np.sum(penalty_value(spec, slopes, n)))
    return total


def penalized_objective(
    data: Dataset,
    theta: MixtureParams,
    specs: Sequence[PenaltySpec],
    subset=None,
    penalty_n: Optional[int] = None,
) -> float:
    """Log-likelihood on the subset minus the total penalty.

    The penalty's sample-size scaling defaults to the subset size; pass
    ``penalty_n`` to pin it (e.g. to the full-data row count).
    """
    idx = resolve_subset(data, subset)
    n_pen = idx.size if penalty_n is None else int(penalty_n)
    return log_likelihood(data, theta, idx) - total_penalty(theta, specs, n_pen)
