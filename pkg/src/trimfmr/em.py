"""Penalized EM for mixtures of linear regressions.

The M-step handles the nonsmooth penalty through a local quadratic
approximation around the previous iterate, which turns each component's
coefficient update into a weighted ridge solve.  Because the quadratic
majorizes every concave penalty in the menu, the penalized log-likelihood
(with the true penalty, not its approximation) is nondecreasing across
iterations; the fitter asserts this at runtime.

Coordinates whose magnitude falls below the zero threshold are frozen at
exactly zero for the remainder of a run: the quadratic weight is singular
at the origin, so near-zero coordinates leave the approximation instead.
"""

from __future__ import annotations

import dataclasses
import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import MonotonicityError, NumericalError
from .likelihood import LOG_2PI, log_likelihood, resolve_subset, total_penalty
from .params import PROPORTION_FLOOR, Dataset, MixtureParams, Responsibilities
from .penalties import PenaltySpec, ZERO_THRESHOLD, _derivative_scalar

logger = logging.getLogger(__name__)

# Absolute slack allowed in the nondecreasing-objective assertion.
MONOTONICITY_TOL = 1e-7

# Parameter max-norm change treated as a fixed point of the EM map.
FIXED_POINT_TOL = 1e-12

# Unpenalized EM iterations run on each random start before the penalized loop.
WARMUP_ITERATIONS = 5

_JITTER_SCALE = 1e-10
_JITTER_ATTEMPTS = 3


@dataclass(frozen=True)
class EmControls:
    """Knobs for the inner EM loop.

    ``tol`` is the relative change in the penalized objective below which
    the loop stops; ``n_starts`` random initializations are tried (plus an
    explicit one when supplied to the fitter).
    """

    max_iter: int = 500
    tol: float = 1e-8
    n_starts: int = 10
    rng_seed: int = 0
    monotonicity_assert: bool = True

    def __post_init__(self):
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.n_starts < 0:
            raise ValueError("n_starts must be nonnegative")
        if self.rng_seed < 0:
            raise ValueError("rng_seed must be nonnegative")

    def replace(self, **kw) -> "EmControls":
        return dataclasses.replace(self, **kw)


@dataclass(frozen=True, eq=False)
class FitResult:
    """Outcome of one penalized EM fit (best across starts)."""

    theta: MixtureParams
    objective_trace: np.ndarray
    converged: bool
    iterations: int
    active_sets: np.ndarray  # (m, p+1) bool, True where coefficient is nonzero


# ---------------------------------------------------------------------------
# kernels on pre-sliced arrays


def _log_weighted_densities(X, y, theta: MixtureParams) -> np.ndarray:
    """log(pi_j * phi_ij) for the given rows."""
    means = X @ theta.coefficients.T
    s2 = theta.variances
    return (
        np.log(theta.proportions)
        - 0.5 * (LOG_2PI + np.log(s2))
        - (y[:, None] - means) ** 2 / (2.0 * s2)
    )


def _rows_logsumexp(logw: np.ndarray) -> np.ndarray:
    top = logw.max(axis=1)
    finite = np.isfinite(top)
    out = np.full(logw.shape[0], -np.inf)
    if np.all(finite):
        out = top + np.log(np.exp(logw - top[:, None]).sum(axis=1))
    elif np.any(finite):
        sub = logw[finite]
        out[finite] = top[finite] + np.log(np.exp(sub - top[finite, None]).sum(axis=1))
    return out


def _responsibilities(logw: np.ndarray, lse: np.ndarray) -> np.ndarray:
    """Normalized responsibilities; rows that underflowed get uniform weights."""
    m = logw.shape[1]
    bad = ~np.isfinite(lse)
    if np.any(bad):
        logger.warning(
            "e_step: %d row(s) underflowed in every component; assigning uniform responsibilities",
            int(np.count_nonzero(bad)),
        )
        r = np.empty_like(logw)
        good = ~bad
        r[good] = np.exp(logw[good] - lse[good, None])
        r[bad] = 1.0 / m
        return r
    return np.exp(logw - lse[:, None])


def _floored_simplex_argmax(weights: np.ndarray, floor: float) -> np.ndarray:
    """Maximize sum_j w_j log(pi_j) over the simplex with pi_j >= floor.

    Water-filling: entries pinned at the floor, the rest proportional to
    their weights over the remaining mass.  Returning the exact constrained
    maximizer (rather than clip-and-renormalize) keeps the EM ascent exact.
    """
    m = weights.shape[0]
    if m == 1:
        return np.ones(1)
    if m * floor > 1.0:
        raise ValueError("proportion floor infeasible for this many components")
    free = np.ones(m, dtype=bool)
    pi = np.empty(m)
    for _ in range(m):
        wsum = weights[free].sum()
        mass = 1.0 - floor * np.count_nonzero(~free)
        if wsum <= 0.0:
            pi[free] = mass / np.count_nonzero(free)
        else:
            pi[free] = weights[free] * (mass / wsum)
        pi[~free] = floor
        violating = free & (pi < floor)
        if not violating.any():
            break
        free &= ~violating
    pi[~free] = floor
    return pi


def _beta_update(X, y, w, sigma2, beta_prev, spec: PenaltySpec, rn_pen: float) -> np.ndarray:
    """LQA-penalized weighted least squares on pre-sliced rows."""
    d = X.shape[1]
    active = np.ones(d, dtype=bool)
    if spec.lam > 0:
        active[1:] = np.abs(beta_prev[1:]) >= ZERO_THRESHOLD
    Xa = X if active.all() else X[:, active]
    Xw = w[:, None] * Xa
    G = Xa.T @ Xw
    rhs = Xw.T @ y
    nact = G.shape[0]
    dvec = np.zeros(nact)
    if spec.lam > 0:
        pos = 0
        for k in range(d):
            if not active[k]:
                continue
            if k >= 1:
                b0 = abs(beta_prev[k])
                dvec[pos] = _derivative_scalar(spec, b0, rn_pen) / b0
            pos += 1
        G[np.diag_indices_from(G)] += sigma2 * dvec

    sol = _solve_with_jitter(G, rhs)
    beta = np.zeros(d)
    beta[active] = sol

    # Exact solve of a concave quadratic: objective cannot decrease versus
    # beta_prev beyond numerical noise.  A violation means the solve failed.
    prev_a = beta_prev[active]
    q_new = _quadratic_objective(Xa, y, w, sol, sigma2, dvec)
    q_prev = _quadratic_objective(Xa, y, w, prev_a, sigma2, dvec)
    if q_new < q_prev - 1e-7 * (1.0 + abs(q_prev)):
        raise NumericalError(
            f"coefficient update decreased its quadratic objective ({q_prev} -> {q_new}); "
            "the normal-equations solve is unreliable on this data"
        )
    return beta


def _quadratic_objective(Xa, y, w, beta_a, sigma2, dvec) -> float:
    resid = y - Xa @ beta_a
    return float(-(w @ resid**2) / (2.0 * sigma2) - 0.5 * np.sum(dvec * beta_a**2))


def _solve_with_jitter(G: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    work = G
    bump = _JITTER_SCALE * np.trace(G) / max(G.shape[0], 1)
    if bump <= 0:
        bump = _JITTER_SCALE
    for attempt in range(_JITTER_ATTEMPTS + 1):
        try:
            sol = np.linalg.solve(work, rhs)
            if np.all(np.isfinite(sol)):
                return sol
        except np.linalg.LinAlgError:
            pass
        if attempt < _JITTER_ATTEMPTS:
            if work is G:
                work = G.copy()
            work[np.diag_indices_from(work)] += bump
    raise NumericalError("singular normal equations persisted through jitter retries")


def _em_iteration(X, y, specs, theta: MixtureParams, rn_pen: float, sigma2_floor: float, r: np.ndarray) -> MixtureParams:
    """M-step given responsibilities; near-zero slopes snapped to exact zeros."""
    m = theta.n_components
    pi = _floored_simplex_argmax(r.mean(axis=0), PROPORTION_FLOOR)
    beta = np.empty_like(theta.coefficients)
    s2 = np.empty(m)
    for j in range(m):
        w = r[:, j]
        bj = _beta_update(X, y, w, theta.variances[j], theta.coefficients[j], specs[j], rn_pen)
        if specs[j].lam > 0:
            small = np.abs(bj[1:]) < ZERO_THRESHOLD
            bj[1:][small] = 0.0
        beta[j] = bj
        total = w.sum()
        if not total > 0:
            raise NumericalError("responsibility column sums to zero")
        resid = y - X @ bj
        s2[j] = max(float((w @ resid**2) / total), sigma2_floor)
    return MixtureParams(pi, beta, s2)


def _em_run(
    data: Dataset,
    idx: np.ndarray,
    specs: Sequence[PenaltySpec],
    theta0: MixtureParams,
    controls: EmControls,
    penalty_n: int,
):
    X = data.design[idx]
    y = data.responses[idx]
    rn_pen = math.sqrt(penalty_n)
    floor = data.sigma2_floor

    theta = theta0
    trace = []
    obj_prev = None
    delta = np.inf
    converged = False
    iterations = 0
    for it in range(controls.max_iter + 1):
        logw = _log_weighted_densities(X, y, theta)
        lse = _rows_logsumexp(logw)
        obj = float(lse.sum()) - total_penalty(theta, specs, penalty_n)
        trace.append(obj)
        if obj_prev is not None:
            if controls.monotonicity_assert and obj < obj_prev - MONOTONICITY_TOL:
                raise MonotonicityError(
                    f"penalized objective decreased at iteration {it}: {obj_prev!r} -> {obj!r}"
                )
            rel = abs(obj - obj_prev) / (abs(obj_prev) + 1e-12)
            if rel < controls.tol or delta < FIXED_POINT_TOL:
                converged = True
                break
        if it == controls.max_iter:
            break
        r = _responsibilities(logw, lse)
        theta_new = _em_iteration(X, y, specs, theta, rn_pen, floor, r)
        delta = theta_new.max_norm_distance(theta)
        theta = theta_new
        obj_prev = obj
        iterations = it + 1
    return theta, np.asarray(trace), converged, iterations


# ---------------------------------------------------------------------------
# public operations


def e_step(data: Dataset, theta: MixtureParams, subset=None) -> Responsibilities:
    """Posterior component probabilities for each retained row.

    Computed in log space.  Rows where every component underflows to a
    non-finite log-density get uniform responsibilities and a warning.
    """
    idx = resolve_subset(data, subset)
    logw = _log_weighted_densities(data.design[idx], data.responses[idx], theta)
    lse = _rows_logsumexp(logw)
    return Responsibilities(_responsibilities(logw, lse))


def m_step_proportions(r: Responsibilities) -> np.ndarray:
    """Updated mixing proportions: column means floored and renormalized."""
    return _floored_simplex_argmax(r.matrix.mean(axis=0), PROPORTION_FLOOR)


def m_step_beta(
    data: Dataset,
    subset,
    r_col: np.ndarray,
    sigma2: float,
    beta_prev: np.ndarray,
    spec: PenaltySpec,
    penalty_n: Optional[int] = None,
) -> np.ndarray:
    """One component's coefficient update.

    Solves the quadratically-approximated penalized weighted least squares
    (X'WX + sigma2 * D) beta = X'Wy over the retained rows, where W holds
    the component's responsibilities and D the quadratic penalty weights
    (zero for the intercept).  Coordinates of ``beta_prev`` below the zero
    threshold are excluded from the solve and returned as exact zeros.
    """
    idx = resolve_subset(data, subset)
    d = data.n_covariates + 1
    if idx.size < data.n_covariates + 2:
        raise ValueError(f"need at least p+2={data.n_covariates + 2} rows, got {idx.size}")
    if not sigma2 > 0:
        raise ValueError(f"sigma2 must be positive, got {sigma2!r}")
    beta_prev = np.asarray(beta_prev, dtype=float)
    if beta_prev.shape != (d,):
        raise ValueError(f"beta_prev must have length {d}")
    w = np.asarray(r_col, dtype=float)
    if w.shape != (idx.size,):
        raise ValueError("r_col must match the subset length")
    n_pen = idx.size if penalty_n is None else int(penalty_n)
    return _beta_update(
        data.design[idx], data.responses[idx], w, sigma2, beta_prev, spec, math.sqrt(n_pen)
    )


def m_step_sigma(data: Dataset, subset, r_col: np.ndarray, beta: np.ndarray) -> float:
    """Responsibility-weighted mean squared residual, floored."""
    idx = resolve_subset(data, subset)
    w = np.asarray(r_col, dtype=float)
    total = w.sum()
    if not total > 0:
        raise ValueError("responsibility column sums to zero")
    resid = data.responses[idx] - data.design[idx] @ np.asarray(beta, dtype=float)
    return max(float((w @ resid**2) / total), data.sigma2_floor)


def _random_start(
    data: Dataset,
    idx: np.ndarray,
    m: int,
    rng: np.random.Generator,
    controls: EmControls,
) -> MixtureParams:
    """Random responsibilities, one M-step, then a short unpenalized EM."""
    d = data.n_covariates + 1
    n = idx.size
    X = data.design[idx]
    y = data.responses[idx]
    # Uniform on the simplex per row (Dirichlet(1,...,1)).
    g = rng.gamma(1.0, size=(n, m))
    r = g / g.sum(axis=1, keepdims=True)
    flat = [PenaltySpec(family="lasso", lam=0.0)] * m

    pi = _floored_simplex_argmax(r.mean(axis=0), PROPORTION_FLOOR)
    var_y = max(float(np.var(y)), data.sigma2_floor)
    beta = np.empty((m, d))
    s2 = np.empty(m)
    for j in range(m):
        beta[j] = _beta_update(X, y, r[:, j], var_y, np.zeros(d), flat[j], 1.0)
        resid = y - X @ beta[j]
        s2[j] = max(float((r[:, j] @ resid**2) / max(r[:, j].sum(), 1e-300)), data.sigma2_floor)
    theta = MixtureParams(pi, beta, s2)

    warm = controls.replace(max_iter=WARMUP_ITERATIONS, tol=1e-300)
    theta, _, _, _ = _em_run(data, idx, flat, theta, warm, idx.size)
    return theta


def fit_penalized_fmr(
    data: Dataset,
    subset,
    m: int,
    specs: Sequence[PenaltySpec],
    controls: EmControls,
    init: Optional[MixtureParams] = None,
    penalty_n: Optional[int] = None,
) -> FitResult:
    """Penalized EM fit, best of ``controls.n_starts`` random starts plus ``init``.

    The objective trace of the winning start is nondecreasing (within
    MONOTONICITY_TOL); final coefficients below the zero threshold are
    exact zeros.
    """
    idx = resolve_subset(data, subset)
    if m < 1:
        raise ValueError("m must be at least 1")
    data.check_fit_size(m, idx.size)
    specs = list(specs)
    if len(specs) != m:
        raise ValueError(f"{len(specs)} penalty specs for m={m}")
    if init is not None and (init.n_components != m or init.n_coefficients != data.n_covariates + 1):
        raise ValueError("init has incompatible shape")
    if init is None and controls.n_starts == 0:
        raise ValueError("n_starts=0 requires an explicit init")
    n_pen = idx.size if penalty_n is None else int(penalty_n)

    starts: list[MixtureParams] = []
    if init is not None:
        starts.append(init)
    for s in range(controls.n_starts):
        rng = np.random.default_rng(np.random.SeedSequence([controls.rng_seed, s]))
        starts.append(_random_start(data, idx, m, rng, controls))

    best = None
    for theta0 in starts:
        theta, trace, converged, iters = _em_run(data, idx, specs, theta0, controls, n_pen)
        if best is None or trace[-1] > best[1][-1]:
            best = (theta, trace, converged, iters)
    theta, trace, converged, iters = best
    return FitResult(
        theta=theta,
        objective_trace=trace,
        converged=converged,
        iterations=iters,
        active_sets=theta.coefficients != 0.0,
    )


def select_lambda(
    data: Dataset,
    subset,
    m: int,
    family: str,
    grid: Sequence[float],
    controls: EmControls,
    a: Optional[float] = None,
    penalty_n: Optional[int] = None,
) -> list[PenaltySpec]:
    """Pick a shared tuning parameter from a grid by BIC.

    BIC = -2 * loglik + df * log(n_subset) with df counting nonzero
    coefficients plus m-1 proportions plus m variances.  Ties break toward
    the larger (sparser) lambda.
    """
    grid = sorted(float(g) for g in grid)
    if not grid:
        raise ValueError("lambda grid must be non-empty")
    if any(g < 0 for g in grid):
        raise ValueError("lambda grid entries must be nonnegative")
    idx = resolve_subset(data, subset)
    log_n = math.log(idx.size)

    best_specs, best_bic = None, math.inf
    for lam in grid:
        specs = [PenaltySpec(family=family, lam=lam, a=a) for _ in range(m)]
        fit = fit_penalized_fmr(data, idx, m, specs, controls, penalty_n=penalty_n)
        ll = log_likelihood(data, fit.theta, idx)
        df = int(np.count_nonzero(fit.theta.coefficients)) + (m - 1) + m
        bic = -2.0 * ll + df * log_n
        if bic <= best_bic:
            best_specs, best_bic = specs, bic
    return best_specs
