"""Trimmed penalized estimation.

The trimmed estimator maximizes the penalized log-likelihood over the best
floor(n*(1-alpha)) rows.  The exact estimator is combinatorial, so the
production path is the FAST-TLE alternation: trim under the current
parameters, refit on the retained rows, repeat until the parameters stop
moving.  Both half-steps ascend the trimmed penalized objective, so the
per-outer-iteration trace is nondecreasing.  An exhaustive all-subsets
optimizer is provided for tiny instances as a test oracle.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .em import EmControls, fit_penalized_fmr, select_lambda
from .errors import MonotonicityError, NumericalError
from .likelihood import penalized_objective, row_log_mixture
from .metrics import align_components
from .params import Dataset, MixtureParams
from .penalties import PenaltySpec

TRACE_TOL = 1e-7

# Hard ceiling on subsets the exhaustive oracle will fit.
EXHAUSTIVE_SUBSET_LIMIT = 10_000

# Seed-stream tags so initialization draws never collide with EM start streams.
_INIT_STREAM = 104729


@dataclass(frozen=True)
class TrimSpec:
    """Trimming proportion plus outer-loop stopping controls.

    ``penalty_scale`` picks the sample size entering the sqrt(n) penalty
    factor: the retained count ("retained", default) or the full row count
    ("full").  ``retune_lambda`` re-selects lambda on the retained set at
    every outer iteration instead of once per fit; note that retuning
    changes the objective between iterations, so the nondecreasing-trace
    guarantee only holds while lambda is fixed.
    """

    alpha: float
    outer_tol: float = 1e-6
    max_outer: int = 100
    retune_lambda: bool = False
    penalty_scale: str = "retained"

    def __post_init__(self):
        if not 0.0 <= self.alpha < 0.5:
            raise ValueError(f"alpha must lie in [0, 0.5), got {self.alpha}")
        if not self.outer_tol > 0:
            raise ValueError("outer_tol must be positive")
        if self.max_outer < 1:
            raise ValueError("max_outer must be at least 1")
        if self.penalty_scale not in ("retained", "full"):
            raise ValueError("penalty_scale must be 'retained' or 'full'")

    def retained_count(self, n: int) -> int:
        return math.floor(n * (1.0 - self.alpha))


@dataclass(frozen=True, eq=False)
class InnerFitStats:
    """Summary of the EM work done inside one trimmed fit."""

    n_fits: int
    total_iterations: int
    n_converged: int


@dataclass(frozen=True, eq=False)
class TrimmedFit:
    theta: MixtureParams
    retained: np.ndarray  # sorted row indices, exactly floor(n*(1-alpha)) of them
    trimmed_objective_trace: np.ndarray
    outer_iterations: int
    inner_fits: InnerFitStats
    specs: tuple  # penalty specs in force for the reported objective
    converged: bool


def trim_index_set(data: Dataset, theta: MixtureParams, alpha: float) -> np.ndarray:
    """Indices of the floor(n*(1-alpha)) rows with the largest mixture density.

    Ties break toward the smaller row index; the result is sorted.
    """
    if not 0.0 <= alpha < 1.0:
        raise ValueError(f"alpha must lie in [0, 1), got {alpha}")
    n = data.n_rows
    h = math.floor(n * (1.0 - alpha))
    if h < 1:
        raise ValueError(f"alpha={alpha} would retain no rows")
    logf = row_log_mixture(data, theta)
    order = np.lexsort((np.arange(n), -logf))
    return np.sort(order[:h])


def _trimmed_loglik(data: Dataset, theta: MixtureParams, h: int) -> float:
    logf = row_log_mixture(data, theta)
    return float(np.sort(logf)[::-1][:h].sum())


class _FitCounter:
    def __init__(self):
        self.n_fits = 0
        self.total_iterations = 0
        self.n_converged = 0

    def add(self, fit) -> None:
        self.n_fits += 1
        self.total_iterations += fit.iterations
        self.n_converged += int(fit.converged)

    def stats(self) -> InnerFitStats:
        return InnerFitStats(self.n_fits, self.total_iterations, self.n_converged)


def fit_trimmed(
    data: Dataset,
    m: int,
    family: str,
    trim: TrimSpec,
    controls: EmControls,
    lambda_grid: Sequence[float],
    a: Optional[float] = None,
) -> TrimmedFit:
    """FAST-TLE fit: alternate trimming and penalized EM refits.

    Initial parameter candidates come from penalized EM fits on
    ``controls.n_starts`` random retained-size subsets; lambda is selected
    by BIC on the initially trimmed rows (once per call unless
    ``trim.retune_lambda``).  Returns the best final trimmed penalized
    objective across starts.
    """
    n = data.n_rows
    h = trim.retained_count(n)
    data.check_fit_size(m, h)
    counter = _FitCounter()

    if h == n:
        # No trimming: a single penalized fit on the full data.
        specs = select_lambda(data, None, m, family, lambda_grid, controls, a=a)
        fit = fit_penalized_fmr(data, None, m, specs, controls)
        counter.add(fit)
        obj = penalized_objective(data, fit.theta, specs, None)
        return TrimmedFit(
            theta=fit.theta,
            retained=np.arange(n),
            trimmed_objective_trace=np.asarray([obj]),
            outer_iterations=0,
            inner_fits=counter.stats(),
            specs=tuple(specs),
            converged=fit.converged,
        )

    n_starts = max(controls.n_starts, 1)
    flat = [PenaltySpec(family="lasso", lam=0.0)] * m
    candidates = []
    for s in range(n_starts):
        rng = np.random.default_rng(np.random.SeedSequence([controls.rng_seed, _INIT_STREAM, s]))
        subset = np.sort(rng.choice(n, size=h, replace=False))
        start_controls = controls.replace(n_starts=1, rng_seed=controls.rng_seed + s + 1)
        fit = fit_penalized_fmr(data, subset, m, flat, start_controls)
        counter.add(fit)
        candidates.append(fit.theta)

    best_initial = max(candidates, key=lambda t: _trimmed_loglik(data, t, h))
    initial_retained = trim_index_set(data, best_initial, trim.alpha)
    penalty_n = n if trim.penalty_scale == "full" else h
    specs = select_lambda(
        data, initial_retained, m, family, lambda_grid, controls, a=a, penalty_n=penalty_n
    )

    best = None
    for s, theta0 in enumerate(candidates):
        outcome = _outer_loop(data, m, theta0, specs, family, lambda_grid, trim, controls, a, counter)
        if best is None or outcome[1][-1] > best[1][-1]:
            best = outcome
    theta, trace, retained, iterations, specs_used, converged = best
    return TrimmedFit(
        theta=theta,
        retained=retained,
        trimmed_objective_trace=np.asarray(trace),
        outer_iterations=iterations,
        inner_fits=counter.stats(),
        specs=tuple(specs_used),
        converged=converged,
    )


def _outer_loop(data, m, theta0, specs, family, lambda_grid, trim, controls, a, counter):
    h = trim.retained_count(data.n_rows)
    penalty_n = data.n_rows if trim.penalty_scale == "full" else h
    theta = theta0
    retained = trim_index_set(data, theta, trim.alpha)
    trace = []
    warm = controls.replace(n_starts=0)
    converged = False
    iterations = 0
    for t in range(1, trim.max_outer + 1):
        if trim.retune_lambda:
            specs = select_lambda(data, retained, m, family, lambda_grid, controls, a=a, penalty_n=penalty_n)
        try:
            fit = fit_penalized_fmr(data, retained, m, specs, warm, init=theta, penalty_n=penalty_n)
        except NumericalError as exc:
            raise NumericalError(f"outer iteration {t}: {exc}") from exc
        counter.add(fit)
        theta_new = fit.theta
        retained = trim_index_set(data, theta_new, trim.alpha)
        obj = penalized_objective(data, theta_new, specs, retained, penalty_n)
        if trace and not trim.retune_lambda and obj < trace[-1] - TRACE_TOL:
            raise MonotonicityError(
                f"trimmed objective decreased at outer iteration {t}: {trace[-1]!r} -> {obj!r}"
            )
        trace.append(obj)
        perm = align_components(theta_new, theta)
        delta = theta_new.permuted(perm).max_norm_distance(theta)
        theta = theta_new
        iterations = t
        if delta < trim.outer_tol:
            converged = True
            break
    return theta, trace, retained, iterations, specs, converged


def exhaustive_tle(
    data: Dataset,
    m: int,
    specs: Sequence[PenaltySpec],
    alpha: float,
    controls: EmControls,
) -> TrimmedFit:
    """Exact trimmed optimum by fitting every retained-size subset.

    Test oracle only: refuses instances with more than
    EXHAUSTIVE_SUBSET_LIMIT subsets.
    """
    n = data.n_rows
    h = math.floor(n * (1.0 - alpha))
    data.check_fit_size(m, h)
    n_subsets = math.comb(n, h)
    if n_subsets > EXHAUSTIVE_SUBSET_LIMIT:
        raise ValueError(f"{n_subsets} subsets exceeds the exhaustive limit of {EXHAUSTIVE_SUBSET_LIMIT}")
    specs = list(specs)
    counter = _FitCounter()
    best = None
    for subset in itertools.combinations(range(n), h):
        idx = np.asarray(subset, dtype=int)
        fit = fit_penalized_fmr(data, idx, m, specs, controls, penalty_n=h)
        counter.add(fit)
        obj = penalized_objective(data, fit.theta, specs, idx, h)
        if best is None or obj > best[0]:
            best = (obj, idx, fit.theta, fit.converged)
    obj, idx, theta, converged = best
    return TrimmedFit(
        theta=theta,
        retained=idx,
        trimmed_objective_trace=np.asarray([obj]),
        outer_iterations=0,
        inner_fits=counter.stats(),
        specs=tuple(specs),
        converged=converged,
    )
