"""Bootstrap selection of the trimming proportion.

For each candidate trimming proportion, the trimmed estimator is fitted to
many bootstrap resamples; the proportion whose coefficient estimates are
most stable (smallest per-component covariance, summarized by the largest
diagonal entry or eigenvalue) wins.  Under-trimming leaves outliers in the
retained set and inflates the dispersion, so the score curve drops once
the proportion clears the contamination level.
"""

from __future__ import annotations

import csv
import dataclasses
import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from joblib import Parallel, delayed

from .em import EmControls
from .errors import NumericalError
from .metrics import align_components
from .params import Dataset
from .trimming import TrimSpec, fit_trimmed

logger = logging.getLogger(__name__)

DEFAULT_ALPHA_GRID = tuple(round(0.01 * i, 2) for i in range(21))  # 0.00 .. 0.20

CRITERIA = ("max_diagonal", "max_eigenvalue")

# A grid point is disqualified when more than this fraction of its
# bootstrap fits fail.
MAX_FAILURE_RATE = 0.2

_BOOT_STREAM = 15485863
_REF_STREAM = 32452843


@dataclass(frozen=True)
class AlphaSelectConfig:
    grid: Sequence[float] = DEFAULT_ALPHA_GRID
    n_boot: int = 200
    criterion: str = "max_diagonal"
    rng_seed: int = 0
    lambda_grid: Sequence[float] = (0.0, 0.05, 0.1, 0.2, 0.4, 0.8)
    em: EmControls = field(default_factory=EmControls)
    trim: TrimSpec = field(default_factory=lambda: TrimSpec(alpha=0.0))
    include_intercept: bool = True
    n_jobs: int = 1

    def __post_init__(self):
        grid = tuple(float(a) for a in self.grid)
        if not grid:
            raise ValueError("alpha grid must be non-empty")
        if any(not 0.0 <= a < 0.5 for a in grid):
            raise ValueError("alpha grid values must lie in [0, 0.5)")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("alpha grid must be strictly increasing")
        object.__setattr__(self, "grid", grid)
        if self.n_boot < 2:
            raise ValueError("n_boot must be at least 2")
        if self.criterion not in CRITERIA:
            raise ValueError(f"criterion must be one of {CRITERIA}")
        if self.rng_seed < 0:
            raise ValueError("rng_seed must be nonnegative")


@dataclass(frozen=True, eq=False)
class AlphaSelectReport:
    """Dispersion scores and bootstrap covariances for each grid point."""

    chosen_alpha: float
    criterion: str
    alphas: np.ndarray
    scores_diagonal: np.ndarray
    scores_eigenvalue: np.ndarray
    covariances: tuple  # per alpha: (m, q, q) array or None if disqualified
    failures: np.ndarray
    n_boot: int
    reference_objectives: np.ndarray  # trimmed penalized objective of the base fit

    def rescore(self, criterion: Optional[str] = None) -> float:
        """Recompute the chosen alpha from the stored covariance matrices."""
        crit = self.criterion if criterion is None else criterion
        if crit not in CRITERIA:
            raise ValueError(f"criterion must be one of {CRITERIA}")
        best_alpha, best_score = None, np.inf
        for i, cov in enumerate(self.covariances):
            if cov is None:
                continue
            score = _score_covariances(np.asarray(cov))[0 if crit == "max_diagonal" else 1]
            if score < best_score:
                best_alpha, best_score = float(self.alphas[i]), score
        if best_alpha is None:
            raise NumericalError("every alpha was disqualified")
        return best_alpha


def bootstrap_resample(data: Dataset, rng: np.random.Generator) -> Dataset:
    """n rows drawn uniformly with replacement; truth annotations dropped."""
    rows = rng.integers(0, data.n_rows, size=data.n_rows)
    return data.take(rows)


def _score_covariances(covs: np.ndarray) -> tuple:
    """(max diagonal, max eigenvalue) over components."""
    diag = float(max(np.max(np.diagonal(c)) for c in covs))
    eig = float(max(np.max(np.linalg.eigvalsh(0.5 * (c + c.T))) for c in covs))
    return diag, eig


def _fit_alpha_point(data, m, family, cfg, alpha, slot):
    """Reference fit plus n_boot bootstrap fits at a single grid point."""
    trim = dataclasses.replace(cfg.trim, alpha=alpha)
    ref_controls = cfg.em.replace(rng_seed=_seed_scalar([cfg.rng_seed, _REF_STREAM, slot]))
    reference = fit_trimmed(data, m, family, trim, ref_controls, cfg.lambda_grid)
    ref_obj = float(reference.trimmed_objective_trace[-1])

    q_slice = slice(None) if cfg.include_intercept else slice(1, None)
    draws = []
    failures = 0
    for b in range(cfg.n_boot):
        rng = np.random.default_rng(np.random.SeedSequence([cfg.rng_seed, _BOOT_STREAM, slot, b]))
        sample = bootstrap_resample(data, rng)
        controls = cfg.em.replace(rng_seed=_seed_scalar([cfg.rng_seed, slot, b]))
        try:
            fit = fit_trimmed(sample, m, family, trim, controls, cfg.lambda_grid)
        except (NumericalError, np.linalg.LinAlgError, ValueError) as exc:
            failures += 1
            logger.warning("bootstrap fit failed (alpha=%.3f, rep %d): %s", alpha, b, exc)
            continue
        perm = align_components(fit.theta, reference.theta)
        draws.append(fit.theta.permuted(perm).coefficients[:, q_slice])

    if failures > MAX_FAILURE_RATE * cfg.n_boot:
        return ref_obj, None, failures
    stacked = np.asarray(draws)  # (B, m, q)
    covs = np.stack(
        [np.atleast_2d(np.cov(stacked[:, j, :], rowvar=False, ddof=1)) for j in range(m)]
    )
    _check_psd(covs)
    return ref_obj, covs, failures


def _check_psd(covs: np.ndarray) -> None:
    for c in covs:
        sym = 0.5 * (c + c.T)
        if np.min(np.linalg.eigvalsh(sym)) < -1e-8:
            raise NumericalError("bootstrap covariance matrix is not PSD within tolerance")


def _seed_scalar(parts) -> int:
    return int(np.random.SeedSequence(parts).generate_state(1, np.uint32)[0])


def select_alpha(data: Dataset, m: int, family: str, cfg: AlphaSelectConfig) -> AlphaSelectReport:
    """Pick the trimming proportion minimizing bootstrap coefficient dispersion.

    Grid points where more than MAX_FAILURE_RATE of the bootstrap fits fail
    are disqualified; ties in the score go to the smallest alpha.
    """
    results = Parallel(n_jobs=cfg.n_jobs)(
        delayed(_fit_alpha_point)(data, m, family, cfg, alpha, i)
        for i, alpha in enumerate(cfg.grid)
    )

    n_grid = len(cfg.grid)
    scores_diag = np.full(n_grid, np.nan)
    scores_eig = np.full(n_grid, np.nan)
    failures = np.zeros(n_grid, dtype=int)
    ref_objs = np.empty(n_grid)
    covariances = []
    for i, (ref_obj, covs, n_failed) in enumerate(results):
        ref_objs[i] = ref_obj
        failures[i] = n_failed
        covariances.append(covs)
        if covs is not None:
            scores_diag[i], scores_eig[i] = _score_covariances(covs)

    key = scores_diag if cfg.criterion == "max_diagonal" else scores_eig
    chosen = None
    best = np.inf
    for i in range(n_grid):
        if np.isnan(key[i]):
            continue
        if key[i] < best:
            chosen, best = i, key[i]
    if chosen is None:
        raise NumericalError("every alpha in the grid was disqualified by bootstrap failures")

    return AlphaSelectReport(
        chosen_alpha=float(cfg.grid[chosen]),
        criterion=cfg.criterion,
        alphas=np.asarray(cfg.grid),
        scores_diagonal=scores_diag,
        scores_eigenvalue=scores_eig,
        covariances=tuple(covariances),
        failures=failures,
        n_boot=cfg.n_boot,
        reference_objectives=ref_objs,
    )


def report_to_csv(report: AlphaSelectReport, path) -> None:
    """Write the score curve: one row per alpha."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["alpha", "score_diag", "score_eig", "failures"])
        for i, alpha in enumerate(report.alphas):
            writer.writerow(
                [
                    repr(float(alpha)),
                    repr(float(report.scores_diagonal[i])),
                    repr(float(report.scores_eigenvalue[i])),
                    int(report.failures[i]),
                ]
            )


def objective_curve_to_csv(report: AlphaSelectReport, path) -> None:
    """Trimmed objective of the base fit versus alpha, for external plotting."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["alpha", "trimmed_objective"])
        for alpha, obj in zip(report.alphas, report.reference_objectives):
            writer.writerow([repr(float(alpha)), repr(float(obj))])
