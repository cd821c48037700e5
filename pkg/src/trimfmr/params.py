"""Domain types for mixture-of-regressions fitting.

All containers are frozen dataclasses holding read-only numpy arrays, so
instances are safe to share across threads and processes.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Optional

import numpy as np

from .errors import DataError

# Smallest admissible mixing proportion.  The proportion M-step maximizes
# over the simplex constrained to [PROPORTION_FLOOR, 1], which keeps the
# likelihood bounded away from degenerate label configurations.
PROPORTION_FLOOR = 1e-6

# Per-dataset variance floor is SIGMA2_FLOOR_SCALE * var(y).
SIGMA2_FLOOR_SCALE = 1e-8


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class MixtureParams:
    """Full parameter vector of an m-component mixture of linear regressions.

    Attributes
    ----------
    proportions : (m,) array
        Mixing proportions; each in [PROPORTION_FLOOR, 1], summing to 1.
    coefficients : (m, p+1) array
        Per-component regression coefficients, first entry the intercept.
    variances : (m,) array
        Per-component error variances, strictly positive.
    """

    proportions: np.ndarray
    coefficients: np.ndarray
    variances: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "proportions", _readonly(self.proportions))
        object.__setattr__(self, "coefficients", _readonly(np.atleast_2d(self.coefficients)))
        object.__setattr__(self, "variances", _readonly(self.variances))
        pi, beta, s2 = self.proportions, self.coefficients, self.variances
        if pi.ndim != 1 or s2.ndim != 1 or beta.ndim != 2:
            raise ValueError("proportions and variances must be 1-d, coefficients 2-d")
        m = pi.shape[0]
        if beta.shape[0] != m or s2.shape[0] != m:
            raise ValueError(
                f"component count mismatch: {m} proportions, "
                f"{beta.shape[0]} coefficient rows, {s2.shape[0]} variances"
            )
        if not np.all(np.isfinite(pi)) or not np.all(np.isfinite(beta)) or not np.all(np.isfinite(s2)):
            raise ValueError("mixture parameters must be finite")
        if abs(pi.sum() - 1.0) > 1e-12:
            raise ValueError(f"proportions sum to {pi.sum()!r}, not 1")
        if np.any(pi < PROPORTION_FLOOR) or np.any(pi > 1.0):
            raise ValueError("each proportion must lie in [PROPORTION_FLOOR, 1]")
        if np.any(s2 <= 0.0):
            raise ValueError("variances must be strictly positive")

    @property
    def n_components(self) -> int:
        return self.proportions.shape[0]

    @property
    def n_coefficients(self) -> int:
        """Coefficient vector length p+1 (intercept included)."""
        return self.coefficients.shape[1]

    def permuted(self, perm) -> "MixtureParams":
        """Relabel components: component j of the result is component perm[j]."""
        perm = np.asarray(perm, dtype=int)
        if sorted(perm.tolist()) != list(range(self.n_components)):
            raise ValueError(f"not a permutation of {self.n_components} components: {perm}")
        return MixtureParams(
            proportions=self.proportions[perm],
            coefficients=self.coefficients[perm],
            variances=self.variances[perm],
        )

    def as_vector(self) -> np.ndarray:
        """Concatenated (proportions, coefficients row-major, variances)."""
        return np.concatenate([self.proportions, self.coefficients.ravel(), self.variances])

    def max_norm_distance(self, other: "MixtureParams") -> float:
        return float(np.max(np.abs(self.as_vector() - other.as_vector())))


@dataclass(frozen=True, eq=False)
class DatasetTruth:
    """Generating truth attached to simulated data."""

    params: MixtureParams
    second_moment: np.ndarray  # E(x x^T), (p+1, p+1)
    contaminated: np.ndarray  # per-row flags

    def __post_init__(self):
        object.__setattr__(self, "second_moment", _readonly(self.second_moment))
        flags = np.array(self.contaminated, dtype=bool, copy=True)
        flags.setflags(write=False)
        object.__setattr__(self, "contaminated", flags)


@dataclass(frozen=True, eq=False)
class Dataset:
    """Responses plus design matrix with a leading intercept column.

    The minimum-rows-per-parameter requirement (n >= m*(p+2)) is checked at
    fit time, not here, because m is not known to the container.
    """

    responses: np.ndarray
    design: np.ndarray
    truth: Optional[DatasetTruth] = None

    def __post_init__(self):
        object.__setattr__(self, "responses", _readonly(self.responses))
        object.__setattr__(self, "design", _readonly(self.design))
        y, X = self.responses, self.design
        if y.ndim != 1 or X.ndim != 2:
            raise DataError("responses must be 1-d and design 2-d")
        if X.shape[0] != y.shape[0]:
            raise DataError(f"{y.shape[0]} responses but {X.shape[0]} design rows")
        if X.shape[1] < 1 or not np.all(X[:, 0] == 1.0):
            raise DataError("first design column must be identically 1")
        if not (np.all(np.isfinite(y)) and np.all(np.isfinite(X))):
            raise DataError("responses and design must be finite")
        if self.truth is not None and self.truth.contaminated.shape[0] != y.shape[0]:
            raise DataError("contamination flags must have one entry per row")

    @property
    def n_rows(self) -> int:
        return self.responses.shape[0]

    @property
    def n_covariates(self) -> int:
        """Number of non-intercept covariates p."""
        return self.design.shape[1] - 1

    @cached_property
    def sigma2_floor(self) -> float:
        """Variance floor guarding against likelihood degeneracy."""
        v = float(np.var(self.responses))
        return SIGMA2_FLOOR_SCALE * v if v > 0 else SIGMA2_FLOOR_SCALE

    def take(self, rows) -> "Dataset":
        """New dataset holding the given rows (duplicates allowed); truth dropped."""
        rows = np.asarray(rows, dtype=int)
        return Dataset(responses=self.responses[rows], design=self.design[rows])

    def check_fit_size(self, m: int, n_rows: Optional[int] = None) -> None:
        n = self.n_rows if n_rows is None else int(n_rows)
        need = m * (self.n_covariates + 2)
        if n < need:
            raise DataError(
                f"{n} rows is too few to fit {m} components with "
                f"{self.n_covariates} covariates (need at least {need})"
            )


@dataclass(frozen=True, eq=False)
class Responsibilities:
    """Posterior component-membership probabilities, one row per observation."""

    matrix: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "matrix", _readonly(self.matrix))
        r = self.matrix
        if r.ndim != 2:
            raise ValueError("responsibilities must be a matrix")
        if np.any(r < -1e-12) or np.any(r > 1 + 1e-12):
            raise ValueError("responsibilities must lie in [0, 1]")
        if np.max(np.abs(r.sum(axis=1) - 1.0)) > 1e-10:
            raise ValueError("responsibility rows must sum to 1 within 1e-10")

    @property
    def n_components(self) -> int:
        return self.matrix.shape[1]
