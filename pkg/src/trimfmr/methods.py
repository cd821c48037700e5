"""Named estimator configurations.

Short tags follow the usual convention for these estimators: ``ml``/``ms``/
``mmcp`` are penalized mixture fits with lasso/SCAD/MCP, and ``mtl``/``mts``/
``mtmcp`` are their trimmed counterparts.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .em import EmControls, fit_penalized_fmr, select_lambda
from .params import Dataset, MixtureParams
from .trimming import TrimSpec, fit_trimmed

METHOD_TAGS = {
    "ml": ("lasso", False),
    "ms": ("scad", False),
    "mmcp": ("mcp", False),
    "mtl": ("lasso", True),
    "mts": ("scad", True),
    "mtmcp": ("mcp", True),
}

DEFAULT_LAMBDA_GRID = (0.0, 0.02, 0.05, 0.1, 0.17, 0.3, 0.5, 0.8, 1.3, 2.0)


@dataclass(frozen=True)
class MethodConfig:
    """A fully specified estimator: penalty family, trimming, and controls."""

    name: str
    family: str
    trimmed: bool
    alpha: float = 0.05
    lambda_grid: Sequence[float] = DEFAULT_LAMBDA_GRID
    em: EmControls = field(default_factory=EmControls)
    trim: TrimSpec = field(default_factory=lambda: TrimSpec(alpha=0.05))
    a: Optional[float] = None
    prediction: str = "mixture_mean"

    def __post_init__(self):
        # Keep the trim spec's alpha in sync with the method-level alpha.
        if self.trim.alpha != self.alpha:
            object.__setattr__(self, "trim", dataclasses.replace(self.trim, alpha=self.alpha))

    def fit(self, data: Dataset, m: int, seed: int) -> MixtureParams:
        """Fit on the full dataset with a run-specific seed."""
        controls = self.em.replace(rng_seed=seed)
        if self.trimmed:
            return fit_trimmed(data, m, self.family, self.trim, controls, self.lambda_grid, a=self.a).theta
        specs = select_lambda(data, None, m, self.family, self.lambda_grid, controls, a=self.a)
        return fit_penalized_fmr(data, None, m, specs, controls).theta

    def fit_subset(self, data: Dataset, rows: np.ndarray, m: int, seed: int) -> MixtureParams:
        """Fit on a row subset (used by cross-validation)."""
        return self.fit(data.take(rows), m, seed)


def method_from_tag(
    tag: str,
    alpha: float = 0.05,
    lambda_grid: Sequence[float] = DEFAULT_LAMBDA_GRID,
    em: Optional[EmControls] = None,
    trim: Optional[TrimSpec] = None,
    a: Optional[float] = None,
) -> MethodConfig:
    if tag not in METHOD_TAGS:
        raise ValueError(f"unknown method tag {tag!r}, expected one of {sorted(METHOD_TAGS)}")
    family, trimmed = METHOD_TAGS[tag]
    return MethodConfig(
        name=tag,
        family=family,
        trimmed=trimmed,
        alpha=alpha,
        lambda_grid=tuple(float(x) for x in lambda_grid),
        em=em if em is not None else EmControls(),
        trim=trim if trim is not None else TrimSpec(alpha=alpha),
        a=a,
    )
