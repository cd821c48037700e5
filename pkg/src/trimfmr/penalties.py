"""Penalty menu for sparse mixture regression: lasso, SCAD, MCP.

All three penalties carry a sqrt(n) sample-size scaling, and for SCAD and
MCP the sqrt(n) factor sits inside the thresholding indicator as well, so
lambda grids are not interchangeable across sample sizes.  Values for SCAD
and MCP are the closed-form integrals of their derivatives from 0 to |beta|;
the test suite validates them against numerical quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

FAMILIES = ("lasso", "scad", "mcp")

DEFAULT_SCAD_A = 3.7
DEFAULT_MCP_A = 3.0

# Coefficient magnitude below which a coordinate is declared exactly zero
# and dropped from the quadratic approximation (whose weight is singular
# at the origin).
ZERO_THRESHOLD = 1e-6


def default_a(family: str) -> float:
    return {"lasso": 0.0, "scad": DEFAULT_SCAD_A, "mcp": DEFAULT_MCP_A}[family]


@dataclass(frozen=True)
class PenaltySpec:
    """One component's penalty: family plus tuning constants.

    ``lam`` is the per-component tuning parameter multiplying sqrt(n); ``a``
    is the concavity constant (ignored for lasso, > 2 for SCAD, > 1 for MCP).
    """

    family: str
    lam: float
    a: Optional[float] = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown penalty family {self.family!r}, expected one of {FAMILIES}")
        if not (self.lam >= 0.0):
            raise ValueError(f"lambda must be nonnegative, got {self.lam}")
        if self.a is None:
            object.__setattr__(self, "a", default_a(self.family))
        if self.family == "scad" and not (self.a > 2.0):
            raise ValueError(f"SCAD requires a > 2, got {self.a}")
        if self.family == "mcp" and not (self.a > 1.0):
            raise ValueError(f"MCP requires a > 1, got {self.a}")


def penalty_derivative(spec: PenaltySpec, beta, n: int):
    """Derivative of the penalty at nonnegative ``beta`` (callers pass |beta|).

    Vectorized over ``beta``; negative values are clamped to zero.
    """
    if n < 1:
        raise ValueError("sample size must be at least 1")
    b = np.asarray(beta, dtype=float)
    if np.any(b < 0):
        raise ValueError("penalty_derivative expects nonnegative beta")
    rn = math.sqrt(n)
    lam, a = spec.lam, spec.a
    if spec.family == "lasso":
        out = np.full_like(b, lam * rn)
    elif spec.family == "scad":
        u = rn * b
        out = np.where(u <= lam, lam * rn, rn * np.maximum(a * lam - u, 0.0) / (a - 1.0))
    else:  # mcp
        out = np.where(rn * b <= a * lam, rn * (lam - b / a), 0.0)
    out = np.maximum(out, 0.0)
    return float(out) if np.isscalar(beta) or out.ndim == 0 else out


def penalty_value(spec: PenaltySpec, beta, n: int):
    """Penalty value at ``beta``: the integral of the derivative from 0 to |beta|.

    Symmetric in the sign of beta, zero at the origin, nondecreasing in |beta|.
    """
    if n < 1:
        raise ValueError("sample size must be at least 1")
    b = np.abs(np.asarray(beta, dtype=float))
    rn = math.sqrt(n)
    lam, a = spec.lam, spec.a
    if spec.family == "lasso":
        out = lam * rn * b
    elif spec.family == "scad":
        u = rn * b
        mid = (2.0 * a * lam * u - u * u - lam * lam) / (2.0 * (a - 1.0))
        out = np.where(u <= lam, lam * u, np.where(u <= a * lam, mid, lam * lam * (a + 1.0) / 2.0))
    else:  # mcp: derivative vanishes past beta = a*lam/sqrt(n)
        cut = a * lam / rn
        bc = np.minimum(b, cut)
        out = rn * (lam * bc - bc * bc / (2.0 * a))
    return float(out) if np.isscalar(beta) or out.ndim == 0 else out


def _derivative_scalar(spec: PenaltySpec, b: float, rn: float) -> float:
    """Scalar penalty derivative at b >= 0 with rn = sqrt(n); hot-loop helper."""
    lam, a = spec.lam, spec.a
    if spec.family == "lasso":
        return lam * rn
    if spec.family == "scad":
        u = rn * b
        if u <= lam:
            return lam * rn
        return rn * max(a * lam - u, 0.0) / (a - 1.0)
    if rn * b <= a * lam:  # mcp
        return max(rn * (lam - b / a), 0.0)
    return 0.0


def lqa_weight(spec: PenaltySpec, beta0: float, n: int) -> float:
    """Curvature of the local quadratic approximation at expansion point beta0.

    Returns p'(|beta0|) / |beta0|, the coefficient of beta^2/2.  Raises for
    |beta0| below ZERO_THRESHOLD: such coordinates must be frozen at zero
    rather than approximated.
    """
    if n < 1:
        raise ValueError("sample size must be at least 1")
    b = abs(float(beta0))
    if b < ZERO_THRESHOLD:
        raise ValueError(
            f"|beta0|={b!r} is below the zero threshold; "
            "coefficient must be frozen at zero, not approximated"
        )
    return _derivative_scalar(spec, b, math.sqrt(n)) / b
