"""Two-component benchmark data generators and the replication study driver.

Model 1 and Model 2 are two-component mixtures over four standard-normal
covariates (independent or AR(0.5)-correlated), unit error variances, and
the coefficient vectors below.  Contamination shifts a fixed fraction of
responses upward by a U(7, 10) draw.
"""

from __future__ import annotations

import csv
import itertools
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from joblib import Parallel, delayed

from .errors import NumericalError
from .manifest import write_manifest
from .metrics import aggregate_replications, align_components, count_zero_pattern, model_error
from .methods import MethodConfig
from .params import Dataset, DatasetTruth, MixtureParams

logger = logging.getLogger(__name__)

MODEL_COEFFICIENTS = {
    "Model1": np.array([[1.0, 0.0, 0.0, 3.0, 0.0], [-1.0, 2.0, 0.0, 0.0, 3.0]]),
    "Model2": np.array([[1.0, 0.6, 0.0, 3.0, 0.0], [-1.0, 0.0, 0.0, 4.0, 0.7]]),
}

RHO_KINDS = ("independent", "ar_half")

_DATA_STREAM = 7919
_FIT_STREAM = 6700417


@dataclass(frozen=True)
class ModelSpec:
    model_id: str = "Model1"
    pi1: float = 0.5
    rho_kind: str = "independent"
    n: int = 100
    sigma2: tuple = (1.0, 1.0)

    def __post_init__(self):
        if self.model_id not in MODEL_COEFFICIENTS:
            raise ValueError(f"unknown model_id {self.model_id!r}")
        if not 0.0 < self.pi1 < 1.0:
            raise ValueError("pi1 must lie strictly between 0 and 1")
        if self.rho_kind not in RHO_KINDS:
            raise ValueError(f"rho_kind must be one of {RHO_KINDS}")
        if self.n < 1:
            raise ValueError("n must be positive")
        if len(self.sigma2) != 2 or any(v <= 0 for v in self.sigma2):
            raise ValueError("sigma2 must be a pair of positive values")

    @property
    def coefficients(self) -> np.ndarray:
        return MODEL_COEFFICIENTS[self.model_id]

    @property
    def n_covariates(self) -> int:
        return self.coefficients.shape[1] - 1

    def covariate_correlation(self) -> np.ndarray:
        p = self.n_covariates
        if self.rho_kind == "independent":
            return np.eye(p)
        ij = np.arange(p)
        return 0.5 ** np.abs(ij[:, None] - ij[None, :])

    def true_params(self) -> MixtureParams:
        return MixtureParams(
            proportions=np.array([self.pi1, 1.0 - self.pi1]),
            coefficients=self.coefficients,
            variances=np.asarray(self.sigma2, dtype=float),
        )

    def second_moment(self) -> np.ndarray:
        p = self.n_covariates
        exx = np.zeros((p + 1, p + 1))
        exx[0, 0] = 1.0
        exx[1:, 1:] = self.covariate_correlation()
        return exx


@dataclass(frozen=True)
class ContaminationSpec:
    alpha0: float = 0.0
    shift_low: float = 7.0
    shift_high: float = 10.0

    def __post_init__(self):
        if not 0.0 <= self.alpha0 < 0.5:
            raise ValueError("alpha0 must lie in [0, 0.5)")
        if self.shift_high < self.shift_low:
            raise ValueError("shift_high must be at least shift_low")


def generate_dataset(spec: ModelSpec, rng: np.random.Generator) -> Dataset:
    """Draw one sample: labels, correlated covariates, responses, truth attached."""
    n, p = spec.n, spec.n_covariates
    beta = spec.coefficients
    labels = (rng.random(n) >= spec.pi1).astype(int)  # 0 = component 1
    chol = np.linalg.cholesky(spec.covariate_correlation())
    X = rng.standard_normal((n, p)) @ chol.T
    design = np.column_stack([np.ones(n), X])
    sigma = np.sqrt(np.asarray(spec.sigma2))
    y = np.einsum("ij,ij->i", design, beta[labels]) + rng.standard_normal(n) * sigma[labels]
    truth = DatasetTruth(
        params=spec.true_params(),
        second_moment=spec.second_moment(),
        contaminated=np.zeros(n, dtype=bool),
    )
    return Dataset(responses=y, design=design, truth=truth)


def contaminate(data: Dataset, spec: ContaminationSpec, rng: np.random.Generator) -> Dataset:
    """Shift floor(alpha0*n) distinct responses upward by U(shift_low, shift_high)."""
    k = math.floor(spec.alpha0 * data.n_rows)
    if k == 0:
        return Dataset(responses=data.responses, design=data.design, truth=data.truth)
    rows = rng.choice(data.n_rows, size=k, replace=False)
    y = data.responses.copy()
    y[rows] += rng.uniform(spec.shift_low, spec.shift_high, size=k)
    truth = data.truth
    if truth is not None:
        flags = truth.contaminated.copy()
        flags[rows] = True
        truth = DatasetTruth(
            params=truth.params, second_moment=truth.second_moment, contaminated=flags
        )
    return Dataset(responses=y, design=data.design, truth=truth)


@dataclass(frozen=True)
class StudyConfig:
    methods: tuple  # MethodConfig instances
    model_ids: tuple = ("Model1",)
    pi1_values: tuple = (0.5,)
    rho_kinds: tuple = ("independent",)
    n_values: tuple = (100, 200)
    contamination_levels: tuple = (0.01, 0.03, 0.05)
    m: int = 2
    replications: int = 200
    master_seed: int = 0
    threads: int = 1
    out_dir: Optional[str] = None

    def __post_init__(self):
        if self.replications < 1:
            raise ValueError("replications must be at least 1")
        if not self.methods:
            raise ValueError("at least one method is required")

    def cells(self) -> list:
        """(model_id, pi1, rho_kind, n, alpha0) tuples in deterministic order."""
        return list(
            itertools.product(
                self.model_ids,
                self.pi1_values,
                self.rho_kinds,
                self.n_values,
                self.contamination_levels,
            )
        )


@dataclass(frozen=True, eq=False)
class StudySummary:
    """Per-cell, per-method aggregates plus failure counts."""

    cells: dict  # cell tuple -> {method name -> CellAggregate}
    failures: dict  # cell tuple -> {method name -> count}
    replications: int


def _replication_scores(cell, methods: Sequence[MethodConfig], m: int, master_seed: int, cell_idx: int, rep: int):
    """Generate one sample and score every method on it."""
    model_id, pi1, rho_kind, n, alpha0 = cell
    spec = ModelSpec(model_id=model_id, pi1=pi1, rho_kind=rho_kind, n=n)
    rng = np.random.default_rng(np.random.SeedSequence([master_seed, _DATA_STREAM, cell_idx, rep]))
    data = generate_dataset(spec, rng)
    data = contaminate(data, ContaminationSpec(alpha0=alpha0), rng)
    truth = data.truth.params
    exx = data.truth.second_moment

    out = {}
    for k, method in enumerate(methods):
        seed = int(
            np.random.SeedSequence([master_seed, _FIT_STREAM, cell_idx, rep, k]).generate_state(1, np.uint32)[0]
        )
        try:
            theta = method.fit(data, m, seed)
        except (NumericalError, np.linalg.LinAlgError) as exc:
            logger.warning("cell %s rep %d method %s failed: %s", cell, rep, method.name, exc)
            out[method.name] = None
            continue
        perm = align_components(theta, truth)
        aligned = theta.permuted(perm)
        score = count_zero_pattern(aligned.coefficients, truth.coefficients)
        errors = model_error(aligned.coefficients, truth.coefficients, exx)
        out[method.name] = (score, errors)
    return out


def run_study(cfg: StudyConfig) -> StudySummary:
    """Execute the full replication study; optionally persist CSVs and a manifest.

    Deterministic for a fixed (config, master_seed): every replication's data
    and fit seeds derive from the cell and replication indices alone, so the
    thread count does not affect results.
    """
    cells = cfg.cells()
    tasks = [(ci, rep) for ci in range(len(cells)) for rep in range(cfg.replications)]
    results = Parallel(n_jobs=cfg.threads)(
        delayed(_replication_scores)(cells[ci], cfg.methods, cfg.m, cfg.master_seed, ci, rep)
        for ci, rep in tasks
    )

    per_cell: dict = {cell: {mth.name: [] for mth in cfg.methods} for cell in cells}
    fail_count: dict = {cell: {mth.name: 0 for mth in cfg.methods} for cell in cells}
    for (ci, _rep), rep_result in zip(tasks, results):
        cell = cells[ci]
        for name, payload in rep_result.items():
            if payload is None:
                fail_count[cell][name] += 1
            else:
                per_cell[cell][name].append(payload)

    summaries: dict = {}
    for cell in cells:
        summaries[cell] = {}
        for mth in cfg.methods:
            scores = per_cell[cell][mth.name]
            if scores:
                summaries[cell][mth.name] = aggregate_replications(scores)
            else:
                summaries[cell][mth.name] = None
    summary = StudySummary(cells=summaries, failures=fail_count, replications=cfg.replications)

    if cfg.out_dir is not None:
        write_study_outputs(summary, cfg, cfg.out_dir)
    return summary


def write_study_outputs(summary: StudySummary, cfg: StudyConfig, out_dir) -> list:
    """One CSV per (model, pi1, rho) group plus a JSON manifest; returns paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    groups: dict = {}
    for cell in cfg.cells():
        groups.setdefault(cell[:3], []).append(cell)

    comps = range(1, cfg.m + 1)
    stat_cols = (
        [f"correct_zeros_comp{j}" for j in comps]
        + [f"incorrect_zeros_comp{j}" for j in comps]
        + [f"mme_comp{j}" for j in comps]
        + [f"accuracy_comp{j}" for j in comps]
    )

    paths = []
    for (model_id, pi1, rho_kind), group_cells in groups.items():
        path = out / f"results_{model_id}_pi{pi1}_{rho_kind}.csv"
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(
                ["n", "contamination", "method", "estimator", "penalty"]
                + stat_cols
                + ["failed_replications", "replications"]
            )
            for cell in group_cells:
                _, _, _, n, alpha0 = cell
                for mth in cfg.methods:
                    agg = summary.cells[cell][mth.name]
                    estimator = "trim" if mth.trimmed else "FMR"
                    if agg is None:
                        row_vals = ["NA"] * len(stat_cols)
                    else:
                        row_vals = [
                            repr(float(v))
                            for block in (
                                agg.mean_correct_zeros,
                                agg.mean_incorrect_zeros,
                                agg.median_model_error,
                                agg.model_accuracy,
                            )
                            for v in block
                        ]
                    writer.writerow(
                        [n, repr(float(alpha0)), mth.name, estimator, mth.family.upper()]
                        + row_vals
                        + [summary.failures[cell][mth.name], cfg.replications]
                    )
        paths.append(path)

    manifest_path = out / "manifest.json"
    write_manifest(
        manifest_path,
        command="simulate",
        config=cfg,
        master_seed=cfg.master_seed,
        outputs=paths,
    )
    return paths + [manifest_path]
