"""Robust variable selection for finite mixtures of linear regressions.

Penalized EM (lasso/SCAD/MCP via local quadratic approximation) made
outlier-robust by trimmed-likelihood fitting, with bootstrap selection of
the trimming proportion and a Monte-Carlo study harness.
"""

from .params import Dataset, DatasetTruth, MixtureParams, Responsibilities
from .penalties import PenaltySpec, lqa_weight, penalty_derivative, penalty_value
from .likelihood import (
    component_density,
    log_likelihood,
    mixture_density,
    penalized_objective,
)
from .em import (
    EmControls,
    FitResult,
    e_step,
    fit_penalized_fmr,
    m_step_beta,
    m_step_proportions,
    m_step_sigma,
    select_lambda,
)
from .trimming import TrimSpec, TrimmedFit, exhaustive_tle, fit_trimmed, trim_index_set
from .alpha_select import AlphaSelectConfig, AlphaSelectReport, bootstrap_resample, select_alpha
from .metrics import (
    ZeroPatternScore,
    aggregate_replications,
    align_components,
    count_zero_pattern,
    kfold_cv_error,
    mccv_error,
    model_error,
)
from .methods import MethodConfig, method_from_tag
from .simulation import ContaminationSpec, ModelSpec, StudyConfig, contaminate, generate_dataset, run_study

__version__ = "0.1.0"

__all__ = [
    "AlphaSelectConfig",
    "AlphaSelectReport",
    "ContaminationSpec",
    "Dataset",
    "DatasetTruth",
    "EmControls",
    "FitResult",
    "MethodConfig",
    "MixtureParams",
    "ModelSpec",
    "PenaltySpec",
    "Responsibilities",
    "StudyConfig",
    "TrimSpec",
    "TrimmedFit",
    "ZeroPatternScore",
    "aggregate_replications",
    "align_components",
    "bootstrap_resample",
    "component_density",
    "contaminate",
    "count_zero_pattern",
    "e_step",
    "exhaustive_tle",
    "fit_penalized_fmr",
    "fit_trimmed",
    "generate_dataset",
    "kfold_cv_error",
    "log_likelihood",
    "lqa_weight",
    "m_step_beta",
    "m_step_proportions",
    "m_step_sigma",
    "mccv_error",
    "method_from_tag",
    "mixture_density",
    "model_error",
    "penalized_objective",
    "penalty_derivative",
    "penalty_value",
    "run_study",
    "select_alpha",
    "select_lambda",
    "trim_index_set",
    "__version__",
]
