"""Penalized regression paths with data-driven tuning-parameter selection.

Core pieces: L1/SCAD coordinate-descent path solvers for Gaussian and
exponential-family responses, classical selection criteria (AIC, AICc, BIC,
Cp, GCV, and a variance-inflation criterion) plus k-fold cross-validation,
loss/efficiency metrics against the true mean, synthetic data generators,
and a Monte Carlo harness with a command-line front end.
"""

from .penalties import (
    L1Penalty,
    ScadPenalty,
    convex_scad_a,
    penalty_derivative,
    penalty_value,
    univariate_update,
)
from .design import DesignMatrix, standardize
from .families import BERNOULLI_LOGIT, POISSON, GlmFamily
from .linear_path import (
    ConvergenceError,
    PathFit,
    fit_path,
    lambda_grid,
    ols_refit,
    resolve_penalty,
    sigma_tilde,
)
from .glm_path import (
    GlmDivergenceError,
    GlmPathFit,
    glm_fit_path,
    glm_lambda_grid,
    glm_lambda_max,
    pseudo_true_theta,
)
from .selectors import SelectorScore, kfold_cv, score_gaussian_path, score_glm_path, select
from .losses import LossReport, efficiency, holdout_l2_loss, kl_loss, l2_loss
from .simulate import (
    Scenario,
    dimension_for,
    gen_exponential,
    gen_omitted,
    gen_poisson,
    projection_bias,
    trig_design,
)
from .harness import RealizationRecord, ScenarioSummary, median, run_scenario
from .estimators import PenalizedGLM, PenalizedRegression

__version__ = "0.1.0"

__all__ = [
    "L1Penalty",
    "ScadPenalty",
    "convex_scad_a",
    "penalty_derivative",
    "penalty_value",
    "univariate_update",
    "DesignMatrix",
    "standardize",
    "GlmFamily",
    "POISSON",
    "BERNOULLI_LOGIT",
    "PathFit",
    "ConvergenceError",
    "fit_path",
    "lambda_grid",
    "ols_refit",
    "resolve_penalty",
    "sigma_tilde",
    "GlmPathFit",
    "GlmDivergenceError",
    "glm_fit_path",
    "glm_lambda_grid",
    "glm_lambda_max",
    "pseudo_true_theta",
    "SelectorScore",
    "select",
    "score_gaussian_path",
    "score_glm_path",
    "kfold_cv",
    "LossReport",
    "l2_loss",
    "kl_loss",
    "holdout_l2_loss",
    "efficiency",
    "Scenario",
    "dimension_for",
    "trig_design",
    "gen_exponential",
    "gen_omitted",
    "gen_poisson",
    "projection_bias",
    "RealizationRecord",
    "ScenarioSummary",
    "median",
    "run_scenario",
    "PenalizedRegression",
    "PenalizedGLM",
]
