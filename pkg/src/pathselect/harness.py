"""Monte Carlo harness: per-realization pipeline, seeding, aggregation.

Each realization draws its noise from a stream determined entirely by
(base_seed, rep_index), so results are identical whatever the worker count
or scheduling order.  Failed realizations are recorded and counted; medians
are taken over the successes only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from joblib import Parallel, delayed

from .design import DesignMatrix
from .families import POISSON
from .glm_path import GlmDivergenceError, glm_fit_path, glm_lambda_grid
from .linear_path import (
    ConvergenceError,
    fit_path,
    lambda_grid,
    resolve_penalty,
    sigma_tilde,
)
from .losses import LossReport, kl_loss
from .selectors import kfold_cv, score_gaussian_path, score_glm_path
from .simulate import Scenario, gen_exponential, gen_omitted, gen_poisson, trig_design

__all__ = [
    "SelectionOutcome",
    "RealizationRecord",
    "ScenarioSummary",
    "ScenarioFailure",
    "median",
    "run_scenario",
]

_DESIGN_SPAWN_KEY = 2 ** 16


class ScenarioFailure(RuntimeError):
    """More than half the realizations failed; the cell is not reportable."""


def median(values) -> float:
    """Median with the usual convention: the average of the two central
    order statistics when the count is even."""
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        raise ValueError("median of empty sequence")
    return float(np.median(arr))


@dataclass(frozen=True)
class SelectionOutcome:
    """One selector's result on one realization."""

    selected_lambda: float
    selected_df: int
    loss: float
    efficiency: float


@dataclass
class RealizationRecord:
    """Everything retained from one Monte Carlo realization."""

    rep: int
    selections: dict = field(default_factory=dict)
    oracle_lambda: float = math.nan
    oracle_df: int = 0
    min_loss: float = math.nan
    flag: str = ""
    failed: bool = False
    failure_reason: str = ""


@dataclass
class ScenarioSummary:
    """Per-selector medians over the successful realizations of one cell."""

    scenario: Scenario
    median_efficiency: dict
    df_quantiles: dict
    median_min_loss: float
    failures: int
    reps: int


def _rep_rng(base_seed: int, rep: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(base_seed, spawn_key=(rep,)))


def _cv_seed(base_seed: int, rep: int):
    return np.random.SeedSequence(base_seed, spawn_key=(rep, 1))


@dataclass
class _Prepared:
    """Scenario state shared by every realization (fixed design, penalty)."""

    kind: object
    allow_nonconvex: bool
    design: DesignMatrix | None = None
    mu: np.ndarray | None = None
    theta0: np.ndarray | None = None
    holdout_values: np.ndarray | None = None
    mu_holdout: np.ndarray | None = None


def _prepare(scenario: Scenario) -> _Prepared:
    if scenario.design == "exponential":
        design = trig_design(scenario.n, scenario.d_n)
        mu = np.exp(4.0 * np.arange(1, scenario.n + 1) / scenario.n)
        kind, allow = resolve_penalty(scenario.penalty, design)
        return _Prepared(kind=kind, allow_nonconvex=allow, design=design, mu=mu)
    if scenario.design == "poisson":
        design = trig_design(scenario.n, scenario.d_n)
        theta0 = np.exp(-5.0 * np.arange(scenario.n) / scenario.n)
        kind, allow = resolve_penalty(scenario.penalty, design)
        return _Prepared(kind=kind, allow_nonconvex=allow, design=design,
                         mu=np.exp(theta0), theta0=theta0)
    # omitted: the design block is random but drawn once per scenario
    probe = gen_omitted(scenario.n, scenario.c, scenario.rho, scenario.sigma2,
                        np.random.SeedSequence(scenario.base_seed,
                                               spawn_key=(_DESIGN_SPAWN_KEY,)),
                        _rep_rng(scenario.base_seed, 0))
    kind, allow = resolve_penalty(scenario.penalty, probe.design)
    return _Prepared(kind=kind, allow_nonconvex=allow, design=probe.design,
                     mu=probe.mu_train, holdout_values=probe.holdout_values,
                     mu_holdout=probe.mu_holdout)


def _predictions(coefficients: np.ndarray, X: np.ndarray) -> np.ndarray:
    """(n, G) matrix of linear predictors from a (G, d+1) coefficient path."""
    return coefficients[:, 0][None, :] + X @ coefficients[:, 1:].T


def _run_one(scenario: Scenario, rep: int, prep: _Prepared) -> RealizationRecord:
    rng = _rep_rng(scenario.base_seed, rep)
    record = RealizationRecord(rep=rep)
    try:
        if scenario.design == "poisson":
            return _run_one_poisson(scenario, rep, prep, rng, record)
        design = prep.design
        y = prep.mu + math.sqrt(scenario.sigma2) * rng.standard_normal(scenario.n)
        lambdas = lambda_grid(design, y)
        path = fit_path(design, y, prep.kind, lambdas,
                        allow_nonconvex=prep.allow_nonconvex)
        if scenario.design == "omitted":
            preds = _predictions(path.coefficients, prep.holdout_values)
            losses = np.mean((prep.mu_holdout[:, None] - preds) ** 2, axis=0)
        else:
            preds = _predictions(path.coefficients, design.values)
            losses = np.mean((prep.mu[:, None] - preds) ** 2, axis=0)
        st2 = sigma_tilde(design, y) if "cp" in scenario.selectors else None
        selections = {}
        for name in scenario.selectors:
            if name.startswith("cv"):
                score = kfold_cv(design, y, prep.kind, lambdas, k=int(name[2:]),
                                 rng_seed=_cv_seed(scenario.base_seed, rep),
                                 allow_nonconvex=prep.allow_nonconvex,
                                 df_path=path.df)
            else:
                score = score_gaussian_path(path, name, sigma_tilde2=st2)
            selections[name] = score.selected_index
        return _fill_record(record, path, losses, selections)
    except (ConvergenceError, GlmDivergenceError, ValueError,
            np.linalg.LinAlgError) as exc:
        record.failed = True
        record.failure_reason = f"{type(exc).__name__}: {exc}"
        record.flag = "failed"
        return record


def _run_one_poisson(scenario, rep, prep, rng, record) -> RealizationRecord:
    design = prep.design
    y = rng.poisson(prep.mu).astype(float)
    lambdas = glm_lambda_grid(design, y, POISSON)
    path = glm_fit_path(design, y, POISSON, prep.kind, lambdas)
    losses = np.array([
        kl_loss(prep.mu, prep.theta0, theta_hat, POISSON)
        for theta_hat in _predictions(path.coefficients, design.values).T
    ])
    selections = {}
    for name in scenario.selectors:
        if name.startswith("cv"):
            score = kfold_cv(design, y, prep.kind, lambdas, k=int(name[2:]),
                             family=POISSON,
                             rng_seed=_cv_seed(scenario.base_seed, rep),
                             df_path=path.df)
        else:
            score = score_glm_path(path, name)
        selections[name] = score.selected_index
    return _fill_record(record, path, losses, selections)


def _fill_record(record, path, losses, selections) -> RealizationRecord:
    report = LossReport.from_curve(losses, selections)
    record.oracle_lambda = float(path.lambdas[report.oracle_index])
    record.oracle_df = int(path.df[report.oracle_index])
    record.min_loss = report.min_loss
    flags = []
    for name, idx in selections.items():
        eff = report.selector_efficiency[name]
        if not math.isfinite(eff):
            flags.append(f"inf_efficiency:{name}")
        if eff < 1.0:  # ratio to the grid minimum cannot drop below 1
            raise AssertionError(f"efficiency below 1 for {name}: {eff}")
        record.selections[name] = SelectionOutcome(
            selected_lambda=float(path.lambdas[idx]),
            selected_df=int(path.df[idx]),
            loss=report.selector_losses[name],
            efficiency=eff,
        )
    record.flag = ";".join(flags)
    return record


def run_scenario(scenario: Scenario, workers: int = 1):
    """Run every realization of one scenario cell.

    Returns (records, summary), records ordered by rep index.  Raises
    :class:`ScenarioFailure` if more than half the realizations fail.
    """
    scenario.validate()
    if workers < 1:
        raise ValueError("workers must be at least 1")
    prep = _prepare(scenario)
    reps = range(scenario.reps)
    if workers == 1:
        records = [_run_one(scenario, rep, prep) for rep in reps]
    else:
        records = Parallel(n_jobs=workers, prefer="threads")(
            delayed(_run_one)(scenario, rep, prep) for rep in reps)
    return records, summarize(scenario, records)


def summarize(scenario: Scenario, records) -> ScenarioSummary:
    """Aggregate realization records into the cell summary."""
    ok = [r for r in records if not r.failed]
    failures = len(records) - len(ok)
    if failures > 0.5 * len(records):
        reasons = {r.failure_reason for r in records if r.failed}
        raise ScenarioFailure(
            f"{failures}/{len(records)} realizations failed; first reasons: "
            f"{sorted(reasons)[:3]}")
    med_eff, df_q = {}, {}
    for name in scenario.selectors:
        effs = [r.selections[name].efficiency for r in ok]
        dfs = [r.selections[name].selected_df for r in ok]
        med_eff[name] = median(effs)
        df_q[name] = (float(np.min(dfs)),
                      float(np.quantile(dfs, 0.25)),
                      median(dfs),
                      float(np.quantile(dfs, 0.75)),
                      float(np.max(dfs)))
    return ScenarioSummary(scenario=scenario,
                           median_efficiency=med_eff,
                           df_quantiles=df_q,
                           median_min_loss=median([r.min_loss for r in ok]),
                           failures=failures,
                           reps=len(records))
