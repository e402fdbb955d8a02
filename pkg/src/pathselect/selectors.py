"""Tuning-parameter selection criteria and k-fold cross-validation.

Gaussian criteria score a path through its per-lambda residual variance and
model size; GLM criteria use the per-lambda log-likelihood.  All criteria
are "smaller is better" and ties break toward the smaller grid index, i.e.
the larger lambda.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .design import DesignMatrix, as_vector, standardize
from .families import GlmFamily
from .glm_path import GlmDivergenceError, GlmPathFit, glm_fit_path
from .linear_path import ConvergenceError, PathFit, fit_path
from .penalties import PenaltyKind

__all__ = [
    "aic_gauss",
    "aicc_gauss",
    "bic_gauss",
    "gcv",
    "cp",
    "gamma_n",
    "aic_glm",
    "aicc_glm",
    "bic_glm",
    "select",
    "SelectorScore",
    "score_gaussian_path",
    "score_glm_path",
    "kfold_cv",
    "GAUSSIAN_SELECTORS",
    "GLM_SELECTORS",
]

GAUSSIAN_SELECTORS = ("cv10", "aic", "aicc", "bic", "cp", "gcv", "gamma")
GLM_SELECTORS = ("cv10", "aic", "aicc", "bic")


def _log_sigma2(sigma2_hat):
    s2 = np.asarray(sigma2_hat, dtype=float)
    out = np.full(s2.shape, np.inf)
    pos = s2 > 0
    out[pos] = np.log(s2[pos])
    return out


def _ret(out, template):
    return float(out) if np.ndim(template) == 0 else out


def aic_gauss(sigma2_hat, df, n):
    """log(sigma2_hat) + 2*df/n."""
    out = _log_sigma2(sigma2_hat) + 2.0 * np.asarray(df, dtype=float) / n
    return _ret(out, sigma2_hat)


def aicc_gauss(sigma2_hat, df, n):
    """log(sigma2_hat) + 2*(df + 1)/(n - df - 2), +inf once df >= n - 2."""
    df_arr = np.atleast_1d(np.asarray(df, dtype=float))
    logs = np.atleast_1d(_log_sigma2(sigma2_hat))
    out = np.full(np.broadcast(df_arr, logs).shape, np.inf)
    ok = df_arr < n - 2
    out[ok] = logs[ok] + 2.0 * (df_arr[ok] + 1.0) / (n - df_arr[ok] - 2.0)
    return _ret(out[0] if np.ndim(sigma2_hat) == 0 and np.ndim(df) == 0 else out, sigma2_hat)


def bic_gauss(sigma2_hat, df, n):
    """log(sigma2_hat) + log(n)*df/n."""
    out = _log_sigma2(sigma2_hat) + np.log(n) * np.asarray(df, dtype=float) / n
    return _ret(out, sigma2_hat)


def gcv(sigma2_hat, df, n):
    """sigma2_hat / (1 - df/n)^2, +inf once df >= n."""
    df_arr = np.atleast_1d(np.asarray(df, dtype=float))
    s2 = np.atleast_1d(np.asarray(sigma2_hat, dtype=float))
    out = np.full(np.broadcast(df_arr, s2).shape, np.inf)
    ok = df_arr < n
    out[ok] = s2[ok] / (1.0 - df_arr[ok] / n) ** 2
    return _ret(out[0] if np.ndim(sigma2_hat) == 0 and np.ndim(df) == 0 else out, sigma2_hat)


def cp(sigma2_hat, df, n, sigma_tilde2):
    """sigma2_hat + 2*df*sigma_tilde2/n with the full-model variance plug-in."""
    out = np.asarray(sigma2_hat, dtype=float) + 2.0 * np.asarray(df, dtype=float) * sigma_tilde2 / n
    return _ret(out, sigma2_hat)


def gamma_n(sigma2_hat, df, n):
    """sigma2_hat * (1 + 2*df/n), the variance-inflation criterion."""
    out = np.asarray(sigma2_hat, dtype=float) * (1.0 + 2.0 * np.asarray(df, dtype=float) / n)
    return _ret(out, sigma2_hat)


def aic_glm(loglik, df, n):
    """-(2/n)*loglik + 2*df/n."""
    out = -2.0 * np.asarray(loglik, dtype=float) / n + 2.0 * np.asarray(df, dtype=float) / n
    return _ret(out, loglik)


def aicc_glm(loglik, df, n):
    """-(2/n)*loglik + 2*(df + 1)/(n - df - 2), +inf once df >= n - 2."""
    df_arr = np.atleast_1d(np.asarray(df, dtype=float))
    ll = np.atleast_1d(np.asarray(loglik, dtype=float))
    out = np.full(np.broadcast(df_arr, ll).shape, np.inf)
    ok = df_arr < n - 2
    out[ok] = -2.0 * ll[ok] / n + 2.0 * (df_arr[ok] + 1.0) / (n - df_arr[ok] - 2.0)
    return _ret(out[0] if np.ndim(loglik) == 0 and np.ndim(df) == 0 else out, loglik)


def bic_glm(loglik, df, n):
    """-(2/n)*loglik + log(n)*df/n."""
    out = -2.0 * np.asarray(loglik, dtype=float) / n + np.log(n) * np.asarray(df, dtype=float) / n
    return _ret(out, loglik)


def select(values) -> int:
    """Index of the smallest criterion value; ties go to the smaller index
    (the larger lambda).  Raises if every value is +inf."""
    vals = np.asarray(values, dtype=float).ravel()
    if vals.size == 0:
        raise ValueError("no criterion values to select from")
    if np.any(np.isnan(vals)):
        raise ValueError("criterion values contain NaN")
    if not np.any(np.isfinite(vals)):
        raise ValueError("no admissible lambda: every criterion value is +inf")
    return int(np.argmin(vals))


@dataclass(frozen=True)
class SelectorScore:
    """A selector's criterion curve and its choice on a path."""

    name: str
    values: np.ndarray
    selected_index: int
    selected_lambda: float
    selected_df: Optional[int] = None


def _finish(name, values, lambdas, df) -> SelectorScore:
    idx = select(values)
    return SelectorScore(name=name, values=np.asarray(values, dtype=float),
                         selected_index=idx, selected_lambda=float(lambdas[idx]),
                         selected_df=None if df is None else int(df[idx]))


def score_gaussian_path(path: PathFit, name: str,
                        sigma_tilde2: float | None = None) -> SelectorScore:
    """Evaluate one named criterion along a Gaussian path.

    ``cp`` needs the full-model variance estimate ``sigma_tilde2``.
    """
    n = path.n_samples
    if name == "aic":
        values = aic_gauss(path.sigma2_hat, path.df, n)
    elif name == "aicc":
        values = aicc_gauss(path.sigma2_hat, path.df, n)
    elif name == "bic":
        values = bic_gauss(path.sigma2_hat, path.df, n)
    elif name == "gcv":
        values = gcv(path.sigma2_hat, path.df, n)
    elif name == "gamma":
        values = gamma_n(path.sigma2_hat, path.df, n)
    elif name == "cp":
        if sigma_tilde2 is None:
            raise ValueError("cp needs sigma_tilde2 (full-model residual variance)")
        values = cp(path.sigma2_hat, path.df, n, sigma_tilde2)
    else:
        raise ValueError(f"unknown Gaussian selector {name!r}")
    return _finish(name, values, path.lambdas, path.df)


def score_glm_path(path: GlmPathFit, name: str) -> SelectorScore:
    """Evaluate one named criterion along a GLM path (aic, aicc, or bic)."""
    n = path.n_samples
    if name == "aic":
        values = aic_glm(path.loglik, path.df, n)
    elif name == "aicc":
        values = aicc_glm(path.loglik, path.df, n)
    elif name == "bic":
        values = bic_glm(path.loglik, path.df, n)
    elif name in ("cp", "gcv", "gamma"):
        raise ValueError(f"selector {name!r} is unavailable for GLM paths")
    else:
        raise ValueError(f"unknown GLM selector {name!r}")
    return _finish(name, values, path.lambdas, path.df)


def kfold_cv(design: DesignMatrix, y, kind: PenaltyKind, lambdas, k: int = 10,
             family: GlmFamily | None = None, rng_seed=0,
             allow_nonconvex: bool = False, df_path=None,
             tol: float | None = None) -> SelectorScore:
    """k-fold cross-validation over a fixed lambda grid.

    One seeded random partition into k folds whose sizes differ by at most
    one.  Each fold's training rows are re-standardized and refit over the
    same grid; held-out prediction error is averaged across folds (mean
    squared prediction error for Gaussian responses, mean held-out deviance
    ``-(2/m) * sum [y theta - b(theta)]`` for GLMs).  Grid points past a fold's
    solver failure score +inf for that fold.

    ``df_path`` (the full-data df sequence) only annotates the returned
    SelectorScore.

    Returns a SelectorScore named ``cv<k>``.
    """
    y_arr = as_vector(y, design.n)
    lam = np.asarray(lambdas, dtype=float).ravel()
    n = design.n
    if not 2 <= k <= n:
        raise ValueError(f"fold count must satisfy 2 <= k <= n, got k={k}, n={n}")
    perm = np.random.default_rng(rng_seed).permutation(n)
    folds = [np.sort(perm[i::k]) for i in range(k)]
    fold_scores = np.zeros((k, lam.size))
    for fi, test_idx in enumerate(folds):
        mask = np.ones(n, dtype=bool)
        mask[test_idx] = False
        train_design = standardize(design.values[mask], intercept=design.intercept)
        y_train, y_test = y_arr[mask], y_arr[test_idx]
        X_test = design.values[test_idx]
        coefficients, upto = _fold_path(train_design, y_train, kind, lam,
                                        family, allow_nonconvex, tol)
        scores = np.full(lam.size, np.inf)
        if upto > 0:
            theta = coefficients[:upto, 0][None, :] + X_test @ coefficients[:upto, 1:].T
            if family is None:
                scores[:upto] = np.mean((y_test[:, None] - theta) ** 2, axis=0)
            else:
                m = y_test.size
                scores[:upto] = -(2.0 / m) * (y_test @ theta - family.b(theta).sum(axis=0))
        fold_scores[fi] = scores
    values = fold_scores.mean(axis=0)
    idx = select(values)
    return SelectorScore(name=f"cv{k}", values=values, selected_index=idx,
                         selected_lambda=float(lam[idx]),
                         selected_df=None if df_path is None else int(df_path[idx]))


def _fold_path(train_design, y_train, kind, lam, family, allow_nonconvex, tol):
    """Fit one fold, tolerating solver failure part-way along the grid."""
    kwargs = {} if tol is None else {"tol": tol}
    try:
        if family is None:
            fit = fit_path(train_design, y_train, kind, lam,
                           allow_nonconvex=allow_nonconvex, **kwargs)
        else:
            fit = glm_fit_path(train_design, y_train, family, kind, lam, **kwargs)
        return fit.coefficients, lam.size
    except (ConvergenceError, GlmDivergenceError) as exc:
        if exc.partial is None or exc.partial.lambdas.size == 0:
            return np.zeros((0, train_design.d + 1)), 0
        return exc.partial.coefficients, exc.partial.lambdas.size
