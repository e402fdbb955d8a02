"""Sklearn-style estimator layer over the path solvers.

Each estimator fits a full penalized path on standardized inputs, applies
one named selector, and exposes the chosen fit through the usual
``coef_`` / ``intercept_`` / ``predict`` surface, so the models compose
with the wider scikit-learn ecosystem (cloning, pipelines, grid search).
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin

from .design import as_matrix, as_vector, standardize
from .families import BERNOULLI_LOGIT, POISSON
from .glm_path import glm_fit_path, glm_lambda_grid
from .linear_path import fit_path, lambda_grid, resolve_penalty, sigma_tilde
from .selectors import (
    GLM_SELECTORS,
    kfold_cv,
    score_gaussian_path,
    score_glm_path,
)

__all__ = ["PenalizedRegression", "PenalizedGLM"]

_FAMILIES = {"poisson": POISSON, "bernoulli_logit": BERNOULLI_LOGIT}


def _cv_folds(selector: str) -> int | None:
    if selector.startswith("cv"):
        try:
            return int(selector[2:])
        except ValueError:
            raise ValueError(f"malformed cross-validation selector {selector!r}") from None
    return None


class PenalizedRegression(RegressorMixin, BaseEstimator):
    """Gaussian penalized regression with automatic lambda selection.

    Parameters
    ----------
    penalty : {"l1", "scad", "scad37"}
        Penalty mode; "scad" picks the smallest convexity-preserving shape
        for the given design, "scad37" fixes the conventional 3.7 and
        accepts a possibly local stationary point.
    selector : str
        One of "aic", "aicc", "bic", "cp", "gcv", "gamma", or "cv<k>".
    n_lambdas : int
        Grid size (even, >= 4).
    fit_intercept : bool
    tol, max_iter : solver controls.
    random_state : int
        Seeds the cross-validation fold shuffle only.

    Attributes
    ----------
    coef_ : ndarray of shape (d,)
    intercept_ : float
    lambda_ : float
    df_ : int
    path_ : PathFit
    criterion_ : SelectorScore
    """

    def __init__(self, penalty="l1", selector="aicc", n_lambdas=200,
                 fit_intercept=True, tol=1e-8, max_iter=10_000, random_state=0):
        self.penalty = penalty
        self.selector = selector
        self.n_lambdas = n_lambdas
        self.fit_intercept = fit_intercept
        self.tol = tol
        self.max_iter = max_iter
        self.random_state = random_state

    def fit(self, X, y):
        X = as_matrix(X)
        y = as_vector(y, X.shape[0])
        design = standardize(X, intercept=self.fit_intercept)
        kind, allow = resolve_penalty(self.penalty, design)
        lambdas = lambda_grid(design, y, self.n_lambdas)
        path = fit_path(design, y, kind, lambdas, tol=self.tol,
                        max_iter=self.max_iter, allow_nonconvex=allow)
        k = _cv_folds(self.selector)
        if k is not None:
            score = kfold_cv(design, y, kind, lambdas, k=k,
                             rng_seed=self.random_state, allow_nonconvex=allow,
                             df_path=path.df)
        else:
            st2 = sigma_tilde(design, y) if self.selector == "cp" else None
            score = score_gaussian_path(path, self.selector, sigma_tilde2=st2)
        self._finalize(path, score, X)
        return self

    def _finalize(self, path, score, X):
        idx = score.selected_index
        self.path_ = path
        self.criterion_ = score
        self.lambda_ = float(path.lambdas[idx])
        self.df_ = int(path.df[idx])
        self.intercept_ = float(path.coefficients[idx, 0])
        self.coef_ = path.coefficients[idx, 1:].copy()
        self.n_features_in_ = X.shape[1]

    def predict(self, X):
        if not hasattr(self, "coef_"):
            raise RuntimeError("estimator is not fitted")
        X = as_matrix(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} features, expected {self.n_features_in_}")
        return self.intercept_ + X @ self.coef_


class PenalizedGLM(BaseEstimator):
    """Penalized GLM (canonical link) with automatic lambda selection.

    ``family`` is "poisson" or "bernoulli_logit".  ``predict`` returns the
    fitted mean; ``predict_linear`` returns the linear predictor.  Selectors
    are restricted to the GLM set ("aic", "aicc", "bic", "cv<k>").
    """

    def __init__(self, family="poisson", penalty="l1", selector="aicc",
                 n_lambdas=200, fit_intercept=True, tol=1e-7, max_iter=200,
                 random_state=0):
        self.family = family
        self.penalty = penalty
        self.selector = selector
        self.n_lambdas = n_lambdas
        self.fit_intercept = fit_intercept
        self.tol = tol
        self.max_iter = max_iter
        self.random_state = random_state

    def fit(self, X, y):
        if self.family not in _FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; expected one of "
                             f"{sorted(_FAMILIES)}")
        fam = _FAMILIES[self.family]
        k = _cv_folds(self.selector)
        if k is None and self.selector not in ("aic", "aicc", "bic"):
            raise ValueError(f"selector {self.selector!r} is unavailable for GLMs; "
                             f"allowed: {GLM_SELECTORS}")
        X = as_matrix(X)
        y = as_vector(y, X.shape[0])
        design = standardize(X, intercept=self.fit_intercept)
        kind, allow = resolve_penalty(self.penalty, design)
        lambdas = glm_lambda_grid(design, y, fam, self.n_lambdas)
        path = glm_fit_path(design, y, fam, kind, lambdas, tol=self.tol,
                            max_iter=self.max_iter)
        if k is not None:
            score = kfold_cv(design, y, kind, lambdas, k=k, family=fam,
                             rng_seed=self.random_state, df_path=path.df)
        else:
            score = score_glm_path(path, self.selector)
        idx = score.selected_index
        self.path_ = path
        self.criterion_ = score
        self.lambda_ = float(path.lambdas[idx])
        self.df_ = int(path.df[idx])
        self.intercept_ = float(path.coefficients[idx, 0])
        self.coef_ = path.coefficients[idx, 1:].copy()
        self.n_features_in_ = X.shape[1]
        self._b_prime = fam.b_prime
        return self

    def predict_linear(self, X):
        if not hasattr(self, "coef_"):
            raise RuntimeError("estimator is not fitted")
        X = as_matrix(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} features, expected {self.n_features_in_}")
        return self.intercept_ + X @ self.coef_

    def predict(self, X):
        return self._b_prime(self.predict_linear(X))
