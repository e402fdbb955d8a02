"""Penalized GLM paths: outer IRLS around the weighted coordinate-descent
inner solver.

The objective is ``-(1/n) * sum_i [y_i theta_i - b(theta_i)] + sum_j p_lam(|beta_j|)``
with canonical link, standardized columns, and an unpenalized intercept.
Each outer step rebuilds the working response ``z = theta + (y - b'(theta)) / b''(theta)``
and weights ``w = b''(theta)``, solves the penalized weighted least squares
subproblem, and backtracks toward the previous iterate if the objective
fails to decrease.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .design import DesignMatrix, as_vector
from .families import GlmFamily
from .linear_path import _check_lambdas, _make_grid
from .penalties import PenaltyKind, ScadPenalty, check_kind, penalty_value

__all__ = [
    "GlmPathFit",
    "GlmDivergenceError",
    "glm_lambda_max",
    "glm_lambda_grid",
    "glm_fit_path",
    "pseudo_true_theta",
]

POISSON_THETA_CLAMP = 30.0
_MIN_WEIGHT = 1e-10


class GlmDivergenceError(RuntimeError):
    """IRLS diverged at one grid point (carries the converged prefix)."""

    def __init__(self, grid_index: int, reason: str, partial: "GlmPathFit | None" = None):
        super().__init__(f"GLM path diverged at grid index {grid_index}: {reason}")
        self.grid_index = grid_index
        self.partial = partial


@dataclass
class GlmPathFit:
    """GLM solution path; layout mirrors PathFit with loglik in place of
    the residual variance.  ``loglik`` is ``sum_i [y_i theta_i - b(theta_i)]``
    at the converged fit (base-measure terms omitted)."""

    lambdas: np.ndarray
    coefficients: np.ndarray
    df: np.ndarray
    loglik: np.ndarray
    n_samples: int
    family: GlmFamily


def _validate_response(y, family: GlmFamily) -> np.ndarray:
    y = np.asarray(y, dtype=float).ravel()
    if not np.all(np.isfinite(y)):
        raise ValueError("y contains non-finite values")
    if family.name == "poisson":
        if np.any(y < 0) or np.any(y != np.floor(y)):
            raise ValueError("Poisson responses must be nonnegative integers")
    elif family.name == "bernoulli_logit":
        if not np.all((y == 0) | (y == 1)):
            raise ValueError("Bernoulli responses must be 0 or 1")
    return y


def _null_theta(y: np.ndarray, family: GlmFamily) -> float:
    """Intercept-only MLE of the linear predictor: solves b'(theta) = mean(y)."""
    ybar = float(y.mean())
    if family.name == "poisson":
        if ybar <= 0:
            raise ValueError("Poisson intercept-only fit needs mean(y) > 0")
        return float(np.log(ybar))
    if family.name == "bernoulli_logit":
        if not 0.0 < ybar < 1.0:
            raise ValueError("logit intercept-only fit needs 0 < mean(y) < 1")
        return float(np.log(ybar / (1.0 - ybar)))
    raise ValueError(f"no closed-form null fit for family {family.name!r}")


def glm_lambda_max(design: DesignMatrix, y, family: GlmFamily) -> float:
    """Smallest lambda zeroing every slope: max_j |x_j'(y - mean(y))| / n
    on standardized columns, from the score at the intercept-only fit."""
    y = _validate_response(as_vector(y, design.n), family)
    _null_theta(y, family)  # raises if the intercept-only fit is degenerate
    lam_max = float(np.max(np.abs(design.standardized.T @ (y - y.mean()))) / design.n)
    if lam_max <= 0.0:
        raise ValueError("lambda_max is zero: response carries no signal")
    # pad by a hair so the anchor zeroes every slope regardless of the inner
    # solver's summation order (see lambda_grid)
    return lam_max * (1.0 + 1e-12)


def glm_lambda_grid(design: DesignMatrix, y, family: GlmFamily,
                    count: int = 200) -> np.ndarray:
    """Same log-then-linear grid as the Gaussian solver, with the floor
    raised to 1e-3 * lam_max (GLM paths lose stability deeper)."""
    if count < 4 or count % 2 != 0:
        raise ValueError(f"grid count must be an even number >= 4, got {count}")
    lam_max = glm_lambda_max(design, y, family)
    return _make_grid(lam_max, 1e-3 * lam_max, count)


def glm_fit_path(design: DesignMatrix, y, family: GlmFamily, kind: PenaltyKind,
                 lambdas, tol: float = 1e-7, max_iter: int = 200,
                 inner_tol: float = 1e-9, max_inner: int = 1000) -> GlmPathFit:
    """Fit the penalized GLM path over a decreasing lambda grid.

    Outer iterations stop when the penalized objective changes by less than
    ``tol`` (relative).  A Poisson linear predictor beyond +-30 raises
    :class:`GlmDivergenceError` carrying the grid index and converged prefix,
    as does an objective that cannot be made to decrease or an exhausted
    iteration budget.
    """
    y = _validate_response(as_vector(y, design.n), family)
    lam_grid = _check_lambdas(lambdas)
    check_kind(kind)
    if isinstance(kind, ScadPenalty):
        warnings.warn("SCAD for GLM paths is experimental", stacklevel=2)
        code, a = _kernels.SCAD_CODE, kind.a
    else:
        code, a = _kernels.L1_CODE, 3.7
    Xs = design.standardized
    n, d = design.n, design.d
    Xs2 = Xs ** 2

    beta = np.zeros(d)
    b0 = _null_theta(y, family) if design.intercept else 0.0

    def objective(beta_v, b0_v, lam):
        theta = b0_v + Xs @ beta_v
        ll = float(y @ theta - family.b(theta).sum())
        pen = float(np.sum(penalty_value(kind, lam, beta_v)))
        return -ll / n + pen, ll

    G = lam_grid.size
    coef_std = np.zeros((G, d))
    b0_std = np.zeros(G)
    loglik = np.zeros(G)

    def _partial(upto):
        return _assemble_glm_fit(design, lam_grid[:upto], coef_std[:upto],
                                 b0_std[:upto], loglik[:upto], family)

    for g, lam in enumerate(lam_grid):
        obj, _ = objective(beta, b0, lam)
        converged = False
        for _ in range(max_iter):
            theta = b0 + Xs @ beta
            if family.name == "poisson" and np.max(np.abs(theta)) > POISSON_THETA_CLAMP:
                raise GlmDivergenceError(g, "linear predictor left the +-30 clamp",
                                         partial=_partial(g))
            theta_eval = theta
            if family.name == "poisson":
                theta_eval = np.clip(theta, -POISSON_THETA_CLAMP, POISSON_THETA_CLAMP)
            w = np.maximum(family.b_double_prime(theta_eval), _MIN_WEIGHT)
            r = (y - family.b_prime(theta_eval)) / w  # = z - b0 - X beta
            v = w @ Xs2 / n
            beta_old = beta.copy()
            b0_old = b0
            b0 = _kernels.weighted_cd(Xs, w, v, r, beta, b0, lam, code, a,
                                      design.intercept, float(w.sum()),
                                      float(inner_tol), int(max_inner))
            new_obj, _ = objective(beta, b0, lam)
            slack = 1e-10 * max(1.0, abs(obj))
            halvings = 0
            while new_obj > obj + slack and halvings < 40:
                beta = 0.5 * (beta + beta_old)
                b0 = 0.5 * (b0 + b0_old)
                new_obj, _ = objective(beta, b0, lam)
                halvings += 1
            if new_obj > obj + slack:
                raise GlmDivergenceError(g, "penalized objective failed to decrease",
                                         partial=_partial(g))
            done = abs(obj - new_obj) < tol * max(1.0, abs(obj))
            obj = new_obj
            if done:
                converged = True
                break
        if not converged:
            raise GlmDivergenceError(g, f"no convergence within {max_iter} outer iterations",
                                     partial=_partial(g))
        theta = b0 + Xs @ beta
        if family.name == "poisson" and np.max(np.abs(theta)) > POISSON_THETA_CLAMP:
            raise GlmDivergenceError(g, "linear predictor left the +-30 clamp",
                                     partial=_partial(g))
        coef_std[g] = beta
        b0_std[g] = b0
        loglik[g] = float(y @ theta - family.b(theta).sum())
    return _assemble_glm_fit(design, lam_grid, coef_std, b0_std, loglik, family)


def _assemble_glm_fit(design, lam, beta_std, b0, loglik, family) -> GlmPathFit:
    G = lam.size
    coefficients = np.zeros((G, design.d + 1))
    slopes = beta_std / design.column_scales
    coefficients[:, 1:] = slopes
    if design.intercept:
        coefficients[:, 0] = b0 - slopes @ design.column_means
    df = np.count_nonzero(coefficients, axis=1).astype(np.int64)
    return GlmPathFit(lambdas=lam.copy(), coefficients=coefficients, df=df,
                      loglik=loglik.copy(), n_samples=design.n, family=family)


def pseudo_true_theta(design: DesignMatrix, mu, family: GlmFamily, support) -> np.ndarray:
    """Best approximating linear predictor within a candidate submodel.

    Solves the population score equation ``X_a'(mu - b'(X_a beta)) = 0``
    by damped Newton iteration, where ``X_a`` stacks the intercept column
    (if any) and the raw support columns.  Returns the fitted linear
    predictor, an n-vector.
    """
    mu = as_vector(mu, design.n)
    support = np.asarray(support, dtype=int).ravel()
    if support.size and (support.min() < 0 or support.max() >= design.d):
        raise ValueError("support index out of range")
    blocks = []
    if design.intercept:
        blocks.append(np.ones((design.n, 1)))
    if support.size:
        blocks.append(design.values[:, support])
    if not blocks:
        raise ValueError("empty support with no intercept leaves nothing to solve")
    A = np.hstack(blocks)
    beta = np.zeros(A.shape[1])
    if design.intercept:
        if family.name == "poisson":
            beta[0] = np.log(max(mu.mean(), 1e-12))
        elif family.name == "bernoulli_logit":
            p = min(max(mu.mean(), 1e-12), 1 - 1e-12)
            beta[0] = np.log(p / (1 - p))
    scale = max(1.0, float(np.max(np.abs(A.T @ mu))))

    def score_norm(b):
        return float(np.max(np.abs(A.T @ (mu - family.b_prime(A @ b)))))

    for _ in range(200):
        theta = A @ beta
        g = A.T @ (mu - family.b_prime(theta))
        if np.max(np.abs(g)) < 1e-10 * scale:
            return A @ beta
        w = np.maximum(family.b_double_prime(theta), _MIN_WEIGHT)
        H = A.T @ (w[:, None] * A)
        try:
            step = np.linalg.solve(H, g)
        except np.linalg.LinAlgError as exc:
            raise ValueError(f"singular curvature in pseudo-true fit: {exc}") from exc
        t, base = 1.0, score_norm(beta)
        while score_norm(beta + t * step) > base and t > 1e-12:
            t /= 2.0
        beta = beta + t * step
    raise ValueError("Newton iteration for the pseudo-true parameter did not converge")
