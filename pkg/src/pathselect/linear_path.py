"""Penalized least squares paths by cyclic coordinate descent.

The solver minimizes ``(1/(2n)) * ||y - b0 - X beta||^2 + sum_j p_lam(|beta_j|)``
on internally standardized columns, sweeping a strictly decreasing lambda
grid with warm starts.  Coefficients are reported on the original scale;
``sigma2_hat`` is recomputed from those reported coefficients.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .design import DesignMatrix, as_vector, standardize
from .penalties import L1Penalty, PenaltyKind, ScadPenalty, check_kind, convex_scad_a

__all__ = [
    "PathFit",
    "ConvergenceError",
    "lambda_grid",
    "fit_path",
    "ols_refit",
    "sigma_tilde",
    "gram_min_eigenvalue",
    "resolve_penalty",
]


class ConvergenceError(RuntimeError):
    """Coordinate descent exhausted max_iter at one grid point.

    Carries the failing grid index and the path prefix that did converge,
    so callers (cross-validation in particular) can keep partial results.
    """

    def __init__(self, grid_index: int, partial: "PathFit | None" = None):
        super().__init__(f"coordinate descent did not converge at grid index {grid_index}")
        self.grid_index = grid_index
        self.partial = partial


@dataclass
class PathFit:
    """Solution path over a lambda grid.

    ``coefficients`` has one row per grid point; slot 0 is the intercept
    (0.0 when the design has no intercept) followed by original-scale
    slopes.  ``df`` counts the nonzero entries of each row.  ``objective``
    is the converged penalized objective on the standardized scale.
    """

    lambdas: np.ndarray
    coefficients: np.ndarray
    df: np.ndarray
    sigma2_hat: np.ndarray
    objective: np.ndarray
    sweeps: np.ndarray
    n_samples: int


def _check_lambdas(lambdas) -> np.ndarray:
    lam = np.asarray(lambdas, dtype=float).ravel()
    if lam.size == 0:
        raise ValueError("lambda grid is empty")
    if not np.all(np.isfinite(lam)) or np.any(lam < 0):
        raise ValueError("lambda grid must be finite and nonnegative")
    if lam.size > 1 and not np.all(np.diff(lam) < 0):
        raise ValueError("lambda grid must be strictly decreasing")
    return lam


def _make_grid(lam_max: float, lam_min: float, count: int) -> np.ndarray:
    half = count // 2
    mid = math.sqrt(lam_max * lam_min)
    log_part = np.geomspace(lam_max, mid, half)
    lin_part = np.linspace(mid, lam_min, half + 1)[1:]
    return np.concatenate([log_part, lin_part])


def lambda_grid(design: DesignMatrix, y, count: int = 200) -> np.ndarray:
    """Data-driven lambda grid from lam_max down to 1e-4 * lam_max.

    The first half is log-spaced from lam_max to the geometric midpoint of
    the endpoints; the second half descends linearly to the floor.  lam_max
    is the smallest lambda at which every penalized coefficient is zero
    (both penalties share the derivative lam at 0+, hence the same anchor).

    Parameters
    ----------
    design : DesignMatrix
    y : array-like of shape (n,)
    count : int
        Grid size, even and at least 4.

    Returns
    -------
    ndarray of shape (count,), strictly decreasing.
    """
    if count < 4 or count % 2 != 0:
        raise ValueError(f"grid count must be an even number >= 4, got {count}")
    y = as_vector(y, design.n)
    resid = y - y.mean() if design.intercept else y
    lam_max = float(np.max(np.abs(design.standardized.T @ resid)) / design.n)
    if lam_max <= 0.0:
        raise ValueError("lambda_max is zero: the response has no correlation "
                         "with any column (constant response?)")
    # pad by a hair so the anchor zeroes every slope even when the solver's
    # summation order rounds the winning correlation a few ulps the other way
    lam_max *= 1.0 + 1e-12
    return _make_grid(lam_max, 1e-4 * lam_max, count)


def gram_min_eigenvalue(design: DesignMatrix) -> float:
    """Smallest eigenvalue of X'X/n on the standardized scale."""
    Xs = design.standardized
    gram = Xs.T @ Xs / design.n
    return float(np.linalg.eigvalsh(gram)[0])


def resolve_penalty(name: str, design: DesignMatrix):
    """Map a penalty mode name to (kind, allow_nonconvex).

    ``l1`` and the fixed-shape ``scad37`` need no design information;
    ``scad`` picks the smallest convexity-preserving shape for this design
    (floored at 3.7).
    """
    if name == "l1":
        return L1Penalty(), False
    if name == "scad":
        return ScadPenalty(convex_scad_a(gram_min_eigenvalue(design))), False
    if name == "scad37":
        return ScadPenalty(3.7), True
    raise ValueError(f"unknown penalty mode {name!r}; expected l1, scad, or scad37")


def fit_path(design: DesignMatrix, y, kind: PenaltyKind, lambdas,
             tol: float = 1e-8, max_iter: int = 10_000,
             allow_nonconvex: bool = False) -> PathFit:
    """Fit the penalized least squares path over a decreasing lambda grid.

    For SCAD the shape parameter must keep the objective convex for this
    design (``a >= convex_scad_a`` of the minimum Gram eigenvalue) unless
    the caller opts into the fixed-shape nonconvex mode, in which case the
    reported solution is a stationary point that may be local.

    Raises
    ------
    ConvergenceError
        If any grid point exhausts ``max_iter`` sweeps; the exception
        carries the converged prefix.
    """
    y = as_vector(y, design.n)
    lam = _check_lambdas(lambdas)
    check_kind(kind)
    if isinstance(kind, ScadPenalty):
        code, a = _kernels.SCAD_CODE, kind.a
        if not allow_nonconvex:
            needed = convex_scad_a(gram_min_eigenvalue(design))
            if kind.a < needed - 1e-9:
                raise ValueError(
                    f"SCAD shape {kind.a} makes the objective nonconvex for this "
                    f"design (needs >= {needed:.6g}); pass allow_nonconvex=True "
                    f"to accept a possibly local stationary point")
    else:
        code, a = _kernels.L1_CODE, 3.7
    Xs = design.standardized
    beta_path, b0_path, objective, sweeps, fail_g, mono_g = _kernels.gaussian_cd_path(
        Xs, np.ascontiguousarray(y), lam, code, a, design.intercept,
        float(tol), int(max_iter))
    if mono_g >= 0 and (fail_g < 0 or mono_g < fail_g):
        raise AssertionError(
            f"penalized objective increased across a sweep at grid index {mono_g}")
    upto = fail_g if fail_g >= 0 else lam.size
    fit = _assemble_fit(design, y, lam[:upto], beta_path[:upto],
                        b0_path[:upto], objective[:upto], sweeps[:upto])
    if fail_g >= 0:
        raise ConvergenceError(fail_g, partial=fit)
    return fit


def _assemble_fit(design, y, lam, beta_std, b0_std, objective, sweeps) -> PathFit:
    G = lam.size
    coefficients = np.zeros((G, design.d + 1))
    slopes = beta_std / design.column_scales  # original scale
    coefficients[:, 1:] = slopes
    if design.intercept:
        coefficients[:, 0] = b0_std - slopes @ design.column_means
    df = np.count_nonzero(coefficients, axis=1).astype(np.int64)
    preds = coefficients[:, 0][None, :] + design.values @ coefficients[:, 1:].T
    sigma2_hat = np.mean((y[:, None] - preds) ** 2, axis=0)
    return PathFit(lambdas=lam.copy(), coefficients=coefficients, df=df,
                   sigma2_hat=sigma2_hat, objective=objective.copy(),
                   sweeps=sweeps.copy(), n_samples=design.n)


def ols_refit(design: DesignMatrix, support, y):
    """Exact least squares on the selected raw columns.

    Parameters
    ----------
    design : DesignMatrix
    support : sequence of int
        Column indices to keep; may be empty when the design has an
        intercept.
    y : array-like of shape (n,)

    Returns
    -------
    coef : ndarray of shape (d + 1,)
        Intercept in slot 0, refit slopes on the support, zeros elsewhere.
    rss : float
    """
    y = as_vector(y, design.n)
    support = np.asarray(support, dtype=int).ravel()
    if support.size and (support.min() < 0 or support.max() >= design.d):
        raise ValueError("support index out of range")
    if support.size != np.unique(support).size:
        raise ValueError("support contains duplicate indices")
    blocks = []
    if design.intercept:
        blocks.append(np.ones((design.n, 1)))
    if support.size:
        blocks.append(design.values[:, support])
    if not blocks:
        raise ValueError("empty support with no intercept leaves nothing to fit")
    A = np.hstack(blocks)
    sol, _, rank, _ = np.linalg.lstsq(A, y, rcond=None)
    if rank < A.shape[1]:
        raise ValueError(f"selected columns are rank deficient (rank {rank} < {A.shape[1]})")
    coef = np.zeros(design.d + 1)
    k = 0
    if design.intercept:
        coef[0] = sol[0]
        k = 1
    coef[1 + support] = sol[k:]
    rss = float(np.sum((y - A @ sol) ** 2))
    return coef, rss


def sigma_tilde(design: DesignMatrix, y) -> float:
    """Residual variance of the full-model least squares fit, rss/(n - d - 1)."""
    n, d = design.n, design.d
    if n <= d + 1:
        raise ValueError(f"full-model variance estimate needs n > d + 1 (n={n}, d={d})")
    _, rss = ols_refit(design, np.arange(d), y)
    return rss / (n - d - 1)
