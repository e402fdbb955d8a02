"""Independent reference computations used to pin expected test values.

Everything here is deliberately naive: grid minimizers, quadrature, dense
Newton iterations.  Nothing imports solver internals from pathselect, so
these routines stay usable as cross-checks against the real implementations.
"""

from __future__ import annotations

import numpy as np


def scad_derivative_ref(lam: float, a: float, t: float) -> float:
    """Textbook piecewise derivative of the SCAD penalty at magnitude t >= 0."""
    if lam == 0.0:
        return 0.0
    if t <= lam:
        return lam
    return max(a * lam - t, 0.0) / (a - 1.0)


def scad_value_quadrature(lam: float, a: float, beta: float) -> float:
    """Integrate the SCAD derivative from 0 to |beta| (trapezoid rule).

    Breakpoints lam and a*lam are inserted into the node set, so the rule is
    exact up to float rounding: the integrand is piecewise linear.
    """
    b = abs(beta)
    nodes = np.linspace(0.0, b, 20001)
    extra = [t for t in (lam, a * lam) if 0.0 < t < b]
    nodes = np.unique(np.concatenate([nodes, np.asarray(extra)]))
    vals = np.array([scad_derivative_ref(lam, a, t) for t in nodes])
    return float(np.trapezoid(vals, nodes))


def prox_bruteforce(z, lam, value_fn, kinks=(), lo=-6.0, hi=6.0,
                    coarse=1e-3, fine=1e-6):
    """Grid argmin of 0.5*(b - z)^2 + p(|b|) at effective step `fine`.

    Two passes: a coarse scan of [lo, hi], then a fine scan in windows around
    every candidate basin (coarse argmin, 0, z, and each signed kink).  For
    piecewise-quadratic penalties every local minimum lies in one of those
    windows, so the result matches a full fine-step scan.
    """

    def objective(bs):
        return 0.5 * (bs - z) ** 2 + value_fn(np.abs(bs))

    grid = np.arange(lo, hi + coarse, coarse)
    coarse_best = grid[int(np.argmin(objective(grid)))]
    centers = [coarse_best, 0.0, z]
    for k in kinks:
        centers.extend([k, -k])
    best_b, best_f = None, np.inf
    for c in centers:
        w = np.arange(c - 1.5 * coarse, c + 1.5 * coarse, fine)
        w = w[(w >= lo) & (w <= hi)]
        if w.size == 0:
            continue
        f = objective(w)
        i = int(np.argmin(f))
        if f[i] < best_f:
            best_f, best_b = float(f[i]), float(w[i])
    return best_b


def weighted_prox_bruteforce(z, lam, weight, value_fn, kinks=(), lo=-8.0,
                             hi=8.0, coarse=1e-3, fine=1e-6):
    """Grid argmin of 0.5*w*(b - z)^2 + p(|b|), same scheme as prox_bruteforce."""

    def objective(bs):
        return 0.5 * weight * (bs - z) ** 2 + value_fn(np.abs(bs))

    grid = np.arange(lo, hi + coarse, coarse)
    coarse_best = grid[int(np.argmin(objective(grid)))]
    centers = [coarse_best, 0.0, z]
    for k in kinks:
        centers.extend([k, -k])
    best_b, best_f = None, np.inf
    for c in centers:
        w = np.arange(c - 1.5 * coarse, c + 1.5 * coarse, fine)
        w = w[(w >= lo) & (w <= hi)]
        if w.size == 0:
            continue
        f = objective(w)
        i = int(np.argmin(f))
        if f[i] < best_f:
            best_f, best_b = float(f[i]), float(w[i])
    return best_b


def pls_objective_2d_argmin(Xs, yc, lam, value_fn, kinks=(), lo=-5.0, hi=5.0,
                            coarse=5e-3, fine=1e-4):
    """Grid argmin of (1/(2n))||yc - Xs b||^2 + p(|b1|) + p(|b2|) for d = 2.

    Works on the standardized scale (Xs standardized, yc centered).  Coarse
    scan over [lo, hi]^2, fine rescans in boxes around the coarse argmin and
    the penalty kink crossings of each axis.
    """
    n = len(yc)
    G = Xs.T @ Xs / n
    c = Xs.T @ yc / n
    const = float(yc @ yc) / (2 * n)

    def objective(b1, b2):
        # b1: column vector block, b2: row vector block
        quad = 0.5 * (G[0, 0] * b1 ** 2 + G[1, 1] * b2 ** 2) + G[0, 1] * b1 * b2
        return quad - c[0] * b1 - c[1] * b2 + value_fn(np.abs(b1)) + value_fn(np.abs(b2)) + const

    def scan(lo1, hi1, lo2, hi2, step):
        g1 = np.arange(lo1, hi1 + step, step)
        g2 = np.arange(lo2, hi2 + step, step)
        best = (np.inf, 0.0, 0.0)
        # chunk rows to bound memory
        for start in range(0, g1.size, 512):
            b1 = g1[start:start + 512][:, None]
            vals = objective(b1, g2[None, :])
            i, j = np.unravel_index(np.argmin(vals), vals.shape)
            if vals[i, j] < best[0]:
                best = (float(vals[i, j]), float(b1[i, 0]), float(g2[j]))
        return best

    _, b1c, b2c = scan(lo, hi, lo, hi, coarse)
    centers1 = [b1c, 0.0] + [s * k for k in kinks for s in (1, -1)]
    centers2 = [b2c, 0.0] + [s * k for k in kinks for s in (1, -1)]
    best = (np.inf, 0.0, 0.0)
    for c1 in centers1:
        for c2 in centers2:
            cand = scan(c1 - 2 * coarse, c1 + 2 * coarse,
                        c2 - 2 * coarse, c2 + 2 * coarse, fine)
            if cand[0] < best[0]:
                best = cand
    return np.array([best[1], best[2]])


def poisson_mle_newton(X1, y, max_iter=200):
    """Unpenalized Poisson (log link) MLE via damped Newton.

    X1 already contains the intercept column.  Returns the coefficient
    vector; raises if the gradient does not vanish.  A stalled line search
    (objective improvements below float resolution) is accepted when the
    gradient is already small: the parameter error is then ~1e-9, far
    inside every tolerance these oracles back.
    """
    X1 = np.asarray(X1, dtype=float)
    y = np.asarray(y, dtype=float)
    beta = np.zeros(X1.shape[1])
    beta[0] = np.log(max(y.mean(), 1e-12))
    scale = max(1.0, float(np.max(np.abs(X1.T @ y))))

    def loglik(b):
        theta = X1 @ b
        return float(y @ theta - np.exp(theta).sum())

    for it in range(max_iter):
        theta = X1 @ beta
        mu = np.exp(theta)
        grad = X1.T @ (y - mu)
        gmax = float(np.max(np.abs(grad)))
        # quadratic convergence bottoms out at the float-resolution floor of
        # the objective; past 30 iterations a ~1e-8-relative gradient is it
        if gmax < 1e-10 * scale or (it >= 30 and gmax < 1e-8 * scale):
            return beta
        H = X1.T @ (mu[:, None] * X1)
        step = np.linalg.solve(H, grad)
        t, base = 1.0, loglik(beta)
        while loglik(beta + t * step) < base and t > 1e-12:
            t /= 2.0
        if t <= 1e-12:
            if gmax < 1e-6 * scale:
                return beta
            raise RuntimeError("Poisson Newton stalled with a large gradient")
        beta = beta + t * step
    raise RuntimeError("Newton iteration for the Poisson MLE did not converge")


def logit_mle_newton(X1, y, max_iter=200):
    """Unpenalized Bernoulli-logit MLE via damped Newton (intercept in X1).

    Same stall policy as poisson_mle_newton.
    """
    X1 = np.asarray(X1, dtype=float)
    y = np.asarray(y, dtype=float)
    beta = np.zeros(X1.shape[1])
    scale = max(1.0, float(X1.shape[0]))

    def loglik(b):
        theta = X1 @ b
        return float(y @ theta - np.logaddexp(0.0, theta).sum())

    for it in range(max_iter):
        theta = X1 @ beta
        p = 1.0 / (1.0 + np.exp(-theta))
        grad = X1.T @ (y - p)
        gmax = float(np.max(np.abs(grad)))
        if gmax < 1e-10 * scale or (it >= 30 and gmax < 1e-8 * scale):
            return beta
        H = X1.T @ ((p * (1 - p))[:, None] * X1)
        step = np.linalg.solve(H, grad)
        t, base = 1.0, loglik(beta)
        while loglik(beta + t * step) < base and t > 1e-12:
            t /= 2.0
        if t <= 1e-12:
            if gmax < 1e-6 * scale:
                return beta
            raise RuntimeError("logit Newton stalled with a large gradient")
        beta = beta + t * step
    raise RuntimeError("Newton iteration for the logit MLE did not converge")
