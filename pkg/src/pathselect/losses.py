"""Loss metrics against the true mean, and selection efficiency.

Efficiency is the selected fit's loss divided by the smallest loss on the
grid, so 1 is the oracle and larger is worse.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .design import as_vector
from .families import GlmFamily
from .glm_path import POISSON_THETA_CLAMP

__all__ = ["l2_loss", "holdout_l2_loss", "kl_loss", "efficiency", "LossReport"]


def l2_loss(mu, mu_hat) -> float:
    """Average squared error against the true mean, ||mu - mu_hat||^2 / n."""
    mu = as_vector(mu)
    mu_hat = as_vector(mu_hat, mu.size, name="mu_hat")
    return float(np.mean((mu - mu_hat) ** 2))


def holdout_l2_loss(holdout_values, coefficients, mu_holdout) -> float:
    """L2 loss of a fitted coefficient vector on held-out rows.

    ``coefficients`` is intercept-first, so predictions are
    ``coefficients[0] + holdout_values @ coefficients[1:]``.
    """
    X = np.asarray(holdout_values, dtype=float)
    beta = as_vector(coefficients, name="coefficients")
    if X.ndim != 2:
        raise ValueError("holdout_values must be a 2-d array")
    if X.shape[1] != beta.size - 1:
        raise ValueError(f"coefficient vector of length {beta.size} does not fit "
                         f"{X.shape[1]} holdout columns plus an intercept")
    return l2_loss(mu_holdout, beta[0] + X @ beta[1:])


def kl_loss(mu, theta0, theta_hat, family: GlmFamily) -> float:
    """Kullback-Leibler loss of a fitted linear predictor.

    ``(2/n) * sum_i [mu_i*(theta0_i - theta_hat_i) + b(theta_hat_i) - b(theta0_i)]``
    where ``mu = b'(theta0)`` (checked to 1e-10).  Nonnegative by convexity
    of ``b``; float negatives within 1e-12 are clamped to zero.  A Poisson
    linear predictor outside the solver's +-30 clamp scores +inf so such
    fits can never look oracle-optimal.
    """
    mu = as_vector(mu)
    theta0 = as_vector(theta0, mu.size, name="theta0")
    theta_hat = np.asarray(theta_hat, dtype=float).ravel()
    if theta_hat.size != mu.size:
        raise ValueError(f"theta_hat has length {theta_hat.size}, expected {mu.size}")
    mismatch = float(np.max(np.abs(mu - family.b_prime(theta0))))
    if mismatch > 1e-10:
        raise ValueError(f"mu is not b'(theta0): max deviation {mismatch:.3g}")
    if family.name == "poisson" and np.max(np.abs(theta_hat)) > POISSON_THETA_CLAMP:
        return math.inf
    if not np.all(np.isfinite(theta_hat)):
        return math.inf
    n = mu.size
    val = (2.0 / n) * float(mu @ (theta0 - theta_hat)
                            + family.b(theta_hat).sum() - family.b(theta0).sum())
    if val < 0:
        if val < -1e-12 * max(1.0, abs(float(family.b(theta0).sum()))):
            raise ValueError(f"KL loss computed negative ({val:.3g}); inputs inconsistent")
        return 0.0
    return val


def efficiency(losses, selected_index: int) -> float:
    """Selected loss over the grid minimum.

    A zero minimum makes the ratio degenerate: a selector that also hits
    zero scores 1, anything else scores +inf.
    """
    losses = np.asarray(losses, dtype=float).ravel()
    if losses.size == 0:
        raise ValueError("empty loss curve")
    if not 0 <= selected_index < losses.size:
        raise ValueError(f"selected index {selected_index} outside the grid")
    min_loss = float(np.min(losses))
    sel = float(losses[selected_index])
    if min_loss == 0.0:
        return 1.0 if sel == 0.0 else math.inf
    return sel / min_loss


@dataclass(frozen=True)
class LossReport:
    """Loss curve over a grid plus per-selector outcomes."""

    losses: np.ndarray
    oracle_index: int
    min_loss: float
    selector_losses: dict
    selector_efficiency: dict

    @classmethod
    def from_curve(cls, losses, selections: dict) -> "LossReport":
        """Build from a loss curve and a {selector: grid index} mapping."""
        arr = np.asarray(losses, dtype=float).ravel()
        if arr.size == 0:
            raise ValueError("empty loss curve")
        oracle = int(np.argmin(arr))
        sel_loss = {name: float(arr[idx]) for name, idx in selections.items()}
        sel_eff = {name: efficiency(arr, idx) for name, idx in selections.items()}
        return cls(losses=arr, oracle_index=oracle, min_loss=float(arr[oracle]),
                   selector_losses=sel_loss, selector_efficiency=sel_eff)
