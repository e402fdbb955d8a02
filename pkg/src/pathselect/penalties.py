"""L1 and SCAD penalties with the scalar threshold updates used by the
coordinate-descent solvers.

The SCAD penalty is linear up to ``lam``, tapers quadratically on
``(lam, a*lam]``, and is constant beyond ``a*lam``; its derivative therefore
drops from ``lam`` to zero instead of staying flat like the L1 derivative.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

__all__ = [
    "L1Penalty",
    "ScadPenalty",
    "PenaltyKind",
    "penalty_value",
    "penalty_derivative",
    "univariate_update",
    "weighted_univariate_update",
    "convex_scad_a",
    "check_kind",
]


@dataclass(frozen=True)
class L1Penalty:
    """Absolute-value penalty ``lam * |beta|``."""


@dataclass(frozen=True)
class ScadPenalty:
    """Smoothly clipped absolute deviation penalty with shape ``a > 2``."""

    a: float = 3.7

    def __post_init__(self):
        if not self.a > 2.0:
            raise ValueError(f"SCAD shape parameter must exceed 2, got {self.a}")


PenaltyKind = Union[L1Penalty, ScadPenalty]


def check_kind(kind: PenaltyKind) -> PenaltyKind:
    """Reject anything that is not a penalty object (e.g. a bare name)."""
    if not isinstance(kind, (L1Penalty, ScadPenalty)):
        raise TypeError(
            f"penalty kind must be an L1Penalty or ScadPenalty instance, got "
            f"{kind!r}; use resolve_penalty() to map a penalty name")
    return kind


def _as_magnitude(beta):
    b = np.abs(np.asarray(beta, dtype=float))
    if not np.all(np.isfinite(b)):
        raise ValueError("beta must be finite")
    return b


def _maybe_scalar(out, template):
    if np.ndim(template) == 0:
        return float(out)
    return out


def penalty_value(kind: PenaltyKind, lam: float, beta) -> float:
    """Penalty evaluated at coefficient magnitude |beta|.

    Parameters
    ----------
    kind : L1Penalty or ScadPenalty
    lam : float
        Regularization level, ``lam >= 0``.
    beta : float or ndarray
        Coefficient value(s); only the magnitude matters.
    """
    if lam < 0:
        raise ValueError("lam must be nonnegative")
    b = _as_magnitude(beta)
    if isinstance(kind, L1Penalty):
        return _maybe_scalar(lam * b, beta)
    if lam == 0.0:
        return _maybe_scalar(np.zeros_like(b), beta)
    a = kind.a
    inner = lam * b
    middle = (2.0 * a * lam * b - b ** 2 - lam ** 2) / (2.0 * (a - 1.0))
    outer = 0.5 * (a + 1.0) * lam ** 2
    out = np.where(b <= lam, inner, np.where(b <= a * lam, middle, outer))
    return _maybe_scalar(out, beta)


def penalty_derivative(kind: PenaltyKind, lam: float, beta) -> float:
    """Derivative of the penalty with respect to the magnitude, at |beta|.

    For L1 this is the constant ``lam``; for SCAD it is ``lam`` up to the
    first knot and ``max(a*lam - |beta|, 0)/(a - 1)`` beyond it, vanishing
    past ``a*lam``.
    """
    if lam < 0:
        raise ValueError("lam must be nonnegative")
    b = _as_magnitude(beta)
    if isinstance(kind, L1Penalty):
        return _maybe_scalar(np.full_like(b, lam), beta)
    if lam == 0.0:
        return _maybe_scalar(np.zeros_like(b), beta)
    a = kind.a
    out = np.where(b <= lam, lam, np.maximum(a * lam - b, 0.0) / (a - 1.0))
    return _maybe_scalar(out, beta)


def soft_threshold(z, lam):
    """sign(z) * max(|z| - lam, 0)."""
    z = np.asarray(z, dtype=float)
    out = np.sign(z) * np.maximum(np.abs(z) - lam, 0.0)
    return _maybe_scalar(out, z) if np.ndim(z) == 0 else out


def univariate_update(z, lam: float, kind: PenaltyKind):
    """Exact minimizer of ``0.5*(z - b)**2 + p_lam(|b|)`` over b.

    This is the coordinate update for a standardized column (unit mean
    square).  L1 gives soft thresholding.  SCAD splits into three zones:
    soft thresholding for ``|z| <= 2*lam``, a rescaled shrink on
    ``2*lam < |z| <= a*lam``, and the identity above ``a*lam``.  Each zone of
    the objective is convex for ``a > 2``, so the piecewise formula is the
    global minimizer.
    """
    if lam < 0:
        raise ValueError("lam must be nonnegative")
    zs = np.asarray(z, dtype=float)
    if isinstance(kind, L1Penalty):
        out = np.sign(zs) * np.maximum(np.abs(zs) - lam, 0.0)
        return _maybe_scalar(out, z)
    a = kind.a
    az = np.abs(zs)
    soft = np.sign(zs) * np.maximum(az - lam, 0.0)
    middle = np.sign(zs) * ((a - 1.0) * az - a * lam) / (a - 2.0)
    out = np.where(az <= 2.0 * lam, soft, np.where(az <= a * lam, middle, zs))
    return _maybe_scalar(out, z)


def weighted_univariate_update(z: float, lam: float, kind: PenaltyKind,
                               weight: float) -> float:
    """Exact minimizer of ``0.5*weight*(z - b)**2 + p_lam(|b|)``.

    Used by the weighted least squares inner loop of the GLM solver, where
    the effective column curvature ``weight`` is no longer 1.  Reduces to
    :func:`univariate_update` at ``weight == 1``.
    """
    if weight <= 0:
        raise ValueError("weight must be positive")
    if lam < 0:
        raise ValueError("lam must be nonnegative")
    if isinstance(kind, L1Penalty):
        t = weight * abs(z) - lam
        if t <= 0.0:
            return 0.0
        return float(np.sign(z) * t / weight)
    a = kind.a
    u = abs(z) * weight
    sign = 1.0 if z > 0 else (-1.0 if z < 0 else 0.0)
    # The objective restricted to b >= 0 is quadratic on [0, lam],
    # (lam, a*lam], and (a*lam, inf).  The global minimizer is a clipped
    # stationary point of one of the pieces, so evaluating those candidates
    # is exact.
    candidates = [0.0]
    if lam > 0:
        candidates.append(min(max((u - lam) / weight, 0.0), lam))
        candidates.extend([lam, a * lam])
        denom = weight - 1.0 / (a - 1.0)
        if denom > 0:
            b2 = (u - a * lam / (a - 1.0)) / denom
            candidates.append(min(max(b2, lam), a * lam))
    candidates.append(max(abs(z), a * lam))

    def f(b):
        return 0.5 * weight * (b - abs(z)) ** 2 + penalty_value(kind, lam, b)

    best = min(candidates, key=f)
    return float(sign * best)


def convex_scad_a(min_eigenvalue: float) -> float:
    """Smallest SCAD shape keeping the penalized least squares objective
    convex for a design whose Gram matrix has the given minimum eigenvalue,
    floored at the conventional 3.7."""
    if min_eigenvalue <= 0:
        raise ValueError("minimum Gram eigenvalue must be positive for the "
                         "convexity-preserving SCAD shape")
    return max(3.7, 1.0 + 1.0 / min_eigenvalue)
