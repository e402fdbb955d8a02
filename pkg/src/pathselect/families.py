"""Exponential-family descriptions for the GLM solver (canonical link).

A family is the cumulant function ``b`` and its first two derivatives:
the mean is ``b'(theta)`` and the IRLS weight is ``b''(theta)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import expit

__all__ = ["GlmFamily", "POISSON", "BERNOULLI_LOGIT"]


@dataclass(frozen=True)
class GlmFamily:
    """Cumulant function triple for a canonical-link family.

    ``b_double_prime`` must be strictly positive wherever the solver
    evaluates it; both shipped families satisfy this everywhere.
    """

    name: str
    b: Callable = field(repr=False)
    b_prime: Callable = field(repr=False)
    b_double_prime: Callable = field(repr=False)


def _softplus(theta):
    # log(1 + exp(theta)) without overflow for large |theta|
    return np.logaddexp(0.0, theta)


def _bernoulli_weight(theta):
    p = expit(theta)
    return p * (1.0 - p)


POISSON = GlmFamily("poisson", b=np.exp, b_prime=np.exp, b_double_prime=np.exp)

BERNOULLI_LOGIT = GlmFamily("bernoulli_logit", b=_softplus, b_prime=expit,
                            b_double_prime=_bernoulli_weight)
