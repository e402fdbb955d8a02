"""Synthetic data generators and scenario descriptions.

All three worlds are misspecified on purpose: the candidate set never
contains the true mean, so selection quality is measured purely by loss.

* exponential: trig design, mean exp(4i/n), Gaussian noise.
* omitted: AR(1)-correlated Gaussian design drawn once per scenario, a
  four-term linear mean whose 13th predictor is withheld from the
  candidates, and a same-size hold-out block for out-of-sample loss.
* poisson: trig design, counts with mean exp(exp(-5i/n)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .design import DesignMatrix, as_vector, standardize
from .selectors import GAUSSIAN_SELECTORS, GLM_SELECTORS

__all__ = [
    "dimension_for",
    "trig_design",
    "ar_covariance",
    "gen_exponential",
    "gen_omitted",
    "OmittedData",
    "gen_poisson",
    "projection_bias",
    "Scenario",
]

DESIGN_KINDS = ("exponential", "omitted", "poisson")
PENALTY_MODES = ("l1", "scad", "scad37")


def dimension_for(n: int, c: float) -> int:
    """Candidate dimension 2*floor(n**c / 2): even, growing like n**c."""
    if n < 1:
        raise ValueError("n must be positive")
    if not 0.0 < c < 1.0:
        raise ValueError(f"dimension exponent must lie in (0, 1), got {c}")
    return 2 * int(math.floor(n ** c / 2.0))


def trig_design(n: int, d: int) -> DesignMatrix:
    """Sine/cosine design: columns sin(2*pi*j*i/n) for j = 1..d/2, then the
    matching cosines, rows i = 1..n.  Columns are pairwise orthogonal with
    squared norm n/2, so the standardized design is orthonormal."""
    if d % 2 != 0 or d < 2:
        raise ValueError(f"trig design needs an even d >= 2, got {d}")
    if d >= n:
        raise ValueError(f"trig design needs d < n, got d={d}, n={n}")
    i = np.arange(1, n + 1)
    freqs = np.arange(1, d // 2 + 1)
    angles = 2.0 * np.pi * np.outer(i, freqs) / n
    values = np.hstack([np.sin(angles), np.cos(angles)])
    return standardize(values, intercept=True)


def ar_covariance(m: int, rho: float) -> np.ndarray:
    """AR(1) covariance, entry (i, j) = rho**|i - j|."""
    if not 0.0 <= rho < 1.0:
        raise ValueError(f"AR(1) correlation must lie in [0, 1), got {rho}")
    idx = np.arange(m)
    return rho ** np.abs(idx[:, None] - idx[None, :])


def gen_exponential(n: int, c: float, sigma2: float, rng: np.random.Generator):
    """Exponential-mean world: returns (design, mu, y)."""
    if sigma2 < 0:
        raise ValueError("sigma2 must be nonnegative")
    d = dimension_for(n, c)
    design = trig_design(n, d)
    mu = np.exp(4.0 * np.arange(1, n + 1) / n)
    y = mu + math.sqrt(sigma2) * rng.standard_normal(n)
    return design, mu, y


@dataclass(frozen=True)
class OmittedData:
    """Training design plus the hold-out block used for out-of-sample loss."""

    design: DesignMatrix
    holdout_values: np.ndarray
    mu_train: np.ndarray
    mu_holdout: np.ndarray
    y: np.ndarray


def gen_omitted(n: int, c: float, rho: float, sigma2: float, design_seed,
                rng: np.random.Generator) -> OmittedData:
    """Omitted-predictor world.

    A 2n-row Gaussian design with AR(1) correlation ``rho`` is drawn once
    from ``design_seed`` (so it is identical across realizations and runs);
    only the noise comes from ``rng``.  The mean is
    ``3*x1 + 1.5*x2 + 2*x10 + x13``; candidates are the first
    ``d_n + 1`` generated columns with the 13th removed, so the x13 signal
    is unreachable.  Rows n+1..2n form the hold-out block.
    """
    if sigma2 < 0:
        raise ValueError("sigma2 must be nonnegative")
    d_n = dimension_for(n, c)
    m = max(d_n + 1, 13)
    cov = ar_covariance(m, rho)
    chol = np.linalg.cholesky(cov)
    design_rng = np.random.default_rng(design_seed)
    Z = design_rng.standard_normal((2 * n, m)) @ chol.T
    mu_all = 3.0 * Z[:, 0] + 1.5 * Z[:, 1] + 2.0 * Z[:, 9] + Z[:, 12]
    candidates = np.delete(Z, 12, axis=1)[:, :d_n + 1]
    y = mu_all[:n] + math.sqrt(sigma2) * rng.standard_normal(n)
    return OmittedData(design=standardize(candidates[:n], intercept=True),
                       holdout_values=candidates[n:],
                       mu_train=mu_all[:n], mu_holdout=mu_all[n:], y=y)


def gen_poisson(n: int, c: float, rng: np.random.Generator):
    """Poisson world: returns (design, theta0, mu, y) with
    theta0_i = exp(-5*i/n) for i = 0..n-1 and mu = exp(theta0)."""
    d = dimension_for(n, c)
    design = trig_design(n, d)
    theta0 = np.exp(-5.0 * np.arange(n) / n)
    mu = np.exp(theta0)
    y = rng.poisson(mu).astype(float)
    return design, theta0, mu, y


def projection_bias(design: DesignMatrix, mu) -> float:
    """Squared distance ||mu - H mu||^2 from the span of [1, X].

    This is the irreducible (squared) approximation error of the richest
    candidate model; dividing by n gives the floor of the achievable loss.
    """
    mu = as_vector(mu, design.n)
    A = np.hstack([np.ones((design.n, 1)), design.values])
    fitted = A @ np.linalg.lstsq(A, mu, rcond=None)[0]
    return float(np.sum((mu - fitted) ** 2))


@dataclass(frozen=True)
class Scenario:
    """One Monte Carlo cell: world, size, dimension exponent, penalty mode,
    selector list, replication count, and base seed.

    ``d_n`` is computed once at construction.  ``sigma2`` is ignored by the
    poisson world; ``rho`` applies only to the omitted world.
    """

    design: str
    n: int
    c: float
    penalty: str = "l1"
    selectors: tuple = ()
    sigma2: float = 100.0
    rho: float = 0.5
    reps: int = 200
    base_seed: int = 0
    d_n: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "selectors", tuple(self.selectors))
        object.__setattr__(self, "d_n", dimension_for(self.n, self.c))
        self.validate()

    @property
    def candidate_count(self) -> int:
        """Number of candidate columns actually exposed to the solver."""
        if self.design == "omitted":
            return min(self.d_n + 1, max(self.d_n + 1, 13) - 1)
        return self.d_n

    def validate(self):
        if self.design not in DESIGN_KINDS:
            raise ValueError(f"unknown design {self.design!r}; expected one of {DESIGN_KINDS}")
        if self.penalty not in PENALTY_MODES:
            raise ValueError(f"unknown penalty mode {self.penalty!r}; expected one of {PENALTY_MODES}")
        if self.d_n < 2:
            raise ValueError(f"candidate dimension {self.d_n} too small (n={self.n}, c={self.c})")
        if self.d_n >= self.n:
            raise ValueError(f"candidate dimension {self.d_n} must stay below n={self.n}")
        if self.design != "poisson" and self.sigma2 < 0:
            raise ValueError("sigma2 must be nonnegative")
        if self.design == "omitted" and not 0.0 <= self.rho < 1.0:
            raise ValueError(f"rho must lie in [0, 1), got {self.rho}")
        if self.reps < 1:
            raise ValueError("reps must be at least 1")
        if not self.selectors:
            raise ValueError("at least one selector is required")
        allowed = GLM_SELECTORS if self.design == "poisson" else GAUSSIAN_SELECTORS
        for name in self.selectors:
            if name not in allowed:
                raise ValueError(f"selector {name!r} is unavailable for the "
                                 f"{self.design} design; allowed: {allowed}")
        if len(set(self.selectors)) != len(self.selectors):
            raise ValueError("duplicate selector names")
        if "cp" in self.selectors and self.n <= self.candidate_count + 1:
            raise ValueError("cp needs n > d + 1 for the full-model variance estimate")
