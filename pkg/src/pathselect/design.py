"""Design matrix container and input validation helpers.

Raw column values are stored untouched; standardization metadata (per-column
mean and population standard deviation) is applied on demand by the solvers,
which work on the standardized scale and report coefficients on the original
scale.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

__all__ = ["DesignMatrix", "standardize", "as_matrix", "as_vector"]


def as_matrix(X, name: str = "X") -> np.ndarray:
    """Validate and convert to a 2-D float array with finite entries."""
    arr = np.asarray(X, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got shape {arr.shape}")
    if arr.shape[0] == 0 or arr.shape[1] == 0:
        raise ValueError(f"{name} must have at least one row and one column")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def as_vector(y, n: int | None = None, name: str = "y") -> np.ndarray:
    """Validate and convert to a 1-D float array, optionally checking length."""
    arr = np.asarray(y, dtype=float).ravel()
    if arr.size == 0:
        raise ValueError(f"{name} must be non-empty")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    if n is not None and arr.size != n:
        raise ValueError(f"{name} has length {arr.size}, expected {n}")
    return arr


@dataclass(eq=False)
class DesignMatrix:
    """Raw predictor values plus standardization metadata.

    Attributes
    ----------
    values : ndarray of shape (n, d)
        Raw column values.
    column_means : ndarray of shape (d,)
        Per-column means (zeros when ``intercept`` is False: the model then
        has no constant term to absorb the shift, so columns are only
        rescaled).
    column_scales : ndarray of shape (d,)
        Positive per-column scales; population standard deviation when
        centering, root mean square otherwise.
    intercept : bool
        Whether model fits include an unpenalized constant term.

    Treated as immutable after construction.
    """

    values: np.ndarray
    column_means: np.ndarray
    column_scales: np.ndarray
    intercept: bool = True

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]

    @cached_property
    def standardized(self) -> np.ndarray:
        """Column-standardized values, Fortran-ordered for the solvers."""
        out = (self.values - self.column_means) / self.column_scales
        return np.asfortranarray(out)


def standardize(design, intercept: bool = True) -> DesignMatrix:
    """Build a DesignMatrix with standardization metadata.

    Accepts a raw array, or an existing DesignMatrix which is returned
    unchanged (its metadata, including the cached standardized values, stays
    valid).  Columns with zero variation are rejected by index, since they
    cannot be standardized and carry no signal beyond the intercept.
    """
    if isinstance(design, DesignMatrix):
        return design
    values = as_matrix(design)
    if intercept:
        means = values.mean(axis=0)
        scales = values.std(axis=0)  # population SD, ddof=0
    else:
        means = np.zeros(values.shape[1])
        scales = np.sqrt(np.mean(values ** 2, axis=0))
    bad = np.flatnonzero(values.std(axis=0) == 0.0)
    if bad.size:
        raise ValueError(f"column {bad[0]} is constant and cannot be standardized")
    if np.any(scales <= 0.0):
        j = int(np.flatnonzero(scales <= 0.0)[0])
        raise ValueError(f"column {j} has zero scale")
    return DesignMatrix(values=values, column_means=means,
                        column_scales=scales, intercept=intercept)
