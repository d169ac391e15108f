"""Functions on finite discrete measure spaces with values in R^m.

A function ``f: {y_1, ..., y_n} -> R^m`` is stored as the ``m x n`` matrix of
its values (column ``j`` is ``f(y_j)``) together with the atom weights
``w_j = mu({y_j})``.  Weights are kept apart from the values so that the
Euclidean Gram matrix of sampled columns and the weighted L2 norm can both be
read off without rescaling.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    IndexOutOfRange,
    NonFiniteEntry,
    NonPositiveWeight,
    NotPositiveSemidefinite,
    ShapeMismatch,
)

PSD_RTOL = 1e-12


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class DiscretizedFunction:
    """Values ``(m, n)`` and positive weights ``(n,)``; validated on construction."""

    values: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        if values.ndim != 2 or values.shape[0] < 1 or values.shape[1] < 1:
            raise ShapeMismatch(f"values must be a non-empty 2-D array, got shape {values.shape}")
        if weights.ndim != 1 or weights.shape[0] != values.shape[1]:
            raise ShapeMismatch(
                f"expected {values.shape[1]} weights (one per column), got shape {weights.shape}"
            )
        if not np.all(np.isfinite(values)):
            raise NonFiniteEntry("values contain NaN or infinite entries")
        if not np.all(np.isfinite(weights)):
            raise NonFiniteEntry("weights contain NaN or infinite entries")
        if np.any(weights <= 0):
            j = int(np.flatnonzero(weights <= 0)[0])
            raise NonPositiveWeight(f"weight {j} is {weights[j]!r}; all weights must be > 0")
        object.__setattr__(self, "values", _frozen(values))
        object.__setattr__(self, "weights", _frozen(weights))

    @property
    def m(self) -> int:
        return self.values.shape[0]

    @property
    def n(self) -> int:
        return self.values.shape[1]

    @property
    def total_weight(self) -> float:
        return float(self.weights.sum())

    def scaled_values(self) -> np.ndarray:
        """Columns ``sqrt(w_j) * f(y_j)``; their Euclidean SVD is the weighted one."""
        return self.values * np.sqrt(self.weights)

    def column_norms_squared(self) -> np.ndarray:
        return np.einsum("ij,ij->j", self.values, self.values)

    def __repr__(self):
        return f"DiscretizedFunction(m={self.m}, n={self.n}, total_weight={self.total_weight:g})"


def new_discretized_function(values, weights=None) -> DiscretizedFunction:
    """Validate and wrap a value matrix; ``weights=None`` means unit weights."""
    values = np.asarray(values, dtype=float)
    if weights is None:
        if values.ndim != 2:
            raise ShapeMismatch(f"values must be 2-D, got shape {values.shape}")
        weights = np.ones(values.shape[1])
    return DiscretizedFunction(values, weights)


def check_indices(f: DiscretizedFunction, indices: Sequence[int], distinct: bool = False) -> np.ndarray:
    idx = np.asarray(indices, dtype=np.int64).reshape(-1)
    if idx.size and (idx.min() < 0 or idx.max() >= f.n):
        bad = int(idx[(idx < 0) | (idx >= f.n)][0])
        raise IndexOutOfRange(f"index {bad} outside 0..{f.n - 1}")
    if distinct and np.unique(idx).size != idx.size:
        raise IndexOutOfRange(f"indices must be distinct, got {idx.tolist()}")
    return idx


@dataclass(frozen=True, eq=False)
class GramMatrix:
    entries: np.ndarray
    source_indices: tuple

    def __post_init__(self):
        g = np.asarray(self.entries, dtype=float)
        k = len(self.source_indices)
        if g.shape != (k, k):
            raise ShapeMismatch(f"Gram of {k} vectors must be {k}x{k}, got {g.shape}")
        if k:
            scale = np.abs(g).max()
            tol = PSD_RTOL * scale
            if np.abs(g - g.T).max() > tol:
                raise NotPositiveSemidefinite("Gram matrix is not symmetric")
            lam_min = np.linalg.eigvalsh(0.5 * (g + g.T))[0]
            if lam_min < -tol:
                raise NotPositiveSemidefinite(
                    f"Gram matrix has eigenvalue {lam_min:.3e} below -{tol:.3e}"
                )
        object.__setattr__(self, "entries", _frozen(g))
        object.__setattr__(self, "source_indices", tuple(int(i) for i in self.source_indices))

    @property
    def size(self) -> int:
        return len(self.source_indices)


def gram_matrix(f: DiscretizedFunction, indices: Sequence[int]) -> GramMatrix:
    """Euclidean inner products of the selected columns (repeats allowed).

    Weights do not enter: they belong to the product measure, not to the
    inner product of R^m.
    """
    idx = check_indices(f, indices)
    cols = f.values[:, idx]
    g = cols.T @ cols
    return GramMatrix(0.5 * (g + g.T), tuple(idx.tolist()))


def total_l2_norm_squared(f: DiscretizedFunction) -> float:
    """``sum_j w_j |f(y_j)|^2``."""
    return float(f.weights @ f.column_norms_squared())


def refine(f: DiscretizedFunction, j: int) -> DiscretizedFunction:
    """Split atom ``j`` into two identical atoms carrying half its weight each.

    The copy is appended as the last column.
    """
    (j,) = check_indices(f, [j])
    values = np.column_stack([f.values, f.values[:, j]])
    weights = np.append(f.weights, 0.5 * f.weights[j])
    weights[j] *= 0.5
    return DiscretizedFunction(values, weights)
