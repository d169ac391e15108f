"""Weighted Schmidt decomposition ``f(y) = sum_i sigma_i u_i v_i(y)``.

The ``u_i`` are orthonormal in R^m and the ``v_i`` are orthonormal in the
weighted inner product ``<a, b> = sum_j w_j a_j b_j``.  The singular values are
those of the matrix with columns ``sqrt(w_j) f(y_j)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceFailure
from .measure import DiscretizedFunction, _frozen

DEFAULT_RANK_RTOL = 1e-12


@dataclass(frozen=True, eq=False)
class SchmidtDecomposition:
    sigma: np.ndarray
    left_factors: np.ndarray
    right_factors: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        for name in ("sigma", "left_factors", "right_factors", "weights"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))

    @property
    def rank(self) -> int:
        return int(self.sigma.shape[0])

    @property
    def sigma_squared(self) -> np.ndarray:
        return self.sigma**2

    def kernel_eigenvectors(self) -> np.ndarray:
        """Euclidean-orthonormal eigenvectors of the kernel ``L = B^T B``, ``B_j = sqrt(w_j) f(y_j)``."""
        return self.right_factors * np.sqrt(self.weights)[:, None]

    def reconstruct(self) -> np.ndarray:
        return (self.left_factors * self.sigma) @ self.right_factors.T


def schmidt_decompose(f: DiscretizedFunction, rel_tol: float = DEFAULT_RANK_RTOL) -> SchmidtDecomposition:
    """Decompose ``f``, discarding singular values ``<= rel_tol * sigma_1``.

    Signs are fixed so that the largest-magnitude entry of every left factor is
    nonnegative (first such row on ties).  An all-zero ``f`` has rank 0.
    """
    if rel_tol <= 0:
        raise ValueError("rel_tol must be positive")
    sqrt_w = np.sqrt(f.weights)
    try:
        u, s, vt = np.linalg.svd(f.values * sqrt_w, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(f"SVD did not converge: {exc}") from exc

    r = 0 if s.size == 0 or s[0] == 0 else int(np.count_nonzero(s > rel_tol * s[0]))
    u = u[:, :r]
    v = vt[:r].T / sqrt_w[:, None]

    if r:
        rows = np.argmax(np.abs(u), axis=0)
        signs = np.where(u[rows, np.arange(r)] < 0, -1.0, 1.0)
        u = u * signs
        v = v * signs
    return SchmidtDecomposition(s[:r], u, v, f.weights)


def tail_width(d: SchmidtDecomposition, k: int) -> float:
    """Optimal L2 error of a rank-``k`` approximation, ``sqrt(sum_{i>k} sigma_i^2)``."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    return float(np.sqrt(np.sum(d.sigma[k:] ** 2)))


def numerical_rank(d: SchmidtDecomposition) -> int:
    return d.rank
