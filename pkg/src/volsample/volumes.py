"""Gram determinants ("volumes") and the identities built on them.

Determinants are handled in the log domain with an explicit zero flag.  The
expected volume over the product measure and the expected projection error
under volume sampling both reduce to elementary symmetric polynomials of the
squared singular values:

    E[det G_k]           = k! e_k(sigma^2)
    E_rho[|f - P_y f|^2] = (k + 1) e_{k+1}(sigma^2) / e_k(sigma^2)
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .errors import RankDeficient
from .measure import DiscretizedFunction, _frozen, check_indices
from .schmidt import SchmidtDecomposition

ZERO_PIVOT_RTOL = 1e-12
DROP_RTOL = 1e-12


@dataclass(frozen=True)
class GramVolume:
    log_value: float
    is_zero: bool

    def __post_init__(self):
        if self.is_zero != (self.log_value == -math.inf):
            raise ValueError("is_zero must agree with a -inf log_value")

    @property
    def value(self) -> float:
        return 0.0 if self.is_zero else math.exp(self.log_value)


def pivoted_logdet(g: np.ndarray, rtol: float = ZERO_PIVOT_RTOL) -> tuple[np.ndarray, np.ndarray]:
    """Log-determinants of a stack ``(..., k, k)`` of PSD matrices.

    Diagonally pivoted Cholesky; a matrix is flagged singular (log-det
    ``-inf``) once the largest remaining pivot is ``<= rtol`` times its largest
    diagonal entry.  Returns ``(logdet, is_zero)`` with the leading shape of
    ``g``.
    """
    g = np.asarray(g, dtype=float)
    lead, k = g.shape[:-2], g.shape[-1]
    if k == 0:
        return np.zeros(lead), np.zeros(lead, dtype=bool)
    g = g.reshape(-1, k, k).copy()
    b = g.shape[0]
    logdet = np.zeros(b)
    zero = np.zeros(b, dtype=bool)

    rows = np.arange(b)
    thresh = rtol * np.einsum("bii->bi", g).max(axis=1)
    active = np.ones((b, k), dtype=bool)
    for _ in range(k):
        d = np.where(active, np.einsum("bii->bi", g), -np.inf)
        p = np.argmax(d, axis=1)
        piv = d[rows, p]
        bad = ~(piv > thresh)
        zero |= bad
        piv = np.where(bad, 1.0, piv)
        logdet += np.log(piv)
        col = g[rows, :, p]
        g -= col[:, :, None] * col[:, None, :] / piv[:, None, None]
        active[rows, p] = False
    logdet[zero] = -np.inf
    return logdet.reshape(lead), zero.reshape(lead)


def log_det_gram(f: DiscretizedFunction, indices: Sequence[int]) -> GramVolume:
    idx = check_indices(f, indices, distinct=True)
    cols = f.values[:, idx]
    logdet, zero = pivoted_logdet(cols.T @ cols)
    return GramVolume(float(logdet), bool(zero))


def orthonormal_basis(cols: np.ndarray, drop_rtol: float = DROP_RTOL) -> np.ndarray:
    """Column-pivoted Gram-Schmidt with reorthogonalization.

    A column is dropped once its residual norm is ``<= drop_rtol`` times its
    original norm.  Returns an ``m x q`` matrix with orthonormal columns.
    """
    cols = np.asarray(cols, dtype=float)
    m, p = cols.shape
    norms0 = np.linalg.norm(cols, axis=0)
    resid = cols.copy()
    basis = np.zeros((m, 0))
    remaining = np.ones(p, dtype=bool)
    while remaining.any() and basis.shape[1] < m:
        rn = np.linalg.norm(resid, axis=0)
        eligible = remaining & (rn > drop_rtol * norms0)
        if not eligible.any():
            break
        j = int(np.argmax(np.where(eligible, rn, -1.0)))
        q = resid[:, j] / rn[j]
        q -= basis @ (basis.T @ q)
        q /= np.linalg.norm(q)
        basis = np.column_stack([basis, q])
        remaining[j] = False
        resid -= np.outer(q, q @ resid)
    return basis


def project_out(basis: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Residual of ``x`` (vector or columns) after orthogonal projection onto ``span(basis)``."""
    r = x - basis @ (basis.T @ x)
    return r - basis @ (basis.T @ r)


def greedy_pivots(values: np.ndarray, col_weights: np.ndarray, k: int, drop_rtol: float = DROP_RTOL) -> list[int]:
    """Greedily pick up to ``k`` columns maximising ``col_weights[j] * |residual_j|^2``.

    Ties go to the lowest index.  Stops early once every unpicked column lies
    in the span of the picked ones (residual ``<= drop_rtol * |column|``).
    """
    resid = np.array(values, dtype=float, copy=True)
    norms0 = np.linalg.norm(resid, axis=0)
    picked: list[int] = []
    basis = np.zeros((resid.shape[0], 0))
    for _ in range(min(k, resid.shape[1])):
        rn = np.linalg.norm(resid, axis=0)
        alive = rn > drop_rtol * norms0
        alive[picked] = False
        if not alive.any():
            break
        score = np.where(alive, col_weights * rn**2, -1.0)
        j = int(np.argmax(score))
        q = resid[:, j] / rn[j]
        q -= basis @ (basis.T @ q)
        q /= np.linalg.norm(q)
        basis = np.column_stack([basis, q])
        resid -= np.outer(q, q @ resid)
        picked.append(j)
    return picked


@dataclass(frozen=True, eq=False)
class SymmetricPolynomials:
    """``e_0..e_K`` of the squared singular values.

    ``normalized[k] = e_k / scale**k`` with ``scale = max sigma_i^2``; ratios
    are formed from the normalized values to stay representable.
    """

    values: np.ndarray
    normalized: np.ndarray
    scale: float

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen(self.values))
        object.__setattr__(self, "normalized", _frozen(self.normalized))

    def __getitem__(self, k: int) -> float:
        return float(self.values[k]) if k < len(self.values) else 0.0

    def ratio(self, k: int) -> float:
        """``e_{k+1} / e_k``."""
        return self.scale * float(self.normalized[k + 1] / self.normalized[k])


def elementary_symmetric(sigma_squared: Sequence[float], K: int) -> SymmetricPolynomials:
    x = np.asarray(sigma_squared, dtype=float).reshape(-1)
    if K < 0:
        raise ValueError("K must be nonnegative")
    if np.any(x < 0):
        raise ValueError("squared singular values must be nonnegative")
    scale = float(x.max()) if x.size and x.max() > 0 else 1.0
    e = np.zeros(K + 1)
    e[0] = 1.0
    for xi in x / scale:
        e[1:] = e[1:] + xi * e[:-1]
    with np.errstate(over="ignore"):
        values = e * scale ** np.arange(K + 1, dtype=float)
    return SymmetricPolynomials(values, e, scale)


def expected_volume(d: SchmidtDecomposition, k: int) -> float:
    """Integral of ``det G_k`` over the ``k``-fold product measure, ``k! e_k``."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return math.factorial(k) * elementary_symmetric(d.sigma_squared, k)[k]


def expected_projection_error(d: SchmidtDecomposition, k: int) -> float:
    """Mean squared L2 projection error when ``k`` samples are volume-sampled."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    if k > d.rank:
        raise RankDeficient(f"volume sampling of {k} points needs rank >= {k}, rank is {d.rank}")
    esp = elementary_symmetric(d.sigma_squared, k + 1)
    return (k + 1) * esp.ratio(k)


def residual_volume(f: DiscretizedFunction, indices: Sequence[int], j: int) -> float:
    """``|f(y_j) - P f(y_j)|^2`` for the projection onto the span of the selected columns.

    Uses the Schur complement ``|a|^2 - w^T G^{-1} w`` when the Gram is
    nonsingular, so that ``det G(S + j) = det G(S) * residual``; falls back to
    explicit orthogonalization otherwise.
    """
    idx = check_indices(f, indices, distinct=True)
    (jj,) = check_indices(f, [j])
    if jj in idx:
        return 0.0
    a = f.values[:, jj]
    aa = float(a @ a)
    if idx.size == 0:
        return aa
    cols = f.values[:, idx]
    if not log_det_gram(f, idx).is_zero:
        try:
            gram = cols.T @ cols
            w = cols.T @ a
            schur = aa - float(w @ cho_solve(cho_factor(gram), w))
            # same cut as the zero-pivot flag of the extended Gram
            if schur <= ZERO_PIVOT_RTOL * max(aa, float(np.diag(gram).max())):
                return 0.0
            return schur
        except LinAlgError:
            pass
    r = project_out(orthonormal_basis(cols), a)
    return float(r @ r)
