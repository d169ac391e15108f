"""Projection errors, sample selection strategies and bound certificates.

For a set ``S`` of sample points the error of approximating ``f`` from the
span of ``{f(y_j): j in S}`` is

    err(S) = sum_j w_j |f(y_j) - P_S f(y_j)|^2,

and volume sampling guarantees a subset of size ``k`` with
``err(S) <= (k + 1) * d_k^2`` where ``d_k`` is the singular value tail.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .errors import CombinatorialBlowup, RankDeficient, UnknownStrategy
from .measure import DiscretizedFunction, check_indices, total_l2_norm_squared
from .samplers import MAX_ENUMERATION, SamplerConfig, VolumeSampler, draw_generator
from .schmidt import SchmidtDecomposition, schmidt_decompose, tail_width
from .volumes import greedy_pivots, log_det_gram, orthonormal_basis, project_out

STRATEGIES = ("exhaustive", "volume-best-of", "greedy-residual", "greedy-volume")
ZERO_TAIL_RTOL = 1e-12
BOUND_SLACK_RTOL = 1e-12


@dataclass(frozen=True)
class SelectionResult:
    indices: tuple
    squared_error: float
    method: str
    draws_used: int = 0
    padded: bool = False

    def to_dict(self) -> dict:
        return {
            "indices": list(self.indices),
            "squared_error": self.squared_error,
            "method": self.method,
            "draws_used": self.draws_used,
            "padded": self.padded,
        }


@dataclass(frozen=True)
class BoundCertificate:
    """Outcome of checking ``d_k^2 <= achieved <= (k + 1) d_k^2``.

    ``prefactor_squared`` is ``achieved / d_k^2``, or ``None`` with
    ``tail_is_zero`` set when ``d_k`` vanishes.
    """

    k: int
    optimal_tail_squared: float
    achieved_squared_error: float
    prefactor_squared: Optional[float]
    tail_is_zero: bool
    satisfied: bool
    indices: tuple = ()
    strategy: str = ""
    scale: float = field(default=0.0, repr=False)

    @property
    def bound_squared(self) -> float:
        return (self.k + 1) * self.optimal_tail_squared

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "strategy": self.strategy,
            "indices": list(self.indices),
            "optimal_tail_squared": self.optimal_tail_squared,
            "achieved_squared_error": self.achieved_squared_error,
            "prefactor_squared": self.prefactor_squared,
            "tail_is_zero": self.tail_is_zero,
            "bound_squared": self.bound_squared,
            "satisfied": self.satisfied,
        }


def projection_error(f: DiscretizedFunction, indices: Sequence[int]) -> float:
    """Squared weighted L2 error of projecting every column onto the selected span.

    Computed by column-pivoted orthogonalization, so dependent or repeated
    columns are fine.
    """
    idx = check_indices(f, indices)
    if idx.size == 0:
        return total_l2_norm_squared(f)
    resid = project_out(orthonormal_basis(f.values[:, idx]), f.values)
    return float(f.weights @ np.einsum("ij,ij->j", resid, resid))


def projection_error_schur(f: DiscretizedFunction, indices: Sequence[int]) -> float:
    """Same quantity via Schur complements ``|a_j|^2 - w_j^T G^{-1} w_j``.

    Requires the selected columns to be linearly independent.
    """
    idx = check_indices(f, indices, distinct=True)
    norms = f.column_norms_squared()
    if idx.size == 0:
        return float(f.weights @ norms)
    if log_det_gram(f, idx).is_zero:
        raise RankDeficient("selected columns are linearly dependent; the Gram matrix is singular")
    cols = f.values[:, idx]
    cross = cols.T @ f.values
    try:
        proj = np.einsum("ij,ij->j", cross, cho_solve(cho_factor(cols.T @ cols), cross))
    except LinAlgError as exc:
        raise RankDeficient(str(exc)) from exc
    resid = np.clip(norms - proj, 0.0, None)
    resid[idx] = 0.0
    return float(f.weights @ resid)


def select_exhaustive(f: DiscretizedFunction, k: int, max_subsets: int = MAX_ENUMERATION) -> SelectionResult:
    """Best ``k``-subset by brute force; ties resolved by the lexicographically first subset."""
    k = min(k, f.n)
    count = math.comb(f.n, k)
    if count > max_subsets:
        raise CombinatorialBlowup(f"C({f.n},{k}) = {count} subsets exceeds the limit {max_subsets}")
    best, best_err = (), math.inf
    for s in combinations(range(f.n), k):
        err = projection_error(f, s)
        if err < best_err:
            best, best_err = s, err
    return SelectionResult(best, best_err, "exhaustive", count)


def _pad(f: DiscretizedFunction, subset: tuple, k: int, rng: np.random.Generator) -> tuple:
    rest = np.setdiff1d(np.arange(f.n), subset)
    extra = rng.choice(rest, size=k - len(subset), replace=False)
    return tuple(sorted(subset + tuple(int(i) for i in extra)))


def select_volume_best_of(
    f: DiscretizedFunction,
    k: int,
    draws: int,
    config: SamplerConfig = SamplerConfig(),
    decomposition: Optional[SchmidtDecomposition] = None,
) -> SelectionResult:
    """Draw ``draws`` volume-sampled subsets (draw indices ``0..draws-1``) and keep the best.

    When ``rank(f) < k`` the density on ``k``-subsets does not exist; then
    ``rank(f)`` points are volume-sampled and the rest are filled with
    uniformly chosen points (``padded=True``).  The error is zero in that case.
    """
    if draws < 1:
        raise ValueError("draws must be >= 1")
    d = decomposition or schmidt_decompose(f)
    k = min(k, f.n)
    size = min(k, d.rank)
    if size == 0 and k > 0:
        raise RankDeficient("f is identically zero; the volume-sampling density is undefined")
    sampler = VolumeSampler(f, size, config, decomposition=d)
    padded = size < k
    best, best_err = None, math.inf
    for i, s in enumerate(sampler.draw_many(draws)):
        if padded:
            # separate stream so padding never perturbs the sampler's own draws
            s = _pad(f, s, k, draw_generator(config.seed, 2**32 + i))
        err = projection_error(f, s)
        if err < best_err:
            best, best_err = s, err
    return SelectionResult(best, best_err, "volume-best-of", draws, padded)


def _greedy(f: DiscretizedFunction, k: int, weighted: bool, label: str) -> SelectionResult:
    if k < 0:
        raise ValueError("k must be nonnegative")
    col_weights = f.weights if weighted else np.ones(f.n)
    picked = tuple(greedy_pivots(f.values, col_weights, k))
    return SelectionResult(picked, projection_error(f, picked), label, 0)


def select_greedy_residual(f: DiscretizedFunction, k: int) -> SelectionResult:
    """Pick ``argmax_j w_j |residual_j|^2`` repeatedly (indices kept in pick order)."""
    return _greedy(f, k, True, "greedy-residual")


def select_greedy_max_volume(f: DiscretizedFunction, k: int) -> SelectionResult:
    """Pick the column that multiplies the Gram determinant most; weights are ignored."""
    return _greedy(f, k, False, "greedy-volume")


def select(
    f: DiscretizedFunction,
    k: int,
    strategy: str,
    config: SamplerConfig = SamplerConfig(),
    draws: int = 16,
    max_subsets: int = MAX_ENUMERATION,
    decomposition: Optional[SchmidtDecomposition] = None,
) -> SelectionResult:
    if strategy == "exhaustive":
        return select_exhaustive(f, k, max_subsets)
    if strategy == "volume-best-of":
        return select_volume_best_of(f, k, draws, config, decomposition)
    if strategy == "greedy-residual":
        return select_greedy_residual(f, k)
    if strategy == "greedy-volume":
        return select_greedy_max_volume(f, k)
    raise UnknownStrategy(f"unknown strategy {strategy!r}; expected one of {', '.join(STRATEGIES)}")


def make_certificate(
    k: int,
    optimal_tail_squared: float,
    result: SelectionResult,
    scale: float,
) -> BoundCertificate:
    achieved = result.squared_error
    tail_is_zero = optimal_tail_squared <= 0.0
    if tail_is_zero:
        prefactor = None
        satisfied = achieved <= ZERO_TAIL_RTOL * scale
    else:
        prefactor = achieved / optimal_tail_squared
        satisfied = achieved <= (k + 1) * optimal_tail_squared + BOUND_SLACK_RTOL * scale
    return BoundCertificate(
        k=k,
        optimal_tail_squared=optimal_tail_squared,
        achieved_squared_error=achieved,
        prefactor_squared=prefactor,
        tail_is_zero=tail_is_zero,
        satisfied=bool(satisfied),
        indices=tuple(result.indices),
        strategy=result.method,
        scale=scale,
    )


def certify_bound(
    f: DiscretizedFunction,
    k: int,
    strategy: str = "exhaustive",
    config: SamplerConfig = SamplerConfig(),
    draws: int = 16,
    max_subsets: int = MAX_ENUMERATION,
    decomposition: Optional[SchmidtDecomposition] = None,
) -> BoundCertificate:
    """Select ``k`` points with ``strategy`` and check the ``sqrt(k + 1)`` bound.

    A small slack of ``1e-12 * |f|^2`` absorbs rounding.  Sampling strategies
    may legitimately fail the check; the result is reported as found.
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    d = decomposition or schmidt_decompose(f)
    result = select(f, k, strategy, config, draws, max_subsets, d)
    return make_certificate(k, tail_width(d, k) ** 2, result, total_l2_norm_squared(f))
