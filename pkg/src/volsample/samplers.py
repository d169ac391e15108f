"""Volume sampling of ``k``-subsets.

The target law on ``k``-subsets ``S`` of the sample points is

    P(S) proportional to det G_S * prod_{j in S} w_j,

i.e. the product-measure density ``det G_k / integral(det G_k)`` collapsed from
ordered tuples to subsets (tuples with a repeated point have zero volume and
the ``k!`` orderings of a subset share its mass).  Equivalently this is the
``k``-DPP with kernel ``L = B^T B``, ``B_j = sqrt(w_j) f(y_j)``.

Three samplers are provided: exhaustive enumeration, exact spectral ``k``-DPP
sampling and a Metropolis swap chain.  Every draw ``i`` uses its own Philox
substream derived from ``(seed, i)``, so draws are reproducible regardless of
how many are taken or in which order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import CombinatorialBlowup, NoNonzeroStart, RankDeficient
from .measure import DiscretizedFunction, check_indices
from .schmidt import SchmidtDecomposition, schmidt_decompose
from .volumes import greedy_pivots, pivoted_logdet

METHODS = ("enumerate", "kdpp", "mcmc")
MAX_ENUMERATION = 10**6
BURN_IN_FRACTION = 0.2
_CHUNK = 4096
_TABLE_MAX_N = 20
_TABLE_MAX_SUBSETS = 2**16


def draw_generator(seed: int, draw: int) -> np.random.Generator:
    """Independent Philox stream for draw number ``draw`` under ``seed``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(draw,))))


@dataclass(frozen=True)
class SamplerConfig:
    seed: int = 0
    method: str = "kdpp"
    mcmc_steps: Optional[int] = None

    def __post_init__(self):
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        if self.method not in METHODS:
            raise ValueError(f"unknown sampling method {self.method!r}; expected one of {METHODS}")
        if self.mcmc_steps is not None and self.mcmc_steps < 1:
            raise ValueError("mcmc_steps must be positive")

    def steps_for(self, n: int, k: int) -> int:
        steps = 50 * n * k if self.mcmc_steps is None else self.mcmc_steps
        if self.method == "mcmc" and steps < n * k:
            raise ValueError(f"mcmc_steps={steps} is below n*k={n * k}")
        return steps


@dataclass(frozen=True, eq=False)
class SubsetDistribution:
    subsets: tuple
    probabilities: np.ndarray

    def probability(self, subset: Iterable[int]) -> float:
        key = tuple(sorted(int(i) for i in subset))
        try:
            return float(self.probabilities[self.subsets.index(key)])
        except ValueError:
            return 0.0

    def as_dict(self) -> dict:
        return dict(zip(self.subsets, self.probabilities.tolist()))

    def sample(self, rng: np.random.Generator) -> tuple:
        cdf = np.cumsum(self.probabilities)
        i = int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right"))
        return self.subsets[min(i, len(self.subsets) - 1)]


def log_weighted_volumes(f: DiscretizedFunction, subsets: np.ndarray, scaled_kernel: bool = False) -> np.ndarray:
    """``log(det G_S * prod w_S)`` for each row of ``subsets``; ``-inf`` for zero volume.

    With ``scaled_kernel=True`` the same quantity is computed as ``log det L_S``
    for the kernel of weight-scaled columns instead.
    """
    subsets = np.asarray(subsets, dtype=np.int64)
    if scaled_kernel:
        b = f.scaled_values()
        kernel = b.T @ b
        logw = np.zeros(f.n)
    else:
        kernel = f.values.T @ f.values
        logw = np.log(f.weights)
    out = np.empty(len(subsets))
    for start in range(0, len(subsets), 65536):
        blk = subsets[start:start + 65536]
        ld, _ = pivoted_logdet(kernel[blk[:, :, None], blk[:, None, :]])
        out[start:start + 65536] = ld + logw[blk].sum(axis=1)
    return out


def _require_rank(d: SchmidtDecomposition, k: int):
    if k > d.rank:
        raise RankDeficient(f"volume sampling of {k} points needs rank >= {k}, rank is {d.rank}")


def enumerate_distribution(
    f: DiscretizedFunction,
    k: int,
    max_subsets: int = MAX_ENUMERATION,
    scaled_kernel: bool = False,
    decomposition: Optional[SchmidtDecomposition] = None,
) -> SubsetDistribution:
    """Exact volume-sampling probabilities of all ``C(n, k)`` subsets, in lexicographic order."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    count = math.comb(f.n, k)
    if count > max_subsets:
        raise CombinatorialBlowup(f"C({f.n},{k}) = {count} subsets exceeds the limit {max_subsets}")
    d = decomposition or schmidt_decompose(f)
    _require_rank(d, k)
    subsets = np.array(list(combinations(range(f.n), k)), dtype=np.int64).reshape(count, k)
    logv = log_weighted_volumes(f, subsets, scaled_kernel)
    if not np.isfinite(logv).any():
        raise RankDeficient(f"every {k}-subset has zero volume")
    p = np.exp(logv - logv.max())
    p /= p.sum()
    return SubsetDistribution(tuple(tuple(s) for s in subsets.tolist()), p)


def sample_kdpp(
    d: SchmidtDecomposition,
    f: DiscretizedFunction,
    k: int,
    config: SamplerConfig,
    draw: int = 0,
) -> tuple:
    """Exact draw via the spectral ``k``-DPP algorithm.

    First ``k`` eigenvectors of the kernel are selected with probabilities
    given by elementary symmetric polynomial ratios, then items are drawn one
    at a time from the resulting projection DPP.
    """
    _require_rank(d, k)
    if k == 0:
        return ()
    rng = draw_generator(config.seed, draw)
    r = d.rank
    lam = d.sigma_squared / d.sigma_squared[0]
    # e_l of the first i eigenvalues
    esp = np.zeros((k + 1, r + 1))
    esp[0] = 1.0
    for i in range(1, r + 1):
        esp[1:, i] = esp[1:, i - 1] + lam[i - 1] * esp[:-1, i - 1]

    chosen = []
    remaining = k
    for i in range(r, 0, -1):
        if remaining == 0:
            break
        if remaining == i:
            chosen.extend(range(i - 1, -1, -1))
            break
        if rng.random() < lam[i - 1] * esp[remaining - 1, i - 1] / esp[remaining, i]:
            chosen.append(i - 1)
            remaining -= 1

    vecs = d.kernel_eigenvectors()[:, chosen]
    picked: list[int] = []
    for _ in range(k):
        p = np.einsum("ij,ij->i", vecs, vecs)
        p[picked] = 0.0
        cdf = np.cumsum(np.clip(p, 0.0, None))
        j = int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right"))
        j = min(j, f.n - 1)
        picked.append(j)
        c = int(np.argmax(np.abs(vecs[j])))
        pivot = vecs[:, c] / vecs[j, c]
        vecs = np.delete(vecs, c, axis=1)
        vecs -= np.outer(pivot, vecs[j])
        if vecs.shape[1]:
            vecs, _ = np.linalg.qr(vecs)
    return tuple(sorted(picked))


def mcmc_start(f: DiscretizedFunction, k: int) -> tuple:
    """Greedy maximum-volume subset used to start the swap chain."""
    start = greedy_pivots(f.values, np.ones(f.n), k)
    if len(start) < k:
        raise NoNonzeroStart(f"greedy search found only {len(start)} independent columns, need {k}")
    return tuple(sorted(start))


def acceptance_probability(f: DiscretizedFunction, current: Sequence[int], proposal: Sequence[int]) -> float:
    """Metropolis acceptance ``min(1, vol(proposal) / vol(current))`` with weighted volumes."""
    cur = check_indices(f, current, distinct=True)
    prop = check_indices(f, proposal, distinct=True)
    if sorted(cur.tolist()) == sorted(prop.tolist()):
        return 1.0
    lv = log_weighted_volumes(f, np.stack([cur, prop]))
    return float(np.exp(min(0.0, lv[1] - lv[0])))


class _SwapChains:
    """Vectorised Metropolis swap chains, one Philox substream per chain."""

    def __init__(self, f: DiscretizedFunction, k: int, config: SamplerConfig, start: tuple):
        self.f, self.k, self.config = f, k, config
        self.steps = config.steps_for(f.n, k)
        self.start = np.array(start, dtype=np.int64)
        self.gram = f.values.T @ f.values
        self.logw = np.log(f.weights)
        self._table = None
        if f.n <= _TABLE_MAX_N and math.comb(f.n, k) <= _TABLE_MAX_SUBSETS:
            # every subset's log-volume, addressed by its bitmask
            subsets = np.array(list(combinations(range(f.n), k)), dtype=np.int64).reshape(-1, k)
            self._table = np.full(1 << f.n, -np.inf)
            self._table[(1 << subsets).sum(axis=1)] = log_weighted_volumes(f, subsets)

    def _logvol(self, states: np.ndarray) -> np.ndarray:
        if self._table is not None:
            return self._table[(1 << states).sum(axis=1)]
        ld, _ = pivoted_logdet(self.gram[states[:, :, None], states[:, None, :]])
        return ld + self.logw[states].sum(axis=1)

    def run(self, draws: Sequence[int], record: bool = False):
        n, k, steps = self.f.n, self.k, self.steps
        nd = len(draws)
        states = np.tile(self.start, (nd, 1))
        if k == 0 or k == n:
            return states, (np.repeat(states[:, None], steps, axis=1) if record else None)

        pos = np.empty((nd, steps), dtype=np.int64)
        out = np.empty((nd, steps), dtype=np.int64)
        u = np.empty((nd, steps))
        for c, i in enumerate(draws):
            rng = draw_generator(self.config.seed, int(i))
            pos[c] = rng.integers(0, k, steps)
            out[c] = rng.integers(0, n - k, steps)
            u[c] = rng.random(steps)

        rows = np.arange(nd)
        free = np.ones(n, dtype=bool)
        free[self.start] = False
        outside = np.tile(np.flatnonzero(free), (nd, 1))
        logv = self._logvol(states)
        trace = np.empty((nd, steps, k), dtype=np.int64) if record else None
        for t in range(steps):
            pt, ot = pos[:, t], out[:, t]
            incoming = outside[rows, ot]
            outgoing = states[rows, pt]
            prop = states.copy()
            prop[rows, pt] = incoming
            logv_prop = self._logvol(prop)
            with np.errstate(invalid="ignore"):
                accept = u[:, t] < np.exp(np.minimum(0.0, logv_prop - logv))
            acc = rows[accept]
            states[acc] = prop[acc]
            logv[acc] = logv_prop[acc]
            outside[acc, ot[acc]] = outgoing[acc]
            if record:
                trace[:, t] = states
        return states, trace


def _mcmc_chains(f, k, config, decomposition=None):
    d = decomposition or schmidt_decompose(f)
    _require_rank(d, k)
    return _SwapChains(f, k, config, mcmc_start(f, k))


def sample_mcmc(f: DiscretizedFunction, k: int, config: SamplerConfig, draw: int = 0) -> tuple:
    """State of the swap chain for draw ``draw`` after ``config.mcmc_steps`` steps."""
    states, _ = _mcmc_chains(f, k, config).run([draw])
    return tuple(sorted(states[0].tolist()))


def mcmc_trace(f: DiscretizedFunction, k: int, config: SamplerConfig, draw: int = 0) -> np.ndarray:
    """Sorted chain states after the burn-in (first 20% of the steps are discarded)."""
    chains = _mcmc_chains(f, k, config)
    _, trace = chains.run([draw], record=True)
    burn = int(BURN_IN_FRACTION * chains.steps)
    return np.sort(trace[0, burn:], axis=1)


class VolumeSampler:
    """Repeated draws for one instance, sharing the precomputation between draws."""

    def __init__(
        self,
        f: DiscretizedFunction,
        k: int,
        config: SamplerConfig,
        decomposition: Optional[SchmidtDecomposition] = None,
        max_subsets: int = MAX_ENUMERATION,
    ):
        self.f, self.k, self.config = f, k, config
        self.decomposition = decomposition or schmidt_decompose(f)
        _require_rank(self.decomposition, k)
        if config.method == "enumerate":
            self._dist = enumerate_distribution(f, k, max_subsets, decomposition=self.decomposition)
        elif config.method == "mcmc":
            self._chains = _SwapChains(f, k, config, mcmc_start(f, k))

    def draw(self, i: int) -> tuple:
        return self.draw_many([i])[0]

    def draw_many(self, draws) -> list:
        if isinstance(draws, int):
            draws = range(draws)
        draws = list(draws)
        method = self.config.method
        if method == "enumerate":
            return [self._dist.sample(draw_generator(self.config.seed, i)) for i in draws]
        if method == "kdpp":
            return [sample_kdpp(self.decomposition, self.f, self.k, self.config, i) for i in draws]
        result = []
        for start in range(0, len(draws), _CHUNK):
            states, _ = self._chains.run(draws[start:start + _CHUNK])
            result.extend(tuple(sorted(s)) for s in states.tolist())
        return result
