"""Brute-force reference computations shared by the tests.

Nothing here calls into the package's numerical routines: determinants come
from ``numpy.linalg.det``, projections from ``numpy.linalg.lstsq`` and
symmetric polynomials from explicit subset products.
"""

from itertools import combinations, product

import numpy as np


def esp_bruteforce(x, k):
    return float(sum(np.prod(c) for c in combinations(list(x), k))) if k else 1.0


def tuple_volume_sum(values, weights, k):
    total = 0.0
    for t in product(range(values.shape[1]), repeat=k):
        cols = values[:, list(t)]
        total += np.prod(weights[list(t)]) * np.linalg.det(cols.T @ cols)
    return total


def projection_error(values, weights, subset):
    subset = list(subset)
    if not subset:
        return float(weights @ (values**2).sum(axis=0))
    cols = values[:, subset]
    coef, *_ = np.linalg.lstsq(cols, values, rcond=None)
    resid = values - cols @ coef
    return float(weights @ (resid**2).sum(axis=0))


def subset_probabilities(values, weights, k):
    subsets = list(combinations(range(values.shape[1]), k))
    vols = np.array(
        [np.prod(weights[list(s)]) * np.linalg.det(values[:, list(s)].T @ values[:, list(s)]) for s in subsets]
    )
    vols = np.clip(vols, 0.0, None)
    return subsets, vols / vols.sum()


def weighted_singular_values(values, weights):
    return np.linalg.svd(values * np.sqrt(weights), compute_uv=False)
