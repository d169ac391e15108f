"""Brute-force verification of the volume-sampling identities on one instance.

Each check compares a closed form against an exhaustive computation that
does not share code with it (tuple sums use ``numpy.linalg.det`` directly):

``expected-volume``    sum over ordered k-tuples of prod(w) det G  vs  k! e_k(sigma^2)
``expectation``        sum_S P(S) err(S) by enumeration  vs  (k+1) e_{k+1} / e_k
``schur``              det G(S + j)  vs  det G(S) * residual(S, j)  for all S, j
``projection-paths``   orthogonalization vs Schur-complement projection errors
``sandwich``           d_k^2 <= E err <= (k+1) d_k^2
``main-bound``         the best k-subset has err <= (k+1) d_k^2
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations, product
from typing import Iterable

import numpy as np

from .errors import CombinatorialBlowup
from .measure import DiscretizedFunction, total_l2_norm_squared
from .samplers import enumerate_distribution
from .schmidt import schmidt_decompose, tail_width
from .selection import certify_bound, projection_error, projection_error_schur
from .volumes import expected_projection_error, expected_volume, log_det_gram, residual_volume

DEFAULT_TOL = 1e-9
DEFAULT_MAX_ENUM = 10**5


@dataclass(frozen=True)
class CheckResult:
    name: str
    k: int
    passed: bool
    max_rel_dev: float
    skipped: bool = False
    detail: str = ""

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "k": self.k,
            "passed": self.passed,
            "skipped": self.skipped,
            "max_rel_dev": self.max_rel_dev,
            "detail": self.detail,
        }


def _rel(a: float, b: float, floor: float) -> float:
    return abs(a - b) / max(abs(b), floor)


def tuple_volume_sum(f: DiscretizedFunction, k: int, gram_scale: float = 1.0) -> float:
    """``sum over (j_1..j_k) in {0..n-1}^k of prod_i w_{j_i} * det G(j_1..j_k)``.

    ``gram_scale`` multiplies every Gram matrix; anything but 1 corrupts the
    sum and exists so the checks can be shown to fail.
    """
    tuples = np.array(list(product(range(f.n), repeat=k)), dtype=np.int64).reshape(-1, k)
    gram = gram_scale * (f.values.T @ f.values)
    dets = np.linalg.det(gram[tuples[:, :, None], tuples[:, None, :]])
    return float(np.sum(np.prod(f.weights[tuples], axis=1) * dets))


def verify_instance(
    f: DiscretizedFunction,
    ks: Iterable[int],
    tol: float = DEFAULT_TOL,
    max_enum: int = DEFAULT_MAX_ENUM,
    gram_scale: float = 1.0,
) -> list[CheckResult]:
    d = schmidt_decompose(f)
    scale = total_l2_norm_squared(f)
    tiny = np.finfo(float).tiny
    checks: list[CheckResult] = []

    for k in ks:
        if k < 1:
            raise ValueError("verification needs k >= 1")
        if f.n**k > max_enum:
            raise CombinatorialBlowup(f"{f.n}^{k} tuples exceed the enumeration cap {max_enum}")
        n_sub = math.comb(f.n, k)

        brute = tuple_volume_sum(f, k, gram_scale)
        closed = expected_volume(d, k)
        dev = _rel(brute, closed, max(scale**k, tiny) if closed == 0 else tiny)
        checks.append(CheckResult("expected-volume", k, dev <= tol, dev))

        if k > d.rank:
            detail = f"rank {d.rank} < k"
            for name in ("expectation", "sandwich"):
                checks.append(CheckResult(name, k, True, 0.0, skipped=True, detail=detail))
        else:
            dist = enumerate_distribution(f, k, max_enum, decomposition=d)
            errs = np.array([projection_error(f, s) for s in dist.subsets])
            averaged = float(dist.probabilities @ errs)
            closed_err = expected_projection_error(d, k)
            dev = _rel(averaged, closed_err, max(scale, tiny) if closed_err == 0 else tiny)
            checks.append(CheckResult("expectation", k, dev <= tol, dev))

            tail2 = tail_width(d, k) ** 2
            viol = max(0.0, tail2 - closed_err, closed_err - (k + 1) * tail2) / max(scale, tiny)
            checks.append(
                CheckResult("sandwich", k, viol <= tol, viol, detail=f"E err / d_k^2 = {closed_err / tail2:.6g}" if tail2 else "")
            )

        if n_sub * (f.n - k) > max_enum:
            raise CombinatorialBlowup(f"{n_sub * (f.n - k)} (S, j) pairs exceed the enumeration cap {max_enum}")
        worst, worst_paths = 0.0, 0.0
        for s in combinations(range(f.n), k):
            vol = log_det_gram(f, s)
            if not vol.is_zero:
                worst_paths = max(worst_paths, abs(projection_error(f, s) - projection_error_schur(f, s)) / max(scale, tiny))
            for j in range(f.n):
                if j in s:
                    continue
                big = log_det_gram(f, s + (j,))
                if vol.is_zero or big.is_zero:
                    dev = 0.0 if big.is_zero and vol.value * residual_volume(f, s, j) == 0.0 else 1.0
                else:
                    dev = _rel(vol.value * residual_volume(f, s, j), big.value, tiny)
                worst = max(worst, dev)
        checks.append(CheckResult("schur", k, worst <= tol, worst))
        checks.append(CheckResult("projection-paths", k, worst_paths <= tol, worst_paths))

        cert = certify_bound(f, k, "exhaustive", max_subsets=max_enum, decomposition=d)
        slack = 0.0 if cert.satisfied else (cert.achieved_squared_error - cert.bound_squared) / max(scale, tiny)
        checks.append(
            CheckResult("main-bound", k, cert.satisfied, slack, detail=f"prefactor^2 = {cert.prefactor_squared}")
        )
    return checks
