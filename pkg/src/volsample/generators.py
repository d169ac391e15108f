"""Reproducible test instances.

An :class:`InstanceSpec` is a small JSON-serialisable record::

    {"kind": "prescribed_spectrum", "m": 6, "n": 8, "seed": 3,
     "params": {"spectrum": [3, 2, 1], "weights": "random"}}

Kinds and their ``params``:

``prescribed_spectrum``
    ``spectrum`` (descending, positive), ``factors`` (``"random"`` or
    ``"identity"``), ``weights`` (``"uniform"``, ``"random"`` or a list).
``kernel_snapshot``
    ``kernel`` (``"inverse"`` for ``1/(x+y+c)`` or ``"gaussian"`` for
    ``exp(-(x-y)^2/l^2)``), ``c`` or ``length``, ``x_range`` and ``y_range``
    as ``[lo, hi]``; the grids have ``m`` and ``n`` equispaced points and the
    weights are trapezoidal quadrature weights on the ``y`` grid.
``gaussian``
    no parameters; i.i.d. standard normal values, unit weights.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import InvalidGrid, ParseError, ShapeMismatch, SpectrumTooLong
from .measure import DiscretizedFunction

KINDS = ("prescribed_spectrum", "kernel_snapshot", "gaussian")


@dataclass(frozen=True)
class InstanceSpec:
    kind: str
    m: int
    n: int
    seed: int = 0
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ParseError(f"unknown instance kind {self.kind!r}; expected one of {KINDS}")
        if self.m < 1 or self.n < 1:
            raise ShapeMismatch("instance dimensions must be >= 1")

    def to_json(self) -> str:
        return json.dumps(
            {"kind": self.kind, "m": self.m, "n": self.n, "seed": self.seed, "params": self.params},
            sort_keys=True,
        )

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "InstanceSpec":
        try:
            return cls(
                kind=data["kind"],
                m=int(data["m"]),
                n=int(data["n"]),
                seed=int(data.get("seed", 0)),
                params=dict(data.get("params") or {}),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"invalid instance spec: {exc}") from exc

    @classmethod
    def from_json(cls, text: str) -> "InstanceSpec":
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid instance spec JSON: {exc}") from exc


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def _orthonormal(rng, rows: int, cols: int) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((rows, cols)))
    return q * np.where(np.diag(r) < 0, -1.0, 1.0)


def _weights(spec_weights, n: int, rng) -> np.ndarray:
    if spec_weights is None or spec_weights == "uniform":
        return np.ones(n)
    if spec_weights == "random":
        return rng.uniform(0.25, 2.0, n)
    w = np.asarray(spec_weights, dtype=float)
    if w.shape != (n,):
        raise ShapeMismatch(f"expected {n} weights, got {w.shape}")
    return w


def gen_prescribed_spectrum(spec: InstanceSpec) -> DiscretizedFunction:
    """``f = sum_i sigma_i u_i v_i`` with Euclidean-orthonormal ``u`` and weighted-orthonormal ``v``."""
    sigma = np.asarray(spec.params.get("spectrum", []), dtype=float).reshape(-1)
    r = sigma.size
    if r > min(spec.m, spec.n):
        raise SpectrumTooLong(f"{r} singular values do not fit a {spec.m}x{spec.n} instance")
    if np.any(sigma <= 0) or np.any(np.diff(sigma) > 0):
        raise ParseError("spectrum must be positive and nonincreasing")
    rng = _rng(spec.seed)
    weights = _weights(spec.params.get("weights"), spec.n, rng)
    sqrt_w = np.sqrt(weights)
    if spec.params.get("factors", "random") == "identity":
        u = np.eye(spec.m, r)
        v = np.eye(spec.n, r) / sqrt_w[:, None]
    else:
        u = _orthonormal(rng, spec.m, r)
        v = _orthonormal(rng, spec.n, r) / sqrt_w[:, None]
    return DiscretizedFunction((u * sigma) @ v.T, weights)


def _grid(bounds, count: int, name: str) -> np.ndarray:
    try:
        lo, hi = (float(b) for b in bounds)
    except (TypeError, ValueError) as exc:
        raise InvalidGrid(f"{name} must be a pair [lo, hi]") from exc
    if count == 1:
        return np.array([lo])
    if not hi > lo:
        raise InvalidGrid(f"{name} must be strictly increasing, got [{lo}, {hi}]")
    return np.linspace(lo, hi, count)


def trapezoid_weights(y: np.ndarray) -> np.ndarray:
    h = np.diff(y)
    w = np.zeros_like(y)
    w[:-1] += 0.5 * h
    w[1:] += 0.5 * h
    return w


def gen_kernel_snapshot(spec: InstanceSpec) -> DiscretizedFunction:
    p = spec.params
    if spec.n < 2:
        raise InvalidGrid("the y grid needs at least two points for trapezoidal weights")
    x = _grid(p.get("x_range", [0.0, 1.0]), spec.m, "x_range")
    y = _grid(p.get("y_range", [0.0, 1.0]), spec.n, "y_range")
    kernel = p.get("kernel", "inverse")
    if kernel == "inverse":
        c = float(p.get("c", 1.0))
        if c <= 0:
            raise InvalidGrid("the inverse kernel needs c > 0")
        denom = x[:, None] + y[None, :] + c
        if np.any(denom <= 0):
            raise InvalidGrid("x + y + c must stay positive on the grid")
        values = 1.0 / denom
    elif kernel == "gaussian":
        length = float(p.get("length", 1.0))
        if length <= 0:
            raise InvalidGrid("the gaussian kernel needs length > 0")
        values = np.exp(-((x[:, None] - y[None, :]) ** 2) / length**2)
    else:
        raise ParseError(f"unknown kernel {kernel!r}")
    return DiscretizedFunction(values, trapezoid_weights(y))


def gen_gaussian(spec: InstanceSpec) -> DiscretizedFunction:
    values = _rng(spec.seed).standard_normal((spec.m, spec.n))
    return DiscretizedFunction(values, np.ones(spec.n))


def generate(spec: InstanceSpec) -> DiscretizedFunction:
    return {
        "prescribed_spectrum": gen_prescribed_spectrum,
        "kernel_snapshot": gen_kernel_snapshot,
        "gaussian": gen_gaussian,
    }[spec.kind](spec)
