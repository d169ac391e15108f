"""CSV input for value matrices and weights.

Values: comma separated, no header, one row per coordinate of R^m and one
column per sample point.  Weights: a single column with one value per sample
point.  Without a weights file every point gets weight 1.
"""

from __future__ import annotations

from pathlib import Path
from typing import Optional

import numpy as np

from .errors import IoError, ParseError
from .generators import InstanceSpec
from .measure import DiscretizedFunction, new_discretized_function


def _load(path) -> np.ndarray:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc.strerror or exc}") from exc
    try:
        return np.loadtxt(text.splitlines(), delimiter=",", ndmin=2, dtype=float)
    except ValueError as exc:
        raise ParseError(f"{path}: {exc}") from exc


def read_values_csv(path) -> np.ndarray:
    values = _load(path)
    if values.size == 0:
        raise ParseError(f"{path}: no values")
    return values


def read_weights_csv(path) -> np.ndarray:
    w = _load(path)
    if w.shape[1] != 1 and w.shape[0] != 1:
        raise ParseError(f"{path}: weights must be a single column")
    return w.reshape(-1)


def load_instance(values_path, weights_path: Optional[str] = None) -> DiscretizedFunction:
    values = read_values_csv(values_path)
    weights = read_weights_csv(weights_path) if weights_path else None
    return new_discretized_function(values, weights)


def read_spec(path) -> InstanceSpec:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc.strerror or exc}") from exc
    return InstanceSpec.from_json(text)


def write_instance(f: DiscretizedFunction, values_path, weights_path=None) -> None:
    np.savetxt(values_path, f.values, delimiter=",", fmt="%.17g")
    if weights_path is not None:
        np.savetxt(weights_path, f.weights.reshape(-1, 1), delimiter=",", fmt="%.17g")
