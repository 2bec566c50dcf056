"""Input validation helpers."""

from __future__ import annotations

import numbers

import numpy as np
from sklearn.utils import check_array


def check_values(x, name: str = "series") -> np.ndarray:
    """Return ``x`` as a finite 1-D float array (copy)."""
    arr = check_array(x, ensure_2d=False, dtype=np.float64, copy=True,
                      ensure_all_finite=True, input_name=name)
    if arr.ndim == 2 and 1 in arr.shape:
        arr = arr.ravel()
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    return arr


def check_int(value, name: str, minimum: int | None = None) -> int:
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise TypeError(f"{name} must be an integer, got {value!r}")
    value = int(value)
    if minimum is not None and value < minimum:
        raise ValueError(f"{name} must be >= {minimum}, got {value}")
    return value


def check_positive(value, name: str) -> float:
    value = float(value)
    if not (value > 0 and np.isfinite(value)):
        raise ValueError(f"{name} must be positive and finite, got {value!r}")
    return value


def check_probability_level(q, name: str = "q") -> float:
    q = float(q)
    if not 0.0 < q < 1.0:
        raise ValueError(f"{name} must lie in (0, 1), got {q!r}")
    return q


def check_grid(x_grid, name: str = "x_grid") -> np.ndarray:
    grid = np.atleast_1d(np.asarray(x_grid, dtype=float))
    if grid.ndim != 1 or grid.size == 0:
        raise ValueError(f"{name} must be a non-empty 1-D array")
    if not np.all(np.isfinite(grid)):
        raise ValueError(f"{name} must be finite")
    if np.any(np.diff(grid) < 0):
        raise ValueError(f"{name} must be sorted ascending")
    return grid


def linear_grid(lo: float, hi: float, step: float) -> np.ndarray:
    """``lo, lo+step, ..., hi`` computed as ``lo + k*step`` and rounded to 12 digits."""
    n = int(round((hi - lo) / step))
    return np.round(lo + step * np.arange(n + 1), 12)
