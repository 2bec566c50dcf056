"""Estimators of ``P{Theta_i in A}`` from an observed series.

All estimators condition on the exceedances ``|X_t| > u_n`` (strict) of the
core range of a :class:`Series`; the padding around the core supplies the
neighbouring observations ``X_{t+h}``.  Reductions run sequentially over
``h`` and then ``t`` in ascending order, so results do not depend on how
work is batched.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .exceptions import DegenerateThreshold, PaddingViolation
from .spectral import IntervalSet
from .validation import (check_grid, check_int, check_positive, check_probability_level,
                         check_values)

ESTIMATORS = ("forward", "backward", "projection_hat", "projection")

# grid evaluation is chunked to bound the (x, t, h) indicator tensor
_CHUNK_ELEMENTS = 4_000_000


@dataclass(frozen=True)
class Series:
    """Observations ``values`` with core summation range ``[start, stop)``.

    Indices outside the core are padding: they are only read as neighbours
    of core observations.
    """

    values: np.ndarray
    start: int = 0
    stop: int | None = None

    def __post_init__(self):
        values = check_values(self.values)
        values.flags.writeable = False
        stop = len(values) if self.stop is None else int(self.stop)
        start = int(self.start)
        if not 0 <= start < stop <= len(values):
            raise ValueError(f"invalid core range [{start}, {stop}) for length {len(values)}")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "start", start)
        object.__setattr__(self, "stop", stop)

    @classmethod
    def padded(cls, values, padding: int) -> "Series":
        """Core is everything except ``padding`` observations on each side."""
        values = np.asarray(values, dtype=float)
        return cls(values, padding, len(values) - padding)

    @property
    def n(self) -> int:
        return self.stop - self.start

    @property
    def core(self) -> np.ndarray:
        return self.values[self.start:self.stop]

    @property
    def padding(self) -> tuple[int, int]:
        return self.start, len(self.values) - self.stop

    def with_padding(self, padding: int) -> "Series":
        return Series.padded(self.values, padding)

    def scaled(self, c: float) -> "Series":
        return Series(self.values * c, self.start, self.stop)


@dataclass(frozen=True)
class Quantile:
    """Threshold at the ``ceil(q n)``-th order statistic of ``|X_t|`` in the core."""

    q: float

    def __post_init__(self):
        object.__setattr__(self, "q", check_probability_level(self.q))


@dataclass(frozen=True)
class Absolute:
    u: float

    def __post_init__(self):
        object.__setattr__(self, "u", check_positive(self.u, "u"))


ThresholdRule = Union[Quantile, Absolute]


@dataclass(frozen=True)
class EstimatorConfig:
    """Threshold rule, block half-width ``s_n``, lag and tail-index mode.

    ``alpha=None`` means the tail index is estimated by :func:`hill`.
    """

    threshold: ThresholdRule = field(default_factory=lambda: Quantile(0.95))
    s_n: int = 30
    lag: int = 1
    alpha: float | None = None

    def __post_init__(self):
        check_int(self.s_n, "s_n", minimum=0)
        check_int(self.lag, "lag")
        if self.alpha is not None:
            object.__setattr__(self, "alpha", check_positive(self.alpha, "alpha"))
        if not isinstance(self.threshold, (Quantile, Absolute)):
            raise TypeError("threshold must be a Quantile or Absolute rule")

    @property
    def padding(self) -> int:
        return self.s_n + abs(self.lag)


@dataclass
class CdfReport:
    """Estimated (or reference) cdf values on a grid of sets ``(-inf, x]``."""

    x: np.ndarray
    values: dict[str, np.ndarray]
    meta: dict = field(default_factory=dict)

    def to_csv(self, columns: Sequence[str] | None = None, comments: bool = True) -> str:
        columns = list(self.values) if columns is None else list(columns)
        lines = []
        if comments:
            lines += [f"# {k}={v}" for k, v in self.meta.items()]
        lines.append(",".join(["x"] + columns))
        for j, x in enumerate(self.x):
            row = [f"{x:.10g}"] + [f"{self.values[c][j]:.17g}" for c in columns]
            lines.append(",".join(row))
        return "\n".join(lines) + "\n"


# -- threshold and tail index ------------------------------------------------


def threshold(series: Series, rule: ThresholdRule | EstimatorConfig) -> float:
    """``u_n`` from a quantile or absolute rule.

    Raises :class:`DegenerateThreshold` if no core observation exceeds it.
    """
    if isinstance(rule, EstimatorConfig):
        rule = rule.threshold
    a = np.abs(series.core)
    if isinstance(rule, Absolute):
        u = rule.u
    else:
        n = a.size
        k = min(max(math.ceil(round(rule.q * n, 9)), 1), n)
        u = float(np.partition(a, k - 1)[k - 1])
    if not np.any(a > u):
        raise DegenerateThreshold(f"no core observation exceeds u_n={u!r}")
    return u


def _exceedances(series: Series, u: float) -> np.ndarray:
    idx = series.start + np.flatnonzero(np.abs(series.core) > u)
    if idx.size == 0:
        raise DegenerateThreshold(f"no core observation exceeds u_n={u!r}")
    return idx


def _require_padding(series: Series, before: int, after: int) -> None:
    left, right = series.padding
    if left < before or right < after:
        raise PaddingViolation(
            f"need padding ({before}, {after}) around the core, series has ({left}, {right})")


def hill(series: Series, u: float) -> float:
    """Hill estimator ``#{|X_t| > u} / sum log+(|X_t| / u)`` over the core."""
    a = np.abs(series.core)
    exc = a[a > u]
    if exc.size == 0:
        raise DegenerateThreshold(f"no core observation exceeds u_n={u!r}")
    if not u > 0:
        raise DegenerateThreshold(f"the Hill estimator needs u_n > 0, got {u!r}")
    total = float(np.sum(np.log(exc / u)))
    if total == 0.0:
        raise DegenerateThreshold(f"exceedances of u_n={u!r} are indistinguishable from it")
    return exc.size / total


# -- per-set evaluation machinery ---------------------------------------------


def _indicators(sets: Sequence[IntervalSet], ratios: np.ndarray) -> np.ndarray:
    """Stack ``1_A(ratios)`` over ``sets`` along a new leading axis."""
    out = np.empty((len(sets),) + ratios.shape)
    for g, A in enumerate(sets):
        out[g] = A.contains(ratios)
    return out


def _as_sets(A) -> tuple[list[IntervalSet], bool]:
    if isinstance(A, IntervalSet):
        return [A], True
    return list(A), False


def _seqsum(a: np.ndarray) -> np.ndarray:
    """Sequential left-to-right sum along the last axis."""
    if a.shape[-1] == 0:
        return np.zeros(a.shape[:-1])
    return np.cumsum(a, axis=-1)[..., -1]


class _ForwardTerms:
    def __init__(self, series: Series, u: float, i: int):
        _require_padding(series, max(-i, 0), max(i, 0))
        t = _exceedances(series, u)
        x = series.values
        self.k = t.size
        self.ratios = x[t + i] / np.abs(x[t])

    def evaluate(self, sets) -> np.ndarray:
        ind = _indicators(sets, self.ratios)
        return _seqsum(ind) / self.k


class _BackwardTerms:
    def __init__(self, series: Series, u: float, i: int, alpha_hat: float):
        _require_padding(series, max(i, 0), max(-i, 0))
        t = _exceedances(series, u)
        x = series.values
        self.k = t.size
        prev = x[t - i]
        cur = x[t]
        live = prev != 0.0
        self.ratios = np.divide(cur, np.abs(prev), out=np.zeros_like(cur), where=live)
        self.weights = np.where(live, np.abs(prev / cur) ** alpha_hat, 0.0)
        self.live = live

    def evaluate(self, sets) -> np.ndarray:
        ind = _indicators(sets, self.ratios)
        ind[:, ~self.live] = 0.0
        return _seqsum(self.weights * ind) / self.k

    def evaluate_cdf(self, grid: np.ndarray) -> np.ndarray:
        # sets bounded away from 0: (-inf, x] for x < 0, complement of (x, inf) otherwise
        grid = np.asarray(grid, dtype=float)
        neg = grid < 0
        out = np.empty(grid.size)
        out[neg] = self.evaluate([IntervalSet.le(x) for x in grid[neg]])
        out[~neg] = 1.0 - self.evaluate([IntervalSet.gt(x) for x in grid[~neg]])
        return out


class _ProjectionTerms:
    """Per-exceedance windows ``X_{t+h}``, ``|h| <= s_n``, and their weights."""

    def __init__(self, series: Series, u: float, s_n: int, i: int, alpha: float):
        # |i| > s_n is allowed: H_n is then empty and every indicator is 1_A(0)
        s_n = check_int(s_n, "s_n", minimum=0)
        _require_padding(series, s_n + abs(i), s_n + abs(i))
        t = _exceedances(series, u)
        x = series.values
        h = np.arange(-s_n, s_n + 1)
        win = x[t[:, None] + h[None, :]]
        ahead = x[t[:, None] + h[None, :] + i]
        self.k = t.size
        absw = np.abs(win)
        # relative to the window maximum: same normalized weights, no overflow
        self.weights = (absw / absw.max(axis=1, keepdims=True)) ** alpha
        self.denominator = _seqsum(self.weights)
        live = absw > 0.0
        self.in_block = (np.abs(h + i) <= s_n)[None, :] & np.ones_like(live)
        self.live = live
        self.ratios = np.divide(ahead, absw, out=np.zeros_like(ahead), where=live)

    def normalized_weights(self) -> np.ndarray:
        return self.weights / self.denominator[:, None]

    def evaluate(self, sets) -> np.ndarray:
        out = np.empty(len(sets))
        per = max(1, _CHUNK_ELEMENTS // max(self.ratios.size, 1))
        for lo in range(0, len(sets), per):
            chunk = sets[lo:lo + per]
            ind = _indicators(chunk, self.ratios)
            zero_in = np.array([bool(A.contains(0.0)) for A in chunk], dtype=float)
            # outside H_n the indicator is evaluated at 0
            ind = np.where(self.in_block[None], ind, zero_in[:, None, None])
            ind[:, ~self.live] = 0.0
            numer = _seqsum(self.weights[None] * ind)
            out[lo:lo + len(chunk)] = _seqsum(numer / self.denominator[None]) / self.k
        return out


def _finish(values: np.ndarray, single: bool):
    return float(values[0]) if single else values


# -- public estimators --------------------------------------------------------


def forward(series: Series, u: float, i: int, A):
    """Forward estimator: share of exceedances with ``X_{t+i}/|X_t| in A``.

    ``A`` may be one :class:`IntervalSet` (returns a float) or a sequence of
    sets (returns an array).
    """
    sets, single = _as_sets(A)
    return _finish(_ForwardTerms(series, u, i).evaluate(sets), single)


def backward(series: Series, u: float, i: int, A, alpha_hat: float):
    """Backward estimator based on the time-change formula.

    Summands with ``X_{t-i} = 0`` are 0.
    """
    sets, single = _as_sets(A)
    return _finish(_BackwardTerms(series, u, i, alpha_hat).evaluate(sets), single)


def backward_cdf(series: Series, u: float, i: int, x_grid, alpha_hat: float) -> np.ndarray:
    """Backward estimate of ``P{Theta_i <= x}`` on a grid.

    The time-change identity only covers sets that exclude 0, so for
    ``x >= 0`` the value is ``1 - backward(GT(x))``; the mass the estimator
    does not assign to nonzero values ends up at 0.
    """
    return _BackwardTerms(series, u, i, alpha_hat).evaluate_cdf(check_grid(x_grid))


def projection(series: Series, u: float, s_n: int, i: int, alpha: float, A):
    """Projection estimator with known tail index ``alpha``.

    Each exceedance ``t`` spreads unit mass over ``h = -s_n..s_n`` with
    weights ``|X_{t+h}|**alpha`` and evaluates ``1_A(X_{t+h+i}/|X_{t+h}|)``
    (or ``1_A(0)`` when ``t+h+i`` leaves the block).
    """
    sets, single = _as_sets(A)
    alpha = check_positive(alpha, "alpha")
    return _finish(_ProjectionTerms(series, u, s_n, i, alpha).evaluate(sets), single)


def projection_hat(series: Series, u: float, s_n: int, i: int, A):
    """:func:`projection` with ``alpha`` replaced by ``hill(series, u)``."""
    return projection(series, u, s_n, i, hill(series, u), A)


def projection_weights(series: Series, u: float, s_n: int, alpha: float) -> np.ndarray:
    """Normalized inner weights, one row per exceedance (rows sum to 1)."""
    return _ProjectionTerms(series, u, s_n, 0, alpha).normalized_weights()


def cdf_curve(series: Series, cfg: EstimatorConfig, x_grid,
              estimators: Sequence[str] = ("forward", "backward", "projection_hat")) -> CdfReport:
    """Evaluate estimators on ``A = (-inf, x]`` for every ``x`` in ``x_grid``.

    The exceedance set, Hill estimate and projection windows are computed
    once and shared by all grid points.  The backward column is
    :func:`backward_cdf`.  ``projection`` (known alpha) needs
    ``cfg.alpha``.
    """
    grid = check_grid(x_grid)
    unknown = set(estimators) - set(ESTIMATORS)
    if unknown:
        raise ValueError(f"unknown estimators {sorted(unknown)}")
    sets = [IntervalSet.le(x) for x in grid]
    u = threshold(series, cfg)
    alpha_hat = hill(series, u)
    i = cfg.lag
    values = {}
    for name in estimators:
        if name == "forward":
            values[name] = _ForwardTerms(series, u, i).evaluate(sets)
        elif name == "backward":
            alpha = alpha_hat if cfg.alpha is None else cfg.alpha
            values[name] = _BackwardTerms(series, u, i, alpha).evaluate_cdf(grid)
        elif name == "projection_hat":
            values[name] = _ProjectionTerms(series, u, cfg.s_n, i, alpha_hat).evaluate(sets)
        else:
            if cfg.alpha is None:
                raise ValueError("the known-alpha projection estimator needs cfg.alpha")
            values[name] = _ProjectionTerms(series, u, cfg.s_n, i, cfg.alpha).evaluate(sets)
    meta = {"u_n": u, "alpha_hat": alpha_hat, "s_n": cfg.s_n, "lag": i,
            "n": series.n, "exceedances": int(np.sum(np.abs(series.core) > u))}
    return CdfReport(grid, values, meta)
