"""Monte Carlo comparison of the forward, backward and projection estimators.

Each replication simulates one series from the model, estimates the cdf of
``Theta_i`` on a grid for every lag, and stores the result in its own slot.
Aggregates are reduced over the slots in replication order, so reports do
not depend on the number of worker processes.  Standard deviations are
population values (divide by the number of successful replications).
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Sequence

import numpy as np

from .estimators import (ESTIMATORS, Quantile, Series, _BackwardTerms, _ForwardTerms,
                         _ProjectionTerms, hill, threshold)
from .exceptions import AllReplicationsFailed, DegenerateThreshold, PaddingViolation, ReferenceUnavailable
from .models import ModelSpec, mc_true_cdf, pre_asymptotic_cdf, simulate
from .rng import derive_seed
from .spectral import IntervalSet
from .validation import check_int, check_probability_level, linear_grid

BENCH_ESTIMATORS = ("forward", "backward", "projection_hat")
REFERENCE_STREAM = 0x5EED_CDF0
FAILURE_WARN_FRACTION = 0.01


@dataclass(frozen=True)
class BenchConfig:
    """Monte Carlo design; defaults follow the 1000 x 2000 study at q = 0.95, s_n = 30."""

    model: ModelSpec = field(default_factory=lambda: ModelSpec("garcht"))
    replications: int = 1000
    n: int = 2000
    q: float = 0.95
    s_n: int = 30
    lags: tuple[int, ...] = (1,)
    x_grid: tuple[float, float, float] = (-2.0, 2.0, 0.01)
    target: str = "limit"
    master_seed: int = 0
    estimators: tuple[str, ...] = BENCH_ESTIMATORS
    reference_draws: int = 1_000_000

    def __post_init__(self):
        check_int(self.replications, "replications", minimum=1)
        check_int(self.n, "n", minimum=1)
        check_int(self.s_n, "s_n", minimum=0)
        check_probability_level(self.q)
        object.__setattr__(self, "lags", tuple(int(i) for i in self.lags))
        object.__setattr__(self, "estimators", tuple(self.estimators))
        object.__setattr__(self, "x_grid", tuple(float(v) for v in self.x_grid))
        if not self.lags:
            raise ValueError("at least one lag is required")
        bad = set(self.estimators) - set(BENCH_ESTIMATORS)
        if bad or not self.estimators:
            raise ValueError(f"estimators must be a non-empty subset of {BENCH_ESTIMATORS}")
        if self.target not in ("limit", "pre_asymptotic"):
            raise ValueError("target must be 'limit' or 'pre_asymptotic'")

    def grid(self) -> np.ndarray:
        return linear_grid(*self.x_grid)

    def echo(self) -> dict:
        d = asdict(self)
        d["model"] = {"kind": self.model.kind, "seed": self.model.seed,
                      "burn_in": self.model.burn_in, "params": self.model.params}
        return d


@dataclass
class BenchReport:
    """Per (estimator, lag) arrays over the x grid.

    ``stats[(estimator, lag)]`` maps ``mean``, ``sd``, ``bias``, ``rmse`` and
    ``rel_eff`` to arrays aligned with ``x``; ``reference[lag]`` is the cdf
    the estimates were compared with.
    """

    x: np.ndarray
    stats: dict
    reference: dict
    meta: dict

    def cell(self, estimator: str, lag: int, x: float, column: str = "rmse") -> float:
        j = int(np.argmin(np.abs(self.x - x)))
        return float(self.stats[(estimator, lag)][column][j])

    def to_csv(self) -> str:
        lines = ["estimator,lag,x,mean,sd,rmse,rel_eff"]
        for (est, lag), s in self.stats.items():
            for j, x in enumerate(self.x):
                lines.append(f"{est},{lag},{x:.10g},{s['mean'][j]:.17g},{s['sd'][j]:.17g},"
                             f"{s['rmse'][j]:.17g},{s['rel_eff'][j]:.17g}")
        return "\n".join(lines) + "\n"

    def meta_json(self) -> str:
        return json.dumps(self.meta, indent=2, sort_keys=True, default=_json_default)


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


# -- one replication ------------------------------------------------------------


def _replicate(task) -> np.ndarray:
    """Estimates with shape ``(len(qs), len(ss), 3, len(lags), len(grid))``.

    Slices whose threshold is degenerate are NaN.  The estimator axis
    follows ``BENCH_ESTIMATORS``.
    """
    model, seed, n, lags, qs, ss, grid = task
    pad = max(ss) + max(abs(i) for i in lags)
    series = simulate(model.with_seed(seed), n + 2 * pad, padding=pad)
    sets = [IntervalSet.le(x) for x in grid]
    out = np.full((len(qs), len(ss), 3, len(lags), len(grid)), np.nan)
    for a, q in enumerate(qs):
        try:
            u = threshold(series, Quantile(q))
            alpha_hat = hill(series, u)
        except DegenerateThreshold:
            continue
        for c, i in enumerate(lags):
            fwd = _ForwardTerms(series, u, i).evaluate(sets)
            bwd = _BackwardTerms(series, u, i, alpha_hat).evaluate_cdf(grid)
            for b, s in enumerate(ss):
                out[a, b, 0, c] = fwd
                out[a, b, 1, c] = bwd
                out[a, b, 2, c] = _ProjectionTerms(series, u, s, i, alpha_hat).evaluate(sets)
    return out


def _run_replications(cfg: BenchConfig, qs, ss, workers: int | None) -> np.ndarray:
    grid = cfg.grid()
    tasks = [(cfg.model, derive_seed(cfg.master_seed, r), cfg.n, cfg.lags, tuple(qs), tuple(ss), grid)
             for r in range(cfg.replications)]
    workers = 1 if workers is None else max(1, int(workers))
    if workers == 1:
        results = [_replicate(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_replicate, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    return np.stack(results)


def _reference(cfg: BenchConfig, lag: int, q: float) -> np.ndarray:
    seed = derive_seed(cfg.master_seed ^ REFERENCE_STREAM, lag & 0xFFFF_FFFF)
    grid = cfg.grid()
    if cfg.target == "limit":
        if lag < 1:
            raise ReferenceUnavailable(f"no limit reference cdf for lag {lag}; use lags >= 1")
        return mc_true_cdf(cfg.model, lag, grid, cfg.reference_draws, seed).values["reference"]
    return pre_asymptotic_cdf(cfg.model, Quantile(q), lag, grid, cfg.reference_draws,
                              seed).values["reference"]


def _aggregate(cfg: BenchConfig, est: np.ndarray, references: dict, meta: dict) -> BenchReport:
    """``est`` has shape ``(M, 3, len(lags), len(grid))``."""
    grid = cfg.grid()
    ok = ~np.isnan(est).any(axis=(1, 2, 3))
    m_eff = int(ok.sum())
    failures = cfg.replications - m_eff
    meta = dict(meta, replications=cfg.replications, successful=m_eff, failures=failures,
                status=("FAILED" if m_eff == 0 else
                        "WARN" if failures > FAILURE_WARN_FRACTION * cfg.replications else "OK"))
    good = est[ok]
    stats = {}
    with np.errstate(invalid="ignore", divide="ignore"):
        for c, lag in enumerate(cfg.lags):
            ref = references[lag]
            cells = {}
            for e, name in enumerate(BENCH_ESTIMATORS):
                vals = good[:, e, c, :]
                if m_eff == 0:
                    nan = np.full(grid.size, np.nan)
                    cells[name] = {"mean": nan, "sd": nan, "bias": nan, "rmse": nan}
                    continue
                mean = vals.mean(axis=0)
                sd = np.sqrt(np.mean((vals - mean) ** 2, axis=0))
                rmse = np.sqrt(np.mean((vals - ref) ** 2, axis=0))
                cells[name] = {"mean": mean, "sd": sd, "bias": mean - ref, "rmse": rmse}
            base = cells["projection_hat"]["rmse"]
            for name in cfg.estimators:
                s = cells[name]
                s["rel_eff"] = np.ones(grid.size) if name == "projection_hat" else s["rmse"] / base
                stats[(name, lag)] = s
    return BenchReport(grid, stats, dict(references), meta)


def _sweep(cfg: BenchConfig, qs, ss, workers) -> dict:
    start = time.perf_counter()
    est = _run_replications(cfg, qs, ss, workers)
    elapsed = time.perf_counter() - start
    out = {}
    for a, q in enumerate(qs):
        refs = {lag: _reference(cfg, lag, q) for lag in cfg.lags}
        for b, s in enumerate(ss):
            sub = replace(cfg, q=q, s_n=s)
            meta = {"config": sub.echo(), "wall_time_s": elapsed, "workers": workers or 1,
                    "sd_convention": "population"}
            out[(q, s)] = _aggregate(sub, est[:, a, b], refs, meta)
    return out


def run_bench(cfg: BenchConfig, workers: int | None = None) -> BenchReport:
    """Simulate, estimate and aggregate one configuration.

    Raises :class:`AllReplicationsFailed` when no replication has a
    non-degenerate threshold.
    """
    report = _sweep(cfg, [cfg.q], [cfg.s_n], workers)[(cfg.q, cfg.s_n)]
    if report.meta["successful"] == 0:
        raise AllReplicationsFailed(f"all {cfg.replications} replications had a degenerate threshold")
    return report


def sweep_block_length(cfg: BenchConfig, s_grid: Sequence[int], workers: int | None = None) -> dict[int, BenchReport]:
    """One report per block half-width; every ``s`` sees the same series."""
    ss = [check_int(s, "s_n", minimum=0) for s in s_grid]
    res = _sweep(cfg, [cfg.q], ss, workers)
    return {s: res[(cfg.q, s)] for s in ss}


def sweep_threshold(cfg: BenchConfig, q_grid: Sequence[float], workers: int | None = None) -> dict[float, BenchReport]:
    """One report per quantile level; degenerate levels are reported, not raised."""
    qs = [check_probability_level(q) for q in q_grid]
    res = _sweep(cfg, qs, [cfg.s_n], workers)
    return {q: res[(q, cfg.s_n)] for q in qs}


def single_series_sn_plot(series: Series, lags: Sequence[int], s_grid: Sequence[int], x: float,
                          q: float = 0.95) -> dict[int, np.ndarray]:
    """``projection_hat`` of ``(-inf, x]`` on one series for every lag and ``s``.

    Pairs with ``|lag| > s`` are rejected: a plot over ``s`` is only read
    where the lag lies inside the block.
    """
    for i in lags:
        if abs(i) > min(s_grid):
            raise PaddingViolation(f"lag {i} exceeds the block half-width s={min(s_grid)}")
    u = threshold(series, Quantile(q))
    alpha_hat = hill(series, u)
    A = [IntervalSet.le(x)]
    return {i: np.array([_ProjectionTerms(series, u, s, i, alpha_hat).evaluate(A)[0] for s in s_grid])
            for i in lags}


# -- config files -------------------------------------------------------------

_INT_KEYS = {"replications", "n", "s_n", "master_seed", "reference_draws"}


def parse_bench_config(text: str) -> BenchConfig:
    """Read a JSON object or flat ``key=value`` lines into a :class:`BenchConfig`.

    Keys: ``model``, ``burn_in``, ``replications``, ``n``, ``q``, ``s_n``,
    ``lags`` (list or comma separated), ``x_grid`` (``[lo, hi, step]`` or
    ``lo:hi:step``), ``target``, ``master_seed`` (alias ``seed``),
    ``estimators`` and ``reference_draws``.
    """
    stripped = text.strip()
    if stripped.startswith("{"):
        raw = json.loads(stripped)
    else:
        raw = {}
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ValueError(f"line {lineno}: expected key=value")
            raw[key.strip()] = value.strip()
    if "seed" in raw:
        raw.setdefault("master_seed", raw.pop("seed"))
    kwargs = {}
    model_kind = raw.pop("model", "garcht")
    burn_in = raw.pop("burn_in", None)
    kwargs["model"] = ModelSpec(str(model_kind), 0, None if burn_in is None else int(burn_in))
    for key, value in raw.items():
        if key in _INT_KEYS:
            kwargs[key] = int(value)
        elif key == "q":
            kwargs[key] = float(value)
        elif key in ("lags", "estimators"):
            items = value.split(",") if isinstance(value, str) else value
            items = [v.strip() if isinstance(v, str) else v for v in items]
            kwargs[key] = tuple(int(v) for v in items) if key == "lags" else tuple(items)
        elif key == "x_grid":
            parts = value.split(":") if isinstance(value, str) else value
            kwargs[key] = tuple(float(v) for v in parts)
        elif key == "target":
            kwargs[key] = str(value)
        else:
            raise ValueError(f"unknown config key {key!r}")
    return BenchConfig(**kwargs)


__all__ = ["BenchConfig", "BenchReport", "run_bench", "sweep_block_length", "sweep_threshold",
           "single_series_sn_plot", "parse_bench_config", "ESTIMATORS"]
