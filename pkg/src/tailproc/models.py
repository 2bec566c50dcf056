"""Simulators for the GARCHt, SRE and SV models and their tail processes.

Default parameters:

* ``garcht``: ``X_t = sigma_t eps_t``, ``sigma_t^2 = 0.1 + 0.14 X_{t-1}^2 +
  0.84 sigma_{t-1}^2``, ``eps_t`` Student t_4 scaled to unit variance;
  tail index 2.6.
* ``sre``: ``X_t = C_t X_{t-1} + D_t`` with independent
  ``C_t ~ N(1/3, 8/9)`` and ``D_t ~ N(-10, 1)``; tail index 2.
* ``sv``: ``X_t = sigma_t eps_t``, ``log sigma_t = 0.9 log sigma_{t-1} + Z_t``
  with standard normal ``Z_t`` and Student t_2.6 ``eps_t``; tail index 2.6.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import lfilter

from .estimators import CdfReport, Quantile, Series
from .exceptions import TooFewExceedances
from .rng import RandomStream, t_quantile_spline
from .validation import check_grid, check_int

DEFAULT_PARAMS = {
    "garcht": {"omega": 0.1, "a": 0.14, "b": 0.84, "df": 4.0, "alpha": 2.6},
    "sre": {"c_mean": 1 / 3, "c_var": 8 / 9, "d_mean": -10.0, "d_var": 1.0, "alpha": 2.0},
    "sv": {"phi": 0.9, "z_sd": 1.0, "df": 2.6, "alpha": 2.6},
}

DEFAULT_BURN_IN = {"garcht": 1000, "sre": 200, "sv": 1000}


@dataclass(frozen=True)
class ModelSpec:
    """Model kind, parameter overrides, seed and burn-in length."""

    kind: str
    seed: int = 0
    burn_in: int | None = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        kind = self.kind.lower()
        if kind not in DEFAULT_PARAMS:
            raise ValueError(f"unknown model {self.kind!r}; choose from {sorted(DEFAULT_PARAMS)}")
        unknown = set(self.params) - set(DEFAULT_PARAMS[kind])
        if unknown:
            raise ValueError(f"unknown parameters for {kind}: {sorted(unknown)}")
        burn = DEFAULT_BURN_IN[kind] if self.burn_in is None else check_int(self.burn_in, "burn_in", 0)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "burn_in", burn)
        object.__setattr__(self, "params", {**DEFAULT_PARAMS[kind], **self.params})

    @property
    def alpha(self) -> float:
        return self.params["alpha"]

    def with_seed(self, seed: int) -> "ModelSpec":
        return ModelSpec(self.kind, seed, self.burn_in, dict(self.params))


# -- path simulation ----------------------------------------------------------


def _garch_path(p, stream: RandomStream, total: int) -> np.ndarray:
    eps = stream.student_t(p["df"], total) * math.sqrt((p["df"] - 2) / p["df"])
    omega, a, b = p["omega"], p["a"], p["b"]
    sigma2 = omega / (1.0 - a - b)
    out = np.empty(total)
    for t, e in enumerate(eps.tolist()):
        x = math.sqrt(sigma2) * e
        out[t] = x
        sigma2 = omega + a * x * x + b * sigma2
    return out


def _sre_path(p, stream: RandomStream, total: int) -> np.ndarray:
    z = stream.normal((total, 2))
    c = p["c_mean"] + math.sqrt(p["c_var"]) * z[:, 0]
    d = p["d_mean"] + math.sqrt(p["d_var"]) * z[:, 1]
    mean_c = p["c_mean"]
    x = p["d_mean"] / (1.0 - mean_c) if mean_c != 1.0 else 0.0
    out = np.empty(total)
    for t, (ct, dt) in enumerate(zip(c.tolist(), d.tolist())):
        x = ct * x + dt
        out[t] = x
    return out


def _sv_path(p, stream: RandomStream, total: int) -> np.ndarray:
    u = stream.uniform((total, 3))
    z = np.sqrt(-2.0 * np.log(u[:, 0])) * np.cos(2.0 * np.pi * u[:, 1]) * p["z_sd"]
    eps = t_quantile_spline(p["df"])(u[:, 2])
    # log sigma_0 = 0
    log_sigma = lfilter([1.0], [1.0, -p["phi"]], z)
    return np.exp(log_sigma) * eps


_SIMULATORS = {"garcht": _garch_path, "sre": _sre_path, "sv": _sv_path}


def simulate_values(spec: ModelSpec, length: int) -> np.ndarray:
    """``length`` observations after discarding ``spec.burn_in`` steps."""
    length = check_int(length, "length", minimum=1)
    stream = RandomStream(spec.seed)
    path = _SIMULATORS[spec.kind](spec.params, stream, spec.burn_in + length)
    return path[spec.burn_in:]


def simulate(spec: ModelSpec, length: int, padding: int = 0) -> Series:
    """Simulate ``length`` values; the outer ``padding`` on each side is not core."""
    padding = check_int(padding, "padding", minimum=0)
    if length <= 2 * padding:
        raise ValueError("length must exceed twice the padding")
    return Series.padded(simulate_values(spec, length), padding)


# -- forward spectral tail process --------------------------------------------


def sample_tail_theta(spec: ModelSpec, horizon: int, count: int, seed: int | None = None) -> np.ndarray:
    """``count`` independent draws of ``(Theta_0, ..., Theta_horizon)``.

    Returns an array of shape ``(count, horizon + 1)``; column ``t`` holds
    ``Theta_t``.
    """
    horizon = check_int(horizon, "horizon", minimum=1)
    count = check_int(count, "count", minimum=1)
    stream = RandomStream(spec.seed if seed is None else seed)
    p = spec.params
    if spec.kind == "garcht":
        scale = math.sqrt((p["df"] - 2) / p["df"])
        eps0 = stream.tilted_student_t(p["df"], p["alpha"], count) * scale
        eps = stream.student_t(p["df"], (count, horizon)) * scale
        prev = np.concatenate([eps0[:, None], eps[:, :-1]], axis=1)
        growth = np.cumprod(np.sqrt(p["a"] * prev**2 + p["b"]), axis=1)
        theta = np.empty((count, horizon + 1))
        theta[:, 0] = np.sign(eps0)
        theta[:, 1:] = eps / np.abs(eps0)[:, None] * growth
        return theta
    sign = stream.choice_sign(count)
    theta = np.zeros((count, horizon + 1))
    theta[:, 0] = sign
    if spec.kind == "sre":
        c = p["c_mean"] + math.sqrt(p["c_var"]) * stream.normal((count, horizon))
        theta[:, 1:] = sign[:, None] * np.cumprod(c, axis=1)
    return theta


def _empirical_cdf(sample: np.ndarray, grid: np.ndarray) -> np.ndarray:
    s = np.sort(sample)
    return np.searchsorted(s, grid, side="right") / s.size


def mc_true_cdf(spec: ModelSpec, i: int, x_grid, count: int = 1_000_000,
                seed: int | None = None) -> CdfReport:
    """Monte Carlo cdf of ``Theta_i`` (``i >= 1``) on ``x_grid``."""
    i = check_int(i, "i", minimum=1)
    grid = check_grid(x_grid)
    theta = sample_tail_theta(spec, i, count, seed)
    cdf = _empirical_cdf(theta[:, i], grid)
    return CdfReport(grid, {"reference": cdf},
                     {"model": spec.kind, "lag": i, "draws": count,
                      "seed": spec.seed if seed is None else seed})


def pre_asymptotic_cdf(spec: ModelSpec, u, i: int, x_grid, count: int = 1_000_000,
                       seed: int | None = None) -> CdfReport:
    """``P(X_i / |X_0| <= x | |X_0| > u)`` from one long stationary path.

    ``u`` is a number or a :class:`Quantile` of ``|X_0|`` (taken from the
    same simulated path).  The pairs ``(X_t, X_{t+i})`` for ``t < count``
    are used; ``meta["events"]`` records how many satisfy ``|X_t| > u``.
    """
    i = check_int(i, "i")
    grid = check_grid(x_grid)
    s = spec if seed is None else spec.with_seed(seed)
    x = simulate_values(s, count + abs(i))
    x0 = x[max(-i, 0):max(-i, 0) + count]
    xi = x[max(i, 0):max(i, 0) + count]
    a0 = np.abs(x0)
    if isinstance(u, Quantile):
        k = min(max(math.ceil(round(u.q * count, 9)), 1), count)
        u = float(np.partition(a0, k - 1)[k - 1])
    u = float(u)
    mask = a0 > u
    events = int(mask.sum())
    if events < 10:
        raise TooFewExceedances(f"only {events} pairs with |X_0| > {u!r}")
    cdf = _empirical_cdf(xi[mask] / a0[mask], grid)
    return CdfReport(grid, {"reference": cdf},
                     {"model": spec.kind, "lag": i, "u": u, "events": events,
                      "pairs": count, "seed": s.seed})
