"""RS-transform of discrete laws and the structural checks built on it."""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from .exceptions import ContractViolation
from .spectral import IntervalSet, Path, SpectralLaw, shift_scale

Functional = Callable[[Path], float]


def rs_weights(path: Path, alpha: float) -> np.ndarray:
    """``|w_j|**alpha / ||w||_alpha**alpha`` for every index of the window."""
    v = np.abs(np.asarray(path.values))
    v = v / v.max()
    w = v**alpha
    return w / w.sum()


def rs_transform(law: SpectralLaw) -> SpectralLaw:
    """Push every atom through all of its shift-and-scale images.

    Each atom ``w`` contributes ``shift_scale(w, j)`` with weight
    ``prob * |w_j|**alpha / ||w||_alpha**alpha`` for each ``j`` where
    ``w_j != 0``; coinciding images are merged.
    """
    out = []
    for path, prob in law:
        weights = rs_weights(path, law.alpha)
        for k, wk in enumerate(weights):
            if wk > 0:
                out.append((shift_scale(path, path.lo + k), prob * wk))
    return SpectralLaw(tuple(out), law.alpha)


def tv_distance(p: SpectralLaw, q: SpectralLaw) -> float:
    """Total variation ``(1/2) sum |p(x) - q(x)|`` over the union of atoms."""
    keys = {path.key(): path for path in p.paths}
    keys.update({path.key(): path for path in q.paths})
    return 0.5 * math.fsum(abs(p.prob_of(path) - q.prob_of(path)) for path in keys.values())


def is_rs_invariant(law: SpectralLaw, tol: float = 1e-10) -> tuple[bool, float]:
    if not tol > 0:
        raise ValueError("tol must be positive")
    tv = tv_distance(law, rs_transform(law))
    return tv <= tol, tv


def projected_marginal_prob(law: SpectralLaw, i: int, A: IntervalSet) -> float:
    """``E[sum_h |T_h|^a / ||T||_a^a * 1_A(T_{h+i} / |T_h|)]``.

    Equals ``marginal_prob(law, i, A)`` whenever ``law`` is RS-invariant.
    """
    total = []
    for path, prob in law:
        weights = rs_weights(path, law.alpha)
        acc = 0.0
        for k, wk in enumerate(weights):
            if wk > 0:
                h = path.lo + k
                if A.contains(path[h + i] / abs(path[h])):
                    acc += wk
        total.append(prob * acc)
    return math.fsum(total)


def time_change_residual(law: SpectralLaw, i: int, f: Functional) -> float:
    """``|E f(shift_i T) - E[f(T / |T_{-i}|) |T_{-i}|^alpha]|`` as exact atom sums.

    ``f`` must vanish on paths whose value at 0 is 0; every such evaluation
    made here is checked and a nonzero value raises
    :class:`ContractViolation`.
    """
    lhs, rhs = [], []
    for path, prob in law:
        moved = path.shifted(i)
        val = f(moved)
        if moved[0] == 0.0 and val != 0:
            raise ContractViolation(f"f({moved!r}) = {val!r} although its value at 0 is 0")
        lhs.append(prob * val)
        pivot = abs(path[-i])
        if pivot == 0.0:
            # zero weight; the rescaled path is undefined and not evaluated
            continue
        scaled = path.scaled(1.0 / pivot)
        val = f(scaled)
        if scaled[0] == 0.0 and val != 0:
            raise ContractViolation(f"f({scaled!r}) = {val!r} although its value at 0 is 0")
        rhs.append(prob * val * pivot**law.alpha)
    return abs(math.fsum(lhs) - math.fsum(rhs))


def indicator_functional(k: int, A: IntervalSet) -> Functional:
    """``w -> 1{w_0 != 0} * 1_A(w_k)``."""

    def f(w: Path) -> float:
        return float(w[0] != 0.0 and bool(A.contains(w[k])))

    f.__name__ = f"ind_w0_w{k}_in_{A}"
    return f


def default_functionals() -> list[Functional]:
    """Twenty indicator functionals used by the time-change checks."""
    sets = [
        IntervalSet.le(-5.0),
        IntervalSet.gt(0.0),
        IntervalSet.le(0.5),
        IntervalSet.gt(1.5),
    ]
    return [indicator_functional(k, A) for k in (-2, -1, 0, 1, 2) for A in sets]


def max_time_change_residual(law: SpectralLaw, lags=range(-3, 4), functionals=None) -> float:
    functionals = default_functionals() if functionals is None else functionals
    return max(time_change_residual(law, i, f) for i in lags for f in functionals)


_DYADIC = np.array([2.0**k / 8 for k in range(7)])


def random_law(rng: np.random.Generator, max_atoms: int = 4, max_len: int = 6,
               alpha_range=(0.5, 4.0)) -> SpectralLaw:
    """Random discrete law with dyadic values and offsets in ``[-3, 3]``.

    Dyadic values keep shift/scale arithmetic exact so merged atoms collide.
    """
    n_atoms = int(rng.integers(1, max_atoms + 1))
    alpha = float(rng.uniform(*alpha_range))
    atoms = []
    for _ in range(n_atoms):
        length = int(rng.integers(1, max_len + 1))
        lo = int(rng.integers(-3, 4))
        vals = rng.choice(_DYADIC, size=length) * rng.choice([-1.0, 1.0], size=length)
        # sprinkle interior zeros
        vals[rng.random(length) < 0.2] = 0.0
        if not vals.any():
            vals[0] = 1.0
        atoms.append((Path.from_window(lo, vals), float(rng.uniform(0.1, 1.0))))
    total = sum(q for _, q in atoms)
    return SpectralLaw(tuple((p, q / total) for p, q in atoms), alpha)
