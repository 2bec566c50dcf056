"""Exact limit variances of the estimators for finitely supported laws.

For a law of the spectral tail process with finitely many atoms of finite
support, every expectation in the limit covariance functions reduces to a
finite sum over atoms and lags.  With

    chi      = sum_j (|T_j|^a  min 1)
    xi(A)    = sum_h |T_h|^a / ||T||_a^a * 1_A(T_{h+i} / |T_h|)
    phi      = sum_k (|T_k|^a min 1) (1/a + log+ |T_k|)

the Gaussian limit ``(Z(A), Z(R), Z_phi)`` has

    Var Z(A) = E[chi xi(A)^2],  Cov(Z(A), Z(R)) = E[chi xi(A)],  Var Z(R) = E[chi],
    Cov(Z(A), Z_phi) = E[xi(A) phi],  Cov(Z(R), Z_phi) = E[phi],
    Var Z_phi = (1/a) E[sum_k (|T_k|^a min 1)(2/a + |log |T_k||)].
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .exceptions import BoundaryAtom, NotASpectralLaw
from .rs import is_rs_invariant, rs_transform
from .spectral import IntervalSet, Path, SpectralLaw, marginal_prob

INVARIANCE_TOL = 1e-8
NEGATIVE_TOL = 1e-12


@dataclass(frozen=True)
class LimitCovariances:
    var_Z_A: float
    cov_Z_A_Z_R: float
    var_Z_R: float
    cov_Z_A_Zphi: float
    cov_Z_R_Zphi: float
    var_Zphi: float
    p_A: float
    d_A: float

    def matrix(self) -> np.ndarray:
        """Covariance matrix of ``(Z(A), Z(R), Z_phi)``."""
        return np.array([
            [self.var_Z_A, self.cov_Z_A_Z_R, self.cov_Z_A_Zphi],
            [self.cov_Z_A_Z_R, self.var_Z_R, self.cov_Z_R_Zphi],
            [self.cov_Z_A_Zphi, self.cov_Z_R_Zphi, self.var_Zphi],
        ])

    def quadratic_form(self, coef) -> float:
        c = np.asarray(coef, dtype=float)
        return float(c @ self.matrix() @ c)


class _Atom:
    """Dense view of one atom with the per-lag quantities the sums need."""

    def __init__(self, path: Path, alpha: float, reach: int):
        self.path = path
        self.alpha = alpha
        self.lo, self.hi = path.lo, path.hi
        # dense window wide enough that every lookup T_{t +- i} is in range
        self.off = self.lo - reach
        self.vals = path.as_array(self.off, self.hi + reach)
        support = np.arange(self.lo, self.hi + 1)
        v = np.abs(np.asarray(path.values))
        self.support = support[v > 0]
        a = np.abs(self.at(self.support))
        self.abs = a
        self.pow = a**alpha
        self.w = self.pow / self.pow.sum()
        self.clip = np.minimum(self.pow, 1.0)
        self.log = np.log(a)

    def at(self, t):
        return self.vals[np.asarray(t) - self.off]

    def xi(self, i: int, A: IntervalSet) -> float:
        ratios = self.at(self.support + i) / self.abs
        return float(np.sum(self.w * A.contains(ratios)))

    def chi(self) -> float:
        return float(np.sum(self.clip))

    def phi(self) -> float:
        return float(np.sum(self.clip * (1.0 / self.alpha + np.maximum(self.log, 0.0))))

    def phi2(self) -> float:
        return float(np.sum(self.clip * (2.0 / self.alpha + np.abs(self.log)))) / self.alpha

    def d_term(self, i: int, A: IntervalSet) -> float:
        if not A.contains(self.path[i]):
            return 0.0
        return -float(np.sum(self.w * self.log))

    def forward_term(self, i: int, A: IntervalSet, p_A: float) -> float:
        ratios = self.at(self.support + i) / self.abs
        left = p_A - A.contains(ratios)
        right = p_A - float(A.contains(self.path[i]))
        return float(np.sum(self.clip * left)) * right

    def backward_anchor(self, i: int, A: IntervalSet) -> float:
        """``|T_{-i}|^a 1_A(T_0 / |T_{-i}|)`` (0 when ``T_{-i} = 0``)."""
        prev = abs(self.path[-i])
        if prev == 0.0:
            return 0.0
        return prev**self.alpha * float(A.contains(self.path[0] / prev))

    def backward_sum(self, i: int, A: IntervalSet) -> float:
        """``sum_j (|T_j|^a min 1) |T_{j-i}|^a / |T_j|^a 1_A(T_j / |T_{j-i}|)``."""
        prev = np.abs(self.at(self.support - i))
        live = prev > 0
        if not live.any():
            return 0.0
        cur = self.at(self.support)[live]
        ratio_ok = A.contains(cur / prev[live])
        terms = self.clip[live] * prev[live] ** self.alpha / self.pow[live] * ratio_ok
        return float(np.sum(terms))


def _atoms(law: SpectralLaw, i: int) -> list[tuple[_Atom, float]]:
    reach = abs(i) + 1
    return [(_Atom(p, law.alpha, reach), q) for p, q in law]


def _expect(atoms, fn) -> float:
    return math.fsum(q * fn(a) for a, q in atoms)


def _check_law(law: SpectralLaw) -> None:
    ok, tv = is_rs_invariant(law, INVARIANCE_TOL)
    if not ok:
        raise NotASpectralLaw(f"law is not RS-invariant (TV distance {tv:.3g})")


def _check_boundary(law: SpectralLaw, i: int, A: IntervalSet) -> None:
    if A.kind not in ("le", "gt") or A.x == 0.0:
        return
    for path, _ in law:
        v = path[i]
        if v != 0.0 and abs(v - A.x) <= 1e-12 * max(1.0, abs(v)):
            raise BoundaryAtom(f"P{{Theta_{i} = {A.x:g}}} > 0; the boundary of {A} carries mass")


def _clamp(v: float, what: str) -> float:
    if -NEGATIVE_TOL < v < 0.0:
        warnings.warn(f"{what} = {v:.3g} clamped to 0", RuntimeWarning, stacklevel=3)
        return 0.0
    return v


def limit_covariances(law: SpectralLaw, i: int, A: IntervalSet, check: bool = True) -> LimitCovariances:
    """All entries of the limit covariance of ``(Z(A), Z(R), Z_phi)`` plus ``p_A`` and ``d_A``."""
    if check:
        _check_law(law)
        _check_boundary(law, i, A)
    atoms = _atoms(law, i)
    return LimitCovariances(
        var_Z_A=_expect(atoms, lambda a: a.chi() * a.xi(i, A) ** 2),
        cov_Z_A_Z_R=_expect(atoms, lambda a: a.chi() * a.xi(i, A)),
        var_Z_R=_expect(atoms, lambda a: a.chi()),
        cov_Z_A_Zphi=_expect(atoms, lambda a: a.xi(i, A) * a.phi()),
        cov_Z_R_Zphi=_expect(atoms, lambda a: a.phi()),
        var_Zphi=_expect(atoms, lambda a: a.phi2()),
        p_A=marginal_prob(law, i, A),
        d_A=_expect(atoms, lambda a: a.d_term(i, A)),
    )


def projection_hat_coefficients(cov: LimitCovariances, alpha: float) -> tuple[float, float, float]:
    """Weights of ``Z(A) - (p_A - a d_A) Z(R) - a^2 d_A Z_phi``."""
    return 1.0, -(cov.p_A - alpha * cov.d_A), -(alpha**2) * cov.d_A


def var_projection_hat(law: SpectralLaw, i: int, A: IntervalSet) -> float:
    """Limit variance of the projection estimator with Hill-estimated alpha."""
    cov = limit_covariances(law, i, A)
    return _clamp(cov.quadratic_form(projection_hat_coefficients(cov, law.alpha)), "var_projection_hat")


def var_projection_known(law: SpectralLaw, i: int, A: IntervalSet) -> float:
    """Limit variance ``Var(Z(A) - p_A Z(R))`` with known alpha."""
    cov = limit_covariances(law, i, A)
    return _clamp(cov.quadratic_form((1.0, -cov.p_A, 0.0)), "var_projection_known")


def var_forward(law: SpectralLaw, i: int, A: IntervalSet) -> float:
    """``sum_j E[(|T_j|^a min 1)(p_A - 1_A(T_{j+i}/|T_j|))(p_A - 1_A(T_i))]``."""
    _check_law(law)
    _check_boundary(law, i, A)
    p_A = marginal_prob(law, i, A)
    atoms = _atoms(law, i)
    return _clamp(_expect(atoms, lambda a: a.forward_term(i, A, p_A)), "var_forward")


@dataclass(frozen=True)
class BackwardCovariances:
    """Covariances of ``(Ztilde(A), Z(R), Z_phi)`` and ``L = E[log|T_i| 1_A(T_i)]``."""

    var_Zt: float
    cov_Zt_Z_R: float
    cov_Zt_Zphi: float
    var_Z_R: float
    cov_Z_R_Zphi: float
    var_Zphi: float
    p_A: float
    log_moment: float

    def matrix(self) -> np.ndarray:
        return np.array([
            [self.var_Zt, self.cov_Zt_Z_R, self.cov_Zt_Zphi],
            [self.cov_Zt_Z_R, self.var_Z_R, self.cov_Z_R_Zphi],
            [self.cov_Zt_Zphi, self.cov_Z_R_Zphi, self.var_Zphi],
        ])


def backward_covariances(law: SpectralLaw, i: int, A: IntervalSet, check: bool = True) -> BackwardCovariances:
    if check:
        _check_law(law)
        _check_boundary(law, i, A)
    if A.contains(0.0) and any(p[i] == 0.0 for p in law.paths):
        raise ValueError("E[log|Theta_i| 1_A(Theta_i)] diverges: 0 is in A and P{Theta_i = 0} > 0")
    atoms = _atoms(law, i)
    log_moment = math.fsum(q * math.log(abs(p[i])) for p, q in law if A.contains(p[i]))
    return BackwardCovariances(
        var_Zt=_expect(atoms, lambda a: a.backward_sum(i, A) * a.backward_anchor(i, A)),
        cov_Zt_Z_R=_expect(atoms, lambda a: a.chi() * a.backward_anchor(i, A)),
        cov_Zt_Zphi=_expect(atoms, lambda a: a.phi() * a.backward_anchor(i, A)),
        var_Z_R=_expect(atoms, lambda a: a.chi()),
        cov_Z_R_Zphi=_expect(atoms, lambda a: a.phi()),
        var_Zphi=_expect(atoms, lambda a: a.phi2()),
        p_A=marginal_prob(law, i, A),
        log_moment=log_moment,
    )


def backward_coefficients(cov: BackwardCovariances, alpha: float) -> tuple[float, float, float]:
    """Weights of ``Zt(A) - p_A Z(R) + (a^2 Z_phi - a Z(R)) L``."""
    L = cov.log_moment
    return 1.0, -(cov.p_A + alpha * L), alpha**2 * L


def var_backward(law: SpectralLaw, i: int, A: IntervalSet) -> float:
    """Limit variance of the backward estimator (Hill-estimated alpha)."""
    cov = backward_covariances(law, i, A)
    c = np.asarray(backward_coefficients(cov, law.alpha))
    return _clamp(float(c @ cov.matrix() @ c), "var_backward")


def example_law(p: float, a: float, b: float) -> SpectralLaw:
    """RS-transform (alpha = 1) of the two-shape law.

    With probability ``p`` the shape is ``(1/a, -1)`` at lags (0, 1),
    otherwise ``(1, 1/b)``.
    """
    if not (a > 1 and b > 1 and 0.0 <= p <= 1.0):
        raise ValueError("need a > 1, b > 1 and p in [0, 1]")
    shapes = ((Path(0, (1.0 / a, -1.0)), p), (Path(0, (1.0, 1.0 / b)), 1.0 - p))
    return rs_transform(SpectralLaw(shapes, 1.0))


def variance_table(law: SpectralLaw, i: int, A: IntervalSet) -> dict[str, float]:
    """All four limit variances for one law, lag and set."""
    return {
        "var_proj_hat": var_projection_hat(law, i, A),
        "var_backward": var_backward(law, i, A),
        "var_forward": var_forward(law, i, A),
        "var_proj_known": var_projection_known(law, i, A),
    }


__all__ = [
    "LimitCovariances", "BackwardCovariances", "limit_covariances", "backward_covariances",
    "var_projection_hat", "var_projection_known", "var_forward", "var_backward",
    "example_law", "variance_table", "projection_hat_coefficients", "backward_coefficients",
]
