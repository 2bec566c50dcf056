"""Finite-support paths, discrete spectral laws and interval sets.

A :class:`Path` is a real sequence indexed by the integers that vanishes
outside a finite window ``[lo, hi]`` containing 0.  A :class:`SpectralLaw`
is a finitely supported probability distribution over paths together with
the tail index ``alpha`` used by every alpha-norm computation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import IO, Iterable, Iterator, Sequence

import numpy as np

from .exceptions import InvalidLaw, InvalidPath, ZeroPivot

PROB_TOL = 1e-12
RENORMALIZE_TOL = 1e-9


def _snap(v: float) -> float:
    # 14 significant digits: shift/scale images of the same atom must collide
    return float(f"{v:.13e}") + 0.0


@dataclass(frozen=True)
class Path:
    """Real sequence ``values[k]`` at time ``lo + k``, zero elsewhere.

    Leading and trailing zeros are trimmed on construction, except that the
    window always keeps index 0.  Two paths are therefore equal iff their
    ``lo`` and ``values`` agree.
    """

    lo: int
    values: tuple[float, ...]

    def __post_init__(self):
        vals = [float(v) + 0.0 for v in self.values]
        lo = int(self.lo)
        if not vals:
            raise InvalidPath("a path needs at least one value")
        if lo > 0 or lo + len(vals) - 1 < 0:
            raise InvalidPath(f"window [{lo}, {lo + len(vals) - 1}] does not contain 0")
        if not all(math.isfinite(v) for v in vals):
            raise InvalidPath("path values must be finite")
        if not any(vals):
            raise InvalidPath("the zero path is not allowed")
        while lo < 0 and vals[0] == 0.0:
            vals.pop(0)
            lo += 1
        while lo + len(vals) - 1 > 0 and vals[-1] == 0.0:
            vals.pop()
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "values", tuple(vals))

    @classmethod
    def from_window(cls, lo: int, values: Sequence[float]) -> "Path":
        """Build a path from an arbitrary window, padding it to reach index 0."""
        vals = list(values)
        hi = lo + len(vals) - 1
        if lo > 0:
            vals = [0.0] * lo + vals
            lo = 0
        if hi < 0:
            vals = vals + [0.0] * (-hi)
        return cls(lo, tuple(vals))

    @property
    def hi(self) -> int:
        return self.lo + len(self.values) - 1

    def __getitem__(self, t: int) -> float:
        if self.lo <= t <= self.hi:
            return self.values[t - self.lo]
        return 0.0

    def __len__(self) -> int:
        return len(self.values)

    def as_array(self, lo: int, hi: int) -> np.ndarray:
        """Dense values on ``[lo, hi]``, zero-filled outside the support."""
        out = np.zeros(hi - lo + 1)
        a, b = max(lo, self.lo), min(hi, self.hi)
        if a <= b:
            out[a - lo : b - lo + 1] = self.values[a - self.lo : b - self.lo + 1]
        return out

    def scaled(self, c: float) -> "Path":
        return Path(self.lo, tuple(c * v for v in self.values))

    def shifted(self, j: int) -> "Path":
        """The path ``t -> self[t + j]`` (no rescaling)."""
        return Path.from_window(self.lo - j, self.values)

    def key(self) -> tuple:
        """Hashable identity used to merge numerically equal atoms."""
        return (self.lo, tuple(_snap(v) for v in self.values))

    def __repr__(self) -> str:
        vals = ", ".join(f"{v:g}" for v in self.values)
        return f"Path{{{self.lo}:[{vals}]}}"


def alpha_norm(p: Path, alpha: float) -> float:
    """``(sum_t |p_t|**alpha) ** (1/alpha)``."""
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    v = np.abs(np.asarray(p.values))
    v = v[v > 0]
    # factor out the sup-norm so large alpha does not overflow
    m = v.max()
    return float(m * np.sum((v / m) ** alpha) ** (1.0 / alpha))


def shift_scale(p: Path, j: int) -> Path:
    """Shift so that index ``j`` becomes 0 and divide by ``|p[j]|``."""
    pivot = abs(p[j])
    if pivot == 0.0:
        raise ZeroPivot(f"path vanishes at index {j}")
    return Path.from_window(p.lo - j, [v / pivot for v in p.values])


@dataclass(frozen=True)
class IntervalSet:
    """One of ``(-inf, x]``, ``(x, inf)``, the real line, or the empty set."""

    kind: str
    x: float = 0.0

    KINDS = ("le", "gt", "all", "empty")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown interval kind {self.kind!r}")
        object.__setattr__(self, "x", float(self.x))

    @classmethod
    def le(cls, x: float) -> "IntervalSet":
        return cls("le", x)

    @classmethod
    def gt(cls, x: float) -> "IntervalSet":
        return cls("gt", x)

    @classmethod
    def all(cls) -> "IntervalSet":
        return cls("all")

    @classmethod
    def empty(cls) -> "IntervalSet":
        return cls("empty")

    @classmethod
    def parse(cls, text: str) -> "IntervalSet":
        """Parse ``le:<x>``, ``gt:<x>``, ``all`` or ``empty``."""
        text = text.strip().lower()
        if text in ("all", "empty"):
            return cls(text)
        kind, sep, x = text.partition(":")
        if not sep or kind not in ("le", "gt"):
            raise ValueError(f"cannot parse set {text!r}; expected le:<x>, gt:<x> or all")
        return cls(kind, float(x))

    def contains(self, v):
        """Membership test; works elementwise on arrays."""
        if self.kind == "le":
            return np.less_equal(v, self.x)
        if self.kind == "gt":
            return np.greater(v, self.x)
        full = self.kind == "all"
        if np.ndim(v) == 0:
            return full
        return np.full(np.shape(v), full)

    __contains__ = contains

    def __str__(self) -> str:
        if self.kind in ("le", "gt"):
            return f"{self.kind}:{self.x:g}"
        return self.kind


@dataclass(frozen=True)
class SpectralLaw:
    """Discrete law on paths with tail index ``alpha``.

    Atoms that coincide after :meth:`Path.key` snapping are merged and zero
    probabilities are dropped.  Probabilities summing to 1 within ``1e-9``
    (but not within ``1e-12``) are renormalized; anything further off is
    rejected.
    """

    atoms: tuple[tuple[Path, float], ...]
    alpha: float
    _index: dict = field(default=None, repr=False, compare=False, hash=False)

    def __post_init__(self):
        alpha = float(self.alpha)
        if not (alpha > 0 and math.isfinite(alpha)):
            raise InvalidLaw("alpha must be a positive finite number")
        merged: dict[tuple, list] = {}
        for path, prob in self.atoms:
            if not isinstance(path, Path):
                path = Path(*path)
            prob = float(prob)
            if not (prob >= 0 and math.isfinite(prob)):
                raise InvalidLaw(f"invalid probability {prob!r}")
            if prob == 0.0:
                continue
            k = path.key()
            if k in merged:
                merged[k][1] += prob
            else:
                merged[k] = [path, prob]
        if not merged:
            raise InvalidLaw("a law needs at least one atom of positive probability")
        total = math.fsum(p for _, p in merged.values())
        if abs(total - 1.0) > RENORMALIZE_TOL:
            raise InvalidLaw(f"probabilities sum to {total!r}, not 1")
        # sums already within PROB_TOL are kept bit for bit (serialization round trips)
        scale = 1.0 if abs(total - 1.0) <= PROB_TOL else total
        atoms = tuple((path, p / scale) for path, p in merged.values())
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "_index", {path.key(): i for i, (path, _) in enumerate(atoms)})

    @classmethod
    def point_mass(cls, path: Path, alpha: float) -> "SpectralLaw":
        return cls(((path, 1.0),), alpha)

    def __iter__(self) -> Iterator[tuple[Path, float]]:
        return iter(self.atoms)

    def __len__(self) -> int:
        return len(self.atoms)

    @property
    def paths(self) -> list[Path]:
        return [p for p, _ in self.atoms]

    @property
    def probs(self) -> np.ndarray:
        return np.array([q for _, q in self.atoms])

    def prob_of(self, path: Path) -> float:
        i = self._index.get(path.key())
        return 0.0 if i is None else self.atoms[i][1]

    def bounds(self) -> tuple[int, int]:
        """Smallest window containing every atom's support."""
        return min(p.lo for p, _ in self.atoms), max(p.hi for p, _ in self.atoms)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Indices into :attr:`atoms` drawn with the atom probabilities."""
        return rng.choice(len(self.atoms), size=size, p=self.probs)


def marginal_prob(law: SpectralLaw, i: int, A: IntervalSet) -> float:
    """``P{path value at i in A}`` under ``law``; exactly 1 for the whole line."""
    if A.kind == "all":
        return 1.0
    return math.fsum(q for p, q in law if A.contains(p[i]))


# -- text serialization -------------------------------------------------------


def format_law(law: SpectralLaw) -> str:
    lines = [f"alpha={law.alpha:.17g}"]
    for path, prob in law:
        vals = " ".join(f"{v:.17g}" for v in path.values)
        lines.append(f"{prob:.17g} {path.lo} {vals}")
    return "\n".join(lines) + "\n"


def parse_law(text: str) -> SpectralLaw:
    """Inverse of :func:`format_law`; blank lines and ``#`` comments are skipped."""
    alpha = None
    atoms = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("alpha="):
            alpha = float(line.partition("=")[2])
            continue
        fields = line.split()
        if len(fields) < 3:
            raise InvalidLaw(f"line {lineno}: expected 'prob lo v_lo ... v_hi'")
        try:
            atoms.append((Path.from_window(int(fields[1]), [float(v) for v in fields[2:]]),
                          float(fields[0])))
        except ValueError as exc:
            raise InvalidLaw(f"line {lineno}: {exc}") from exc
    if alpha is None:
        raise InvalidLaw("missing 'alpha=<value>' header")
    return SpectralLaw(tuple(atoms), alpha)


def dump_law(law: SpectralLaw, fh: IO[str]) -> None:
    fh.write(format_law(law))


def load_law(fh: IO[str]) -> SpectralLaw:
    return parse_law(fh.read())


def law_from_pairs(pairs: Iterable[tuple[Path, float]], alpha: float) -> SpectralLaw:
    return SpectralLaw(tuple(pairs), alpha)
