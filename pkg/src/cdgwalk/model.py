"""Domain types and total-variation metrics for the doubling walk
X_{n+1} = 2 X_n + b_n (mod p) with steps b_n in {-1, 0, +1}.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from ._backend import kernels

SUM_TOL = 1e-9
SNAP_TOL = 1e-12
NEG_TOL = 1e-15

_SNAP_POINTS = (Fraction(0), Fraction(1, 4), Fraction(1, 3), Fraction(1, 2))


class CDGError(ValueError):
    """Base class for invalid inputs to the library."""


class ModulusMismatchError(CDGError):
    pass


def _snap(x: float) -> float:
    for q in _SNAP_POINTS:
        if abs(x - float(q)) <= SNAP_TOL:
            return float(q)
    return x


@dataclass(frozen=True)
class StepDistribution:
    """Probabilities of the steps +1 (a), 0 (b) and -1 (c).

    Construct through :func:`validate_step` or :meth:`symmetric`; the
    constructor itself validates too, so every instance is well formed.
    """

    a: float
    b: float
    c: float

    def __post_init__(self):
        vals = (self.a, self.b, self.c)
        for name, v in zip("abc", vals):
            if not np.isfinite(v) or v < 0.0 or v > 1.0:
                raise CDGError(f"step probability {name}={v!r} outside [0, 1]")
            if v >= 1.0:
                raise CDGError(f"step probability {name} must be < 1")
        if abs(sum(vals) - 1.0) > SUM_TOL:
            raise CDGError(f"step probabilities sum to {sum(vals)!r}, not 1")

    @classmethod
    def symmetric(cls, beta: float) -> "StepDistribution":
        """The one-parameter family (beta, 1 - 2 beta, beta)."""
        return validate_step(beta, 1.0 - 2.0 * beta, beta)

    def is_case1(self) -> bool:
        return (self.b == 0.0 and self.a == 0.5 and self.c == 0.5) or self.b == 0.5

    @property
    def probs(self) -> tuple[float, float, float]:
        return (self.a, self.b, self.c)


def validate_step(a: float, b: float, c: float) -> StepDistribution:
    vals = []
    for name, v in zip("abc", (a, b, c)):
        v = float(v)
        if not np.isfinite(v):
            raise CDGError(f"step probability {name}={v!r} is not finite")
        vals.append(_snap(v))
    return StepDistribution(*vals)


@dataclass(frozen=True)
class ModulusSpec:
    p: int
    mersenne_t: Optional[int] = None

    def __post_init__(self):
        if not isinstance(self.p, (int, np.integer)) or isinstance(self.p, bool):
            raise CDGError(f"modulus must be an integer, got {self.p!r}")
        if self.p < 3 or self.p % 2 == 0:
            raise CDGError(f"modulus must be odd and >= 3, got {self.p}")
        if self.mersenne_t is not None:
            if self.mersenne_t < 2 or (1 << self.mersenne_t) - 1 != self.p:
                raise CDGError(f"p={self.p} is not 2^{self.mersenne_t} - 1")

    @classmethod
    def mersenne(cls, t: int) -> "ModulusSpec":
        if t < 2:
            raise CDGError("Mersenne exponent t must be >= 2")
        return cls((1 << t) - 1, t)

    @classmethod
    def of(cls, p: int) -> "ModulusSpec":
        """Build a spec for p, recording the Mersenne exponent when p = 2^t - 1."""
        p = int(p)
        t = (p + 1).bit_length() - 1
        if t >= 2 and (1 << t) - 1 == p:
            return cls(p, t)
        return cls(p)

    @property
    def inv2(self) -> int:
        return (self.p + 1) // 2


@dataclass(frozen=True, eq=False)
class DistVector:
    """Dense law of a random element of Z/pZ, ``mass[s] = Pr(X = s)``."""

    modulus: ModulusSpec
    mass: np.ndarray = field(repr=False)

    def __post_init__(self):
        m = np.ascontiguousarray(self.mass, dtype=np.float64)
        if m.ndim != 1 or m.shape[0] != self.modulus.p:
            raise CDGError(f"mass must have length p={self.modulus.p}")
        if not np.all(np.isfinite(m)):
            raise CDGError("mass contains non-finite entries")
        if m.min() < -NEG_TOL:
            raise CDGError(f"negative mass {m.min()!r}")
        total = kernels.pairwise_sum(m)
        if abs(total - 1.0) > SUM_TOL:
            raise CDGError(f"mass sums to {total!r}, not 1")
        m = np.maximum(m, 0.0)
        m.flags.writeable = False
        object.__setattr__(self, "mass", m)

    @property
    def p(self) -> int:
        return self.modulus.p

    @classmethod
    def point_mass(cls, modulus: ModulusSpec, s: int = 0) -> "DistVector":
        m = np.zeros(modulus.p)
        m[s % modulus.p] = 1.0
        return cls(modulus, m)

    @classmethod
    def uniform(cls, modulus: ModulusSpec) -> "DistVector":
        return cls(modulus, np.full(modulus.p, 1.0 / modulus.p))

    def total(self) -> float:
        return kernels.pairwise_sum(self.mass)

    def renormalized(self) -> "DistVector":
        return DistVector(self.modulus, self.mass / self.total())


@dataclass(frozen=True)
class TvCurve:
    step: StepDistribution
    modulus: ModulusSpec
    points: tuple[tuple[int, float], ...]

    @property
    def n(self) -> list[int]:
        return [n for n, _ in self.points]

    @property
    def tv(self) -> list[float]:
        return [v for _, v in self.points]


def tv_to_uniform(P: DistVector) -> float:
    """Half-sum form (1/2) sum_s |P(s) - 1/p|."""
    return kernels.tv_uniform(P.mass)


def tv_between(P: DistVector, Q: DistVector) -> float:
    if P.modulus.p != Q.modulus.p:
        raise ModulusMismatchError(f"moduli differ: {P.p} vs {Q.p}")
    return kernels.tv_pair(P.mass, Q.mass)


# Alternative forms of the distance, kept as small-p oracles.

def tv_max_over_subsets(mass: Sequence[float]) -> float:
    """max_A |P(A) - U(A)|, via the greedy set of states sorted by excess."""
    m = np.asarray(mass, dtype=np.float64)
    excess = np.sort(m - 1.0 / m.shape[0])[::-1]
    best = 0.0
    run = 0.0
    for e in excess:
        run += e
        best = max(best, abs(run))
    return best


def tv_positive_part(mass: Sequence[float]) -> float:
    m = np.asarray(mass, dtype=np.float64)
    u = 1.0 / m.shape[0]
    return float(sum(x - u for x in m if x > u))
