"""Exact evolution of the law of X_n, TV curves and mixing times."""

from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Optional

import numpy as np

from ._backend import kernels
from .model import (
    CDGError,
    DistVector,
    ModulusSpec,
    StepDistribution,
    TvCurve,
    tv_to_uniform,
    validate_step,
)

DEFAULT_BUDGET = 2**34


class BudgetExceededError(CDGError):
    """The requested p*n exceeds the exact-evolution budget."""


def compute_budget(override: Optional[int] = None) -> int:
    if override is not None:
        return int(override)
    env = os.environ.get("CDG_BUDGET")
    if env:
        return int(float(env))
    return DEFAULT_BUDGET


def _check_budget(p: int, n: int, budget: Optional[int]) -> None:
    limit = compute_budget(budget)
    if p * n > limit:
        raise BudgetExceededError(
            f"p*n = {p}*{n} exceeds the exact budget {limit}; "
            "use the Monte Carlo sampler (montecarlo module / `mc` command) instead, "
            "or raise the budget with CDG_BUDGET"
        )


@dataclass(frozen=True)
class MixReport:
    epsilon: float
    n_star: Optional[int]
    tv_at_n_star: Optional[float]
    resolved: bool = True
    largest_n: Optional[int] = None
    largest_tv: Optional[float] = None


def evolve_step(P: DistVector, step: StepDistribution) -> DistVector:
    """One step of the chain, P'(y) = sum_d Pr(d) P((y - d) / 2)."""
    out = kernels.evolve_many(P.mass, step.a, step.b, step.c, 1)
    return DistVector(P.modulus, out)


def _evolve_raw(mass: np.ndarray, step: StepDistribution, steps: int) -> np.ndarray:
    return kernels.evolve_many(mass, step.a, step.b, step.c, steps)


def distribution_at(
    step: StepDistribution, m: ModulusSpec, n: int, budget: Optional[int] = None
) -> DistVector:
    if n < 0:
        raise CDGError("n must be >= 0")
    _check_budget(m.p, n, budget)
    start = np.zeros(m.p)
    start[0] = 1.0
    return DistVector(m, _evolve_raw(start, step, n))


def tv_curve(
    step: StepDistribution,
    m: ModulusSpec,
    n_max: int,
    stride: int = 1,
    budget: Optional[int] = None,
) -> TvCurve:
    if n_max < 0:
        raise CDGError("n_max must be >= 0")
    if stride < 1:
        raise CDGError("stride must be >= 1")
    _check_budget(m.p, n_max, budget)
    mass = np.zeros(m.p)
    mass[0] = 1.0
    points = [(0, kernels.tv_uniform(mass))]
    n = 0
    while n + stride <= n_max:
        mass = _evolve_raw(mass, step, stride)
        n += stride
        points.append((n, kernels.tv_uniform(mass)))
    return TvCurve(step, m, tuple(points))


def mixing_time(
    step: StepDistribution,
    m: ModulusSpec,
    epsilon: float,
    budget: Optional[int] = None,
) -> MixReport:
    """Smallest n with ||P_n - U|| <= epsilon.

    Doubling search followed by bisection. Both rely on the distance to
    uniform being non-increasing in n. The distribution at the lower end
    of the bracket is carried along, so the total work is O(n*) steps.
    """
    if not 0.0 < epsilon < 1.0:
        raise CDGError("epsilon must lie in (0, 1)")
    limit = compute_budget(budget)
    p = m.p

    lo_mass = np.zeros(p)
    lo_mass[0] = 1.0
    tv0 = kernels.tv_uniform(lo_mass)
    if tv0 <= epsilon:
        return MixReport(epsilon, 0, tv0)

    # invariant: tv(lo) > epsilon
    lo, lo_tv = 0, tv0
    hi = 1
    while True:
        if p * hi > limit:
            return MixReport(epsilon, None, None, resolved=False, largest_n=lo, largest_tv=lo_tv)
        hi_mass = _evolve_raw(lo_mass, step, hi - lo)
        hi_tv = kernels.tv_uniform(hi_mass)
        if hi_tv <= epsilon:
            break
        lo, lo_mass, lo_tv = hi, hi_mass, hi_tv
        hi *= 2

    while hi - lo > 1:
        mid = (lo + hi) // 2
        mid_mass = _evolve_raw(lo_mass, step, mid - lo)
        mid_tv = kernels.tv_uniform(mid_mass)
        if mid_tv <= epsilon:
            hi, hi_tv = mid, mid_tv
        else:
            lo, lo_mass = mid, mid_mass
    return MixReport(epsilon, hi, hi_tv)


def case1_upper_bound(m: ModulusSpec, n: int) -> tuple[float, float]:
    """Distance bound for the uniform-on-{0..2^n-1} construction reduced mod p.

    Returns ``(tight, weak)`` with tight = p (ceil(2^n/p)/2^n - 1/p) and
    weak = p / 2^n.
    """
    if n < 0:
        raise CDGError("n must be >= 0")
    p = m.p
    N = 1 << n
    ceil = -(-N // p)
    tight = Fraction(p * ceil - N, N)
    weak = Fraction(p, N)
    return float(tight), float(weak)


def evolve_offsets(
    mass: np.ndarray, offsets: Mapping[int, float], steps: int = 1
) -> np.ndarray:
    """Evolve X -> 2X + d for an arbitrary finite step law {d: Pr(d)}."""
    p = mass.shape[0]
    h = (p + 1) // 2
    base = (np.arange(p, dtype=np.int64) * h) % p
    pulls = [(prob, (base - (d % p) * h) % p) for d, prob in offsets.items() if prob]
    cur = np.array(mass, dtype=np.float64)
    for _ in range(steps):
        nxt = np.zeros(p)
        for prob, idx in pulls:
            nxt += prob * cur[idx]
        cur = nxt
    return cur


def b0_processes(a: float, m: ModulusSpec, n: int, budget: Optional[int] = None):
    """Exact laws of the three b = 0 processes after n steps.

    Steps are {+1: a, -1: 1-a}, {+2: a, 0: 1-a} and {+1: a, 0: 1-a}.
    """
    if not 0.0 < a < 1.0:
        raise CDGError("a must lie in (0, 1)")
    if n < 0:
        raise CDGError("n must be >= 0")
    _check_budget(m.p, 3 * n, budget)
    start = np.zeros(m.p)
    start[0] = 1.0
    px = _evolve_raw(start, validate_step(a, 0.0, 1.0 - a), n)
    qy = evolve_offsets(start, {2: a, 0: 1.0 - a}, n)
    rz = _evolve_raw(start, validate_step(a, 1.0 - a, 0.0), n)
    return DistVector(m, px), DistVector(m, qy), DistVector(m, rz)


def b0_equivalence_triple(
    a: float, m: ModulusSpec, n: int, budget: Optional[int] = None
) -> tuple[float, float, float]:
    P, Q, R = b0_processes(a, m, n, budget)
    return tv_to_uniform(P), tv_to_uniform(Q), tv_to_uniform(R)


def dft_coefficient(P: DistVector, k: int) -> complex:
    """hat P(k) = sum_s P(s) exp(2 pi i k s / p), by direct summation."""
    p = P.p
    if not 0 <= k < p:
        raise CDGError(f"k must lie in [0, {p})")
    s = np.arange(p, dtype=np.int64)
    e = (s * k) % p if p < 3_037_000_499 else np.array([(int(x) * k) % p for x in s])
    theta = (2.0 * np.pi / p) * e
    mass = P.mass
    return complex(kernels.pairwise_sum(mass * np.cos(theta)), kernels.pairwise_sum(mass * np.sin(theta)))


def dft_all(P: DistVector) -> np.ndarray:
    """Direct O(p^2) transform at every k; a small-p oracle."""
    p = P.p
    s = np.arange(p, dtype=np.int64)
    e = np.outer(s, s) % p
    return np.exp((2j * np.pi / p) * e) @ P.mass
