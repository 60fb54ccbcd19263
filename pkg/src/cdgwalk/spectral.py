"""Character sums, the products Pi_j and the Chebyshev lower-bound certificate.

Frequencies are handled as exact integers reduced mod p by repeated
doubling; only the final residue e/p is turned into a float. The residue
is taken in the symmetric range (-p/2, p/2) so that a frequency and its
negative produce exactly conjugate factors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Optional

import numpy as np

from .model import CDGError, ModulusSpec, StepDistribution, validate_step

_INT64_SAFE_P = 1 << 62
_GOLDEN_RATIO = (math.sqrt(5.0) - 1.0) / 2.0


class Case1DegenerateError(CDGError):
    """Raised for Case 1 steps, where |Pi_1| -> 0 and the schedule is undefined."""

    code = "case1-degenerate"


class SpectralError(ArithmeticError):
    """A spectral invariant failed beyond roundoff; indicates a defect."""


@dataclass(frozen=True, eq=False)
class SpectralSummary:
    t: int
    r: int
    pi: np.ndarray
    e_f: complex
    e_ff: float
    var: float
    var_raw: float
    degenerate: bool = False

    @property
    def pi1_abs(self) -> float:
        return abs(complex(self.pi[1]))

    @property
    def n(self) -> int:
        return self.r * self.t


@dataclass(frozen=True)
class LowerBoundCertificate:
    t: int
    r: int
    alpha: float
    beta_cheb: float
    mean: complex
    mean_magnitude: float
    var: float
    margin: float
    bound: float
    valid: bool


@dataclass(frozen=True)
class FactReport:
    t: int
    step: StepDistribution
    reduced: bool
    max_ratio: float
    fact1_holds: bool
    fact1_violations: tuple[int, ...]
    fact2_range: tuple[int, int]
    c0: float
    pi_abs: tuple[float, ...]


# --- exponent arithmetic -------------------------------------------------

def _signed_fracs(exps, p: int) -> np.ndarray:
    """Map integer residues e (mod p) to floats e'/p with e' in (-p/2, p/2)."""
    half = p // 2
    if p < _INT64_SAFE_P:
        e = np.asarray(exps, dtype=np.int64) % p
        e = np.where(e > half, e - p, e)
        return e / float(p)
    out = []
    for e in exps:
        e = int(e) % p
        if e > half:
            e -= p
        out.append(e / p)
    return np.array(out, dtype=np.float64)


def doubling_orbit(start: int, p: int, length: int) -> list[int]:
    """[start * 2^alpha mod p for alpha < length], by repeated doubling."""
    v = start % p
    out = []
    for _ in range(length):
        out.append(v)
        v += v
        if v >= p:
            v -= p
    return out


def _phi_from_fracs(x: np.ndarray, step: StepDistribution) -> np.ndarray:
    # Real part (a+c) cos(theta) + b, written through half-angle squares so
    # it keeps relative accuracy near its zeros: 1 - 2(a+c) sin^2(theta/2)
    # for |x| < 1/4 and (b - a - c) + 2(a+c) cos^2(theta/2) otherwise.
    x = np.asarray(x, dtype=np.float64)
    half = np.pi * x
    ac = step.a + step.c
    near = np.abs(x) < 0.25
    re = np.where(
        near,
        1.0 - 2.0 * ac * np.sin(half) ** 2,
        (step.b - ac) + 2.0 * ac * np.cos(half) ** 2,
    )
    return re + 1j * ((step.a - step.c) * np.sin(2.0 * half))


def _cpow(z: complex, r: int) -> complex:
    """z**r for integer r >= 0 by binary exponentiation."""
    result = 1.0 + 0.0j
    base = complex(z)
    while r:
        if r & 1:
            result *= base
        base *= base
        r >>= 1
    return result


# --- basic objects -------------------------------------------------------

def unit_root_power(p: int, e: int) -> complex:
    if p < 3 or p % 2 == 0:
        raise CDGError(f"p must be odd and >= 3, got {p}")
    x = float(_signed_fracs([e], p)[0])
    theta = 2.0 * math.pi * x
    return complex(math.cos(theta), math.sin(theta))


def phi_factor(mexp: int, step: StepDistribution, p: int) -> complex:
    """a q^m + b + c q^-m with q = exp(2 pi i / p)."""
    if p < 3 or p % 2 == 0:
        raise CDGError(f"p must be odd and >= 3, got {p}")
    return complex(_phi_from_fracs(_signed_fracs([mexp], p), step)[0])


def _require_t(m: ModulusSpec) -> int:
    if m.mersenne_t is None:
        raise CDGError(f"p={m.p} carries no Mersenne exponent t")
    return m.mersenne_t


def separating_f(k: int, m: ModulusSpec) -> complex:
    """f(k) = sum_{j<t} q^{k 2^j}."""
    t = _require_t(m)
    x = _signed_fracs(doubling_orbit(k, m.p, t), m.p)
    theta = 2.0 * np.pi * x
    return complex(np.cos(theta).sum(), np.sin(theta).sum())


def separating_f_all(m: ModulusSpec) -> np.ndarray:
    """f(k) for every k in Z/pZ; O(p t)."""
    t = _require_t(m)
    p = m.p
    e = np.arange(p, dtype=np.int64)
    acc = np.zeros(p, dtype=np.complex128)
    for _ in range(t):
        x = np.where(e > p // 2, e - p, e) / float(p)
        acc += np.exp(2j * np.pi * x)
        e = 2 * e
        e = np.where(e >= p, e - p, e)
    return acc


def hat_p_n(step: StepDistribution, m: ModulusSpec, n: int, k: int) -> complex:
    """Fourier coefficient of the law of X_n: prod_{alpha<n} phi(2^alpha k).

    The doubling orbit of k is periodic, so for long runs one full period
    is multiplied out and raised to a power.
    """
    if n < 0:
        raise CDGError("n must be >= 0")
    p = m.p
    k0 = k % p
    v = k0
    orbit = []
    period = None
    for alpha in range(n):
        orbit.append(v)
        v += v
        if v >= p:
            v -= p
        if v == k0:
            period = alpha + 1
            break
    factors = _phi_from_fracs(_signed_fracs(orbit, p), step)
    if period is None:
        return complex(np.prod(factors))
    q, rem = divmod(n, period)
    cycle = complex(np.prod(factors))
    return _cpow(cycle, q) * complex(np.prod(factors[:rem]))


def hat_p_n_all(step: StepDistribution, m: ModulusSpec, n: int) -> np.ndarray:
    """hat_p_n at every k, vectorized over k (direct n-fold product)."""
    p = m.p
    if p >= _INT64_SAFE_P:
        raise CDGError("vectorized transform needs p < 2^62")
    e = np.arange(p, dtype=np.int64)
    out = np.ones(p, dtype=np.complex128)
    for _ in range(n):
        out *= _phi_from_fracs(_signed_fracs(e, p), step)
        e = 2 * e
        e = np.where(e >= p, e - p, e)
    return out


@lru_cache(maxsize=256)
def _pi_table_cached(step: StepDistribution, t: int) -> np.ndarray:
    p = (1 << t) - 1
    table = np.empty(t, dtype=np.complex128)
    for j in range(t):
        x = _signed_fracs(doubling_orbit((1 << j) - 1, p, t), p)
        table[j] = np.prod(_phi_from_fracs(x, step))
    table.flags.writeable = False
    return table


def pi_table(step: StepDistribution, t: int) -> np.ndarray:
    """Pi_j for j = 0..t-1 with p = 2^t - 1 (read-only array)."""
    if t < 2:
        raise CDGError("t must be >= 2")
    return _pi_table_cached(step, int(t))


def pi_product(step: StepDistribution, t: int, j: int) -> complex:
    if not 0 <= j < t:
        raise CDGError("j must lie in [0, t)")
    return complex(pi_table(step, t)[j])


def g_magnitude(step: StepDistribution, x: float) -> float:
    """G(x) = |a e^{2 pi i x} + b + c e^{-2 pi i x}|."""
    x = float(x) % 1.0
    return float(abs(_phi_from_fracs(np.array([x]), step)[0]))


def g_interval_sup(
    step: StepDistribution, lo: float, hi: float, grid: int = 4096
) -> float:
    """Numerical sup of G on [lo, hi]: grid maximum, then ternary refinement."""
    if not (0.0 <= lo < hi <= 1.0) or grid < 2:
        raise CDGError("need 0 <= lo < hi <= 1 and grid >= 2")
    xs = np.linspace(lo, hi, grid)
    vals = np.abs(_phi_from_fracs(xs, step))
    i = int(np.argmax(vals))
    best = float(vals[i])
    left = xs[max(i - 1, 0)]
    right = xs[min(i + 1, grid - 1)]
    for _ in range(100):
        m1 = left + (right - left) / 3.0
        m2 = right - (right - left) / 3.0
        if g_magnitude(step, m1) < g_magnitude(step, m2):
            left = m1
        else:
            right = m2
    return max(best, g_magnitude(step, 0.5 * (left + right)))


# --- moments of f under P_n ----------------------------------------------

def spectral_summary(step: StepDistribution, t: int, r: int) -> SpectralSummary:
    if r < 1:
        raise CDGError("r must be >= 1")
    pi = pi_table(step, t)
    powers = np.array([_cpow(z, r) for z in pi])
    total = complex(powers.sum())
    if abs(total.imag) > 1e-9 * t:
        raise SpectralError(f"sum of Pi_j^r has imaginary part {total.imag!r}")
    e_f = t * powers[1]
    e_ff = t * total.real
    var_raw = e_ff - t * t * abs(powers[1]) ** 2
    if var_raw < 0.0:
        if var_raw < -1e-9 * abs(e_ff):
            raise SpectralError(f"Var_Pn(f) = {var_raw!r} is negative beyond roundoff")
        var = 0.0
    else:
        var = var_raw
    return SpectralSummary(
        t=t, r=r, pi=pi, e_f=complex(e_f), e_ff=float(e_ff), var=float(var),
        var_raw=float(var_raw), degenerate=step.is_case1(),
    )


def default_lambda(t: int) -> float:
    return math.log(math.log(t))


def _require_case2(step: StepDistribution) -> None:
    if step.is_case1():
        raise Case1DegenerateError(
            f"step {step.probs} is Case 1; |Pi_1| -> 0 and no slow-mixing schedule exists"
        )


def r_schedule(step: StepDistribution, t: int, lam: Optional[float] = None) -> int:
    """max(1, floor(log t / (2 log(1/|Pi_1|)) - lambda)), natural logs."""
    _require_case2(step)
    if lam is None:
        lam = default_lambda(t)
    a1 = abs(complex(pi_table(step, t)[1]))
    if a1 >= 1.0 - 1e-12 or a1 <= 1e-12:
        raise CDGError(f"|Pi_1| = {a1!r} leaves the schedule undefined")
    raw = math.log(t) / (2.0 * math.log(1.0 / a1)) - lam
    return max(1, math.floor(raw))


def _golden_max(fn, lo: float, hi: float, iters: int = 200) -> float:
    a, b = lo, hi
    c = b - _GOLDEN_RATIO * (b - a)
    d = a + _GOLDEN_RATIO * (b - a)
    fc, fd = fn(c), fn(d)
    for _ in range(iters):
        if b - a <= 1e-15 * max(1.0, abs(b)):
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN_RATIO * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN_RATIO * (b - a)
            fd = fn(d)
    return 0.5 * (a + b)


def optimize_alpha_beta(mean_magnitude: float, t: float, var: float,
                        slack: float = 1e-9) -> tuple[float, float]:
    """Maximize 1 - 1/alpha^2 - 1/beta^2 on alpha sqrt(t) + beta sqrt(var) = M.

    M is the mean magnitude shrunk by ``slack`` so the disjointness margin
    stays strictly positive after rounding.
    """
    M = mean_magnitude * (1.0 - slack)
    st = math.sqrt(t)
    sv = math.sqrt(var)
    if M <= 0.0:
        return 0.0, 0.0
    if sv == 0.0:
        return M / st, math.inf

    def objective(alpha):
        beta = (M - alpha * st) / sv
        if alpha <= 0.0 or beta <= 0.0:
            return -math.inf
        return -1.0 / alpha**2 - 1.0 / beta**2

    alpha = _golden_max(objective, 0.0, M / st)
    return alpha, (M - alpha * st) / sv


def chebyshev_certificate(
    step: StepDistribution, t: int, r: int
) -> LowerBoundCertificate:
    """Lower bound 1 - 1/alpha^2 - 1/beta^2 on ||P_n - U|| at n = r t.

    A = {|f| < alpha sqrt(t)} has U-mass >= 1 - 1/alpha^2 and
    B = {|f - E f| < beta sqrt(Var f)} has P_n-mass >= 1 - 1/beta^2. They
    are disjoint once alpha sqrt(t) + beta sqrt(Var f) <= |E f|.
    """
    _require_case2(step)
    s = spectral_summary(step, t, r)
    M = abs(s.e_f)
    alpha, beta = optimize_alpha_beta(M, t, s.var)
    margin = M - alpha * math.sqrt(t) - (0.0 if math.isinf(beta) else beta * math.sqrt(s.var))
    if alpha > 0.0 and beta > 0.0:
        raw = 1.0 - 1.0 / alpha**2 - (0.0 if math.isinf(beta) else 1.0 / beta**2)
    else:
        raw = -math.inf
    valid = margin > 0.0 and raw > 0.0
    return LowerBoundCertificate(
        t=t, r=r, alpha=alpha, beta_cheb=beta, mean=s.e_f, mean_magnitude=M,
        var=s.var, margin=margin, bound=raw if valid else 0.0, valid=valid,
    )


def claim_ratio(step: StepDistribution, t: int, r: int) -> float:
    """(1/t) sum_j Re((Pi_j / |Pi_1|^2)^r)."""
    _require_case2(step)
    pi = pi_table(step, t)
    a1sq = abs(complex(pi[1])) ** 2
    return float(sum(_cpow(z / a1sq, r).real for z in pi) / t)


def _icbrt_ceil(t: int) -> int:
    j = max(1, round(t ** (1.0 / 3.0)))
    while j**3 < t:
        j += 1
    while j > 1 and (j - 1) ** 3 >= t:
        j -= 1
    return j


def fact_checks(step: StepDistribution, t: int) -> FactReport:
    """Finite-t check of |Pi_j| <= |Pi_1| (j >= 1) and of the constant c0
    in |Pi_j| / |Pi_1|^2 <= 1 + c0 / 2^j over t^(1/3) <= j <= t/2.

    A b = 0 step is first replaced by (a, 1 - a, 0), whose chain has the
    same distance to uniform.
    """
    reduced = False
    if step.b == 0.0:
        _require_case2(step)
        step = validate_step(step.a, 1.0 - step.a, 0.0)
        reduced = True
    _require_case2(step)
    mags = np.abs(pi_table(step, t))
    a1 = float(mags[1])
    violations = tuple(j for j in range(1, t) if mags[j] > a1 * (1.0 + 1e-12))
    # |Pi_j| = |Pi_{t-j}|, so j <= t/2 covers every magnitude without
    # comparing Pi_{t-1} against its own conjugate partner
    max_ratio = float(mags[1 : t // 2 + 1].max() / a1)
    j_lo, j_hi = _icbrt_ceil(t), t // 2
    c0 = -math.inf
    for j in range(j_lo, j_hi + 1):
        c0 = max(c0, (mags[j] / a1**2 - 1.0) * 2.0**j)
    return FactReport(
        t=t, step=step, reduced=reduced, max_ratio=max_ratio,
        fact1_holds=not violations, fact1_violations=violations,
        fact2_range=(j_lo, j_hi), c0=float(c0), pi_abs=tuple(float(v) for v in mags),
    )


def pi1_beta_trend(betas: Iterable[float], t: int) -> list[tuple[float, float]]:
    out = []
    for beta in betas:
        if not 0.0 < beta < 0.25:
            raise CDGError(f"beta={beta} outside (0, 1/4)")
        out.append((float(beta), abs(pi_product(StepDistribution.symmetric(beta), t, 1))))
    return out


def symmetric_pi1(beta: float, t: int) -> float:
    """prod_alpha ((1 - 2 beta) + 2 beta cos(2 pi 2^alpha / p)); the real form
    of Pi_1 for the symmetric family."""
    p = (1 << t) - 1
    x = _signed_fracs(doubling_orbit(1, p, t), p)
    return float(np.prod((1.0 - 2.0 * beta) + 2.0 * beta * np.cos(2.0 * np.pi * x)))


def fit_gamma(beta: float, t: int) -> float:
    """Smallest gamma with h(alpha) >= exp(-beta gamma (2^alpha/p)^2) for all
    alpha with 2^alpha / p <= 1/8, where h is a factor of the real Pi_1 form."""
    p = (1 << t) - 1
    gamma = 0.0
    for alpha in range(t):
        x = (1 << alpha) / p
        if x > 0.125:
            break
        h = (1.0 - 2.0 * beta) + 2.0 * beta * math.cos(2.0 * math.pi * x)
        gamma = max(gamma, -math.log(h) / (beta * x * x))
    return gamma
