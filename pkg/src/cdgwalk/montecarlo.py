"""Seeded path sampling for moduli beyond the exact-evolution budget.

Every step draw is a pure function of (seed, path index, step index), so
any partition of the path range over workers gives the same samples.
Reductions run over fixed blocks of BLOCK paths and are merged in block
order, which keeps floating-point results independent of ``jobs``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ._backend import kernels
from .model import CDGError, ModulusSpec, StepDistribution
from .spectral import LowerBoundCertificate

BLOCK = 4096
_MAX_P = 1 << 62


@dataclass(frozen=True)
class SamplerConfig:
    seed: int
    samples: int
    modulus: ModulusSpec
    step: StepDistribution
    n: int

    def __post_init__(self):
        if self.samples < 1:
            raise CDGError("samples must be >= 1")
        if self.n < 0:
            raise CDGError("n must be >= 0")
        if not 0 <= self.seed < 1 << 64:
            raise CDGError("seed must fit in an unsigned 64-bit integer")
        if self.modulus.p >= _MAX_P:
            raise CDGError("sampling needs p < 2^62")


@dataclass(frozen=True)
class EmpiricalMoment:
    mean: complex
    stderr_re: float
    stderr_im: float
    samples: int


def sample_final_states(cfg: SamplerConfig, start: int, count: int) -> np.ndarray:
    s = cfg.step
    return kernels.sample_paths(cfg.seed, cfg.modulus.p, s.a, s.b, cfg.n, start, count)


def sample_final_state(cfg: SamplerConfig, path_index: int) -> int:
    return int(sample_final_states(cfg, path_index, 1)[0])


def f_values(states: np.ndarray, m: ModulusSpec) -> np.ndarray:
    """Separating function at each sampled state."""
    if m.mersenne_t is None:
        raise CDGError(f"p={m.p} carries no Mersenne exponent t")
    p = m.p
    e = np.asarray(states, dtype=np.int64) % p
    acc = np.zeros(e.shape[0], dtype=np.complex128)
    for _ in range(m.mersenne_t):
        x = np.where(e > p // 2, e - p, e) / float(p)
        acc += np.exp(2j * np.pi * x)
        e = 2 * e
        e = np.where(e >= p, e - p, e)
    return acc


def _blocks(cfg: SamplerConfig):
    return [(s, min(BLOCK, cfg.samples - s)) for s in range(0, cfg.samples, BLOCK)]


def _map_blocks(cfg: SamplerConfig, fn: Callable, jobs: int):
    blocks = _blocks(cfg)
    if jobs <= 1:
        return [fn(s, c) for s, c in blocks]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(lambda sc: fn(*sc), blocks))


def histogram(cfg: SamplerConfig, jobs: int = 1) -> np.ndarray:
    """Empirical law of X_n over cfg.samples paths."""
    p = cfg.modulus.p

    def block(start, count):
        return np.bincount(sample_final_states(cfg, start, count), minlength=p)

    counts = np.zeros(p, dtype=np.int64)
    for c in _map_blocks(cfg, block, jobs):
        counts += c
    return counts / cfg.samples


def _merge(stats):
    # Chan et al. pairwise update of (count, mean, M2), applied in block order
    n, mean, m2 = 0, np.zeros(2), np.zeros(2)
    for nb, mb, m2b in stats:
        delta = mb - mean
        tot = n + nb
        mean = mean + delta * (nb / tot)
        m2 = m2 + m2b + delta**2 * (n * nb / tot)
        n = tot
    return n, mean, m2


def empirical_f_moment(cfg: SamplerConfig, jobs: int = 1) -> EmpiricalMoment:
    def block(start, count):
        f = f_values(sample_final_states(cfg, start, count), cfg.modulus)
        v = np.stack([f.real, f.imag])
        mb = v.mean(axis=1)
        return count, mb, ((v - mb[:, None]) ** 2).sum(axis=1)

    n, mean, m2 = _merge(_map_blocks(cfg, block, jobs))
    if n > 1:
        se = np.sqrt(m2 / (n - 1) / n)
    else:
        se = np.zeros(2)
    return EmpiricalMoment(complex(mean[0], mean[1]), float(se[0]), float(se[1]), n)


def empirical_event_bound(
    cfg: SamplerConfig, cert: LowerBoundCertificate, jobs: int = 1
) -> float:
    """Fraction of paths with |f(X_n) - E f| >= beta sqrt(Var f)."""
    if math.isinf(cert.beta_cheb):
        radius = math.inf
    else:
        radius = cert.beta_cheb * math.sqrt(cert.var)
    target = cert.mean

    def block(start, count):
        f = f_values(sample_final_states(cfg, start, count), cfg.modulus)
        return int(np.count_nonzero(np.abs(f - target) >= radius))

    return sum(_map_blocks(cfg, block, jobs)) / cfg.samples


def chebyshev_event_allowance(cert: LowerBoundCertificate, samples: int) -> float:
    """1/beta^2 plus three binomial standard errors at that rate."""
    if cert.beta_cheb <= 0.0:
        return 1.0
    q = min(1.0, 1.0 / cert.beta_cheb**2)
    return q + 3.0 * math.sqrt(q * (1.0 - q) / samples)
