"""Pure numpy implementations of the hot kernels.

Same signatures and results as the compiled ``_kernels`` module. Path
sampling is bit-identical between the two; floating-point sums may differ
in the last few ulps because the pairwise split points are not the same.
"""

from functools import lru_cache

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)


@lru_cache(maxsize=8)
def _pull_indices(p):
    h = (p + 1) // 2
    i = (np.arange(p, dtype=np.int64) * h) % p
    lo = (i - h) % p
    hi = (i + h) % p
    for arr in (i, lo, hi):
        arr.flags.writeable = False
    return lo, i, hi


def evolve_many(src, a, b, c, steps):
    cur = np.array(src, dtype=np.float64, copy=True)
    if steps <= 0:
        return cur
    lo, mid, hi = _pull_indices(cur.shape[0])
    for _ in range(steps):
        cur = a * cur[lo] + b * cur[mid] + c * cur[hi]
    return cur


def pairwise_sum(x):
    return float(np.sum(np.asarray(x, dtype=np.float64)))


def tv_uniform(mass):
    m = np.asarray(mass, dtype=np.float64)
    return 0.5 * float(np.sum(np.abs(m - 1.0 / m.shape[0])))


def tv_pair(x, y):
    return 0.5 * float(np.sum(np.abs(np.asarray(x) - np.asarray(y))))


def _mix64(z):
    with np.errstate(over="ignore"):
        z = z + _GOLDEN
        z = (z ^ (z >> np.uint64(30))) * _M1
        z = (z ^ (z >> np.uint64(27))) * _M2
        return z ^ (z >> np.uint64(31))


def uniforms(seed, counters):
    """Counter-based uniforms in [0, 1) for uint64 counters under key ``seed``."""
    key = _mix64(np.uint64(seed))
    with np.errstate(over="ignore"):
        z = _mix64(key + np.asarray(counters, dtype=np.uint64))
    return (z >> np.uint64(11)).astype(np.float64) * (1.0 / 9007199254740992.0)


def sample_paths(seed, p, a, b, n, start, count):
    idx = np.arange(start, start + count, dtype=np.uint64)
    x = np.zeros(count, dtype=np.int64)
    t1 = a
    t2 = a + b
    nn = np.uint64(n)
    for k in range(n):
        with np.errstate(over="ignore"):
            u = uniforms(seed, idx * nn + np.uint64(k))
        d = np.where(u < t1, 1, np.where(u < t2, 0, -1))
        x = (2 * x + d) % p
    return x
