"""Independent reference computations used by the tests.

Nothing here calls into the evolution or spectral code paths under test.
"""

import itertools

import numpy as np


def enumerate_law(step, p, n, offsets=None):
    """Law of sum_j 2^(n-1-j) b_j mod p by listing every step sequence."""
    if offsets is None:
        offsets = {1: step.a, 0: step.b, -1: step.c}
    support = [(d, pr) for d, pr in offsets.items() if pr > 0]
    law = np.zeros(p)
    if n == 0:
        law[0] = 1.0
        return law
    ds = np.array([d for d, _ in support], dtype=np.int64)
    ps = np.array([pr for _, pr in support])
    k = len(support)
    idx = np.array(list(itertools.product(range(k), repeat=n)), dtype=np.int64)
    weights = (2 ** np.arange(n - 1, -1, -1, dtype=np.int64))
    values = (ds[idx] * weights).sum(axis=1) % p
    probs = ps[idx].prod(axis=1)
    np.add.at(law, values, probs)
    return law


def synthesize_from_hat(hat, p):
    """Inverse transform P(s) = (1/p) sum_k hat(k) exp(-2 pi i k s / p)."""
    k = np.arange(p)
    e = np.outer(k, k) % p
    return (np.exp(-2j * np.pi * e / p) @ hat).real / p


def tv_brute_subsets(mass):
    """max over all 2^p subsets A of |P(A) - U(A)|."""
    m = np.asarray(mass)
    p = m.shape[0]
    d = m - 1.0 / p
    best = 0.0
    for bits in range(1 << p):
        s = sum(d[i] for i in range(p) if bits >> i & 1)
        best = max(best, abs(s))
    return best


def linear_scan_mixing(step, p, eps, n_max=100000):
    inv2 = (p + 1) // 2
    y = np.arange(p)
    lo, mid, hi = ((y - 1) * inv2) % p, (y * inv2) % p, ((y + 1) * inv2) % p
    P = np.zeros(p)
    P[0] = 1.0
    for n in range(n_max):
        tv = 0.5 * np.abs(P - 1.0 / p).sum()
        if tv <= eps:
            return n, tv
        P = step.a * P[lo] + step.b * P[mid] + step.c * P[hi]
    raise AssertionError("did not mix")


def direct_pi_product(step, t, j):
    """Pi_j with exponents reduced by Python big-int pow and factors multiplied
    in reverse order through cmath."""
    import cmath
    p = (1 << t) - 1
    prod = 1.0 + 0j
    for alpha in reversed(range(t)):
        m = (pow(2, alpha, p) * ((1 << j) - 1)) % p
        q = cmath.exp(2j * cmath.pi * m / p)
        prod *= step.a * q + step.b + step.c / q
    return prod
