# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: pull-form evolution, pairwise sums, path sampling."""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs
from libc.stdint cimport uint64_t, int64_t

cnp.import_array()

cdef enum:
    BLOCK = 128

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL


cdef inline uint64_t mix64(uint64_t z) noexcept nogil:
    z = z + GOLDEN
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef void _step(const double* src, double* dst, Py_ssize_t p, Py_ssize_t h,
                double a, double b, double c) noexcept nogil:
    # y = 2m   pulls from m,     m - h, m + h
    # y = 2m+1 pulls from m + h, m,     m + 2h = m + 1 (mod p)
    cdef Py_ssize_t m, i, lo, hi
    for m in range(h):
        i = m
        lo = i + p - h
        hi = i + h
        if hi >= p:
            hi -= p
        dst[2 * m] = a * src[lo] + b * src[i] + c * src[hi]
    for m in range(h - 1):
        i = m + h
        lo = m
        hi = m + 1
        dst[2 * m + 1] = a * src[lo] + b * src[i] + c * src[hi]


def evolve_many(src, double a, double b, double c, Py_ssize_t steps):
    cdef cnp.ndarray[double, ndim=1, mode="c"] x = np.array(src, dtype=np.float64, copy=True)
    cdef Py_ssize_t p = x.shape[0]
    if steps <= 0:
        return x
    cdef cnp.ndarray[double, ndim=1, mode="c"] y = np.empty(p, dtype=np.float64)
    cdef double* bufs[2]
    bufs[0] = &x[0]
    bufs[1] = &y[0]
    cdef Py_ssize_t h = (p + 1) // 2
    cdef Py_ssize_t k
    with nogil:
        for k in range(steps):
            _step(bufs[k & 1], bufs[(k + 1) & 1], p, h, a, b, c)
    return y if steps & 1 else x


cdef double _psum_abs_shift(const double* x, const double* y, double shift,
                            Py_ssize_t n) noexcept nogil:
    # pairwise sum of |x[i] - y[i] - shift| (y may be NULL)
    cdef Py_ssize_t i, half
    cdef double s = 0.0
    if n <= BLOCK:
        if y == NULL:
            for i in range(n):
                s += fabs(x[i] - shift)
        else:
            for i in range(n):
                s += fabs(x[i] - y[i] - shift)
        return s
    half = (n // 2 // BLOCK) * BLOCK
    if half == 0:
        half = n // 2
    if y == NULL:
        return _psum_abs_shift(x, NULL, shift, half) + _psum_abs_shift(x + half, NULL, shift, n - half)
    return (_psum_abs_shift(x, y, shift, half)
            + _psum_abs_shift(x + half, y + half, shift, n - half))


cdef double _psum(const double* x, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t i, half
    cdef double s = 0.0
    if n <= BLOCK:
        for i in range(n):
            s += x[i]
        return s
    half = (n // 2 // BLOCK) * BLOCK
    if half == 0:
        half = n // 2
    return _psum(x, half) + _psum(x + half, n - half)


def pairwise_sum(x):
    cdef const double[::1] v = np.ascontiguousarray(x, dtype=np.float64)
    if v.shape[0] == 0:
        return 0.0
    return _psum(&v[0], v.shape[0])


def tv_uniform(mass):
    cdef const double[::1] v = np.ascontiguousarray(mass, dtype=np.float64)
    cdef Py_ssize_t n = v.shape[0]
    return 0.5 * _psum_abs_shift(&v[0], NULL, 1.0 / n, n)


def tv_pair(x, y):
    cdef const double[::1] u = np.ascontiguousarray(x, dtype=np.float64)
    cdef const double[::1] v = np.ascontiguousarray(y, dtype=np.float64)
    if u.shape[0] != v.shape[0]:
        raise ValueError("length mismatch")
    return 0.5 * _psum_abs_shift(&u[0], &v[0], 0.0, u.shape[0])


def uniforms(uint64_t seed, counters):
    cdef const uint64_t[::1] ctr = np.ascontiguousarray(counters, dtype=np.uint64)
    cdef Py_ssize_t i, n = ctr.shape[0]
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    cdef uint64_t key = mix64(seed)
    with nogil:
        for i in range(n):
            o[i] = <double>(mix64(key + ctr[i]) >> 11) * (1.0 / 9007199254740992.0)
    return out


def sample_paths(uint64_t seed, int64_t p, double a, double b, int64_t n,
                 int64_t start, int64_t count):
    out = np.empty(count, dtype=np.int64)
    cdef int64_t[::1] o = out
    cdef uint64_t key = mix64(seed)
    cdef double t1 = a
    cdef double t2 = a + b
    cdef int64_t i, k, x, d
    cdef uint64_t base
    cdef double u
    with nogil:
        for i in range(count):
            x = 0
            base = <uint64_t>(start + i) * <uint64_t>n
            for k in range(n):
                u = <double>(mix64(key + base + <uint64_t>k) >> 11) * (1.0 / 9007199254740992.0)
                if u < t1:
                    d = 1
                elif u < t2:
                    d = 0
                else:
                    d = -1
                x = 2 * x + d
                if x >= p:
                    x -= p
                elif x < 0:
                    x += p
            o[i] = x
    return out
