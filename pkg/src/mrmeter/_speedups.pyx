# cython: language_level=3
# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels; must stay bit-identical to ``mrmeter._kernels_py``."""

from libc.stdint cimport uint64_t
from libc.stdlib cimport free, malloc

cdef uint64_t GAMMA = 0x9E3779B97F4A7C15UL
cdef uint64_t FNV_OFFSET = 0xCBF29CE484222325UL
cdef uint64_t FNV_PRIME = 0x100000001B3UL
cdef uint64_t MASK64 = 0xFFFFFFFFFFFFFFFFUL

cdef double INV_2_53 = 1.0 / 9007199254740992.0


cdef inline uint64_t fmix64(uint64_t z) noexcept nogil:
    z ^= z >> 30
    z *= 0xBF58476D1CE4E5B9UL
    z ^= z >> 27
    z *= 0x94D049BB133111EBUL
    z ^= z >> 31
    return z


def hash_bytes(data, seed):
    """Seeded 64-bit hash of a byte string."""
    cdef bytes buf = bytes(data)
    cdef const char* p = buf
    cdef Py_ssize_t n = len(buf)
    cdef Py_ssize_t i
    cdef uint64_t h = FNV_OFFSET ^ fmix64(<uint64_t> (seed & MASK64))
    for i in range(n):
        h = (h ^ <uint64_t> (<unsigned char> p[i])) * FNV_PRIME
    return fmix64(h ^ <uint64_t> n)


def permute_indices(n, seed):
    """Seeded Fisher-Yates permutation of range(n)."""
    cdef Py_ssize_t m = n
    if m < 0:
        raise ValueError("n must be non-negative")
    if m == 0:
        return []
    cdef Py_ssize_t* idx = <Py_ssize_t*> malloc(m * sizeof(Py_ssize_t))
    if idx == NULL:
        raise MemoryError()
    cdef Py_ssize_t i, j
    cdef Py_ssize_t tmp
    cdef uint64_t s = <uint64_t> (seed & MASK64)
    try:
        for i in range(m):
            idx[i] = i
        for i in range(m - 1, 0, -1):
            s += GAMMA
            j = <Py_ssize_t> (fmix64(s) % <uint64_t> (i + 1))
            tmp = idx[i]
            idx[i] = idx[j]
            idx[j] = tmp
        return [idx[i] for i in range(m)]
    finally:
        free(idx)


def sample_cdf(double[::1] cum, count, seed):
    """Draw ``count`` indices against a nondecreasing cumulative array."""
    cdef Py_ssize_t m = cum.shape[0]
    cdef Py_ssize_t k = count
    if m == 0:
        raise ValueError("empty cumulative array")
    if k < 0:
        raise ValueError("count must be non-negative")
    cdef uint64_t s = <uint64_t> (seed & MASK64)
    cdef Py_ssize_t t, lo, hi, mid
    cdef double u
    out = []
    for t in range(k):
        s += GAMMA
        u = <double> (fmix64(s) >> 11) * INV_2_53
        lo = 0
        hi = m
        while lo < hi:
            mid = (lo + hi) // 2
            if u < cum[mid]:
                hi = mid
            else:
                lo = mid + 1
        if lo >= m:
            lo = m - 1
        out.append(lo)
    return out
