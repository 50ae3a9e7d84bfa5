"""Pure-Python kernels: seeded hashing, permutation, inverse-CDF sampling.

The compiled extension ``mrmeter._speedups`` implements the same three
functions; the two backends must agree bit for bit on every input, since
shuffle routing, value ordering, and workload generation are all defined in
terms of these streams.
"""

MASK64 = (1 << 64) - 1

_GAMMA = 0x9E3779B97F4A7C15
_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3

# (x >> 11) spans 53 bits, so this maps to [0, 1) with full double precision.
_INV_2_53 = 1.0 / 9007199254740992.0


def _fmix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def hash_bytes(data: bytes, seed: int) -> int:
    """Seeded 64-bit hash of a byte string."""
    h = _FNV_OFFSET ^ _fmix64(seed & MASK64)
    for byte in data:
        h = ((h ^ byte) * _FNV_PRIME) & MASK64
    return _fmix64(h ^ len(data))


def permute_indices(n: int, seed: int) -> list:
    """Seeded Fisher-Yates permutation of range(n)."""
    if n < 0:
        raise ValueError("n must be non-negative")
    idx = list(range(n))
    s = seed & MASK64
    for i in range(n - 1, 0, -1):
        s = (s + _GAMMA) & MASK64
        j = _fmix64(s) % (i + 1)
        idx[i], idx[j] = idx[j], idx[i]
    return idx


def sample_cdf(cum, count: int, seed: int) -> list:
    """Draw ``count`` indices against a nondecreasing cumulative array."""
    m = len(cum)
    if m == 0:
        raise ValueError("empty cumulative array")
    if count < 0:
        raise ValueError("count must be non-negative")
    out = []
    s = seed & MASK64
    for _ in range(count):
        s = (s + _GAMMA) & MASK64
        u = (_fmix64(s) >> 11) * _INV_2_53
        lo, hi = 0, m
        while lo < hi:
            mid = (lo + hi) // 2
            if u < cum[mid]:
                hi = mid
            else:
                lo = mid + 1
        out.append(lo if lo < m else m - 1)
    return out
