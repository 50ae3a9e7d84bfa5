"""Kernel backend selection.

The compiled extension is used when importable; setting ``MRMETER_PURE=1``
in the environment forces the pure-Python fallback. Both backends are
bit-identical, so the choice only affects speed.
"""

import os

import numpy as np

from . import _kernels_py

try:
    from . import _speedups
except ImportError:  # extension not built
    _speedups = None

_BACKENDS = {"pure": _kernels_py}
if _speedups is not None:
    _BACKENDS["cython"] = _speedups

_active_name = "pure"
_active = _kernels_py


def available_backends():
    return sorted(_BACKENDS)


def active_backend() -> str:
    return _active_name


def set_backend(name: str) -> None:
    global _active, _active_name
    if name not in _BACKENDS:
        raise ValueError(f"unknown kernel backend {name!r}; have {available_backends()}")
    _active = _BACKENDS[name]
    _active_name = name


def hash_bytes(data: bytes, seed: int) -> int:
    return _active.hash_bytes(data, seed)


def permute_indices(n: int, seed: int) -> list:
    return _active.permute_indices(n, seed)


def sample_cdf(cum, count: int, seed: int) -> list:
    # The compiled backend wants a contiguous float64 buffer.
    arr = np.ascontiguousarray(cum, dtype=np.float64)
    return _active.sample_cdf(arr, count, seed)


if _speedups is not None and not os.environ.get("MRMETER_PURE"):
    set_backend("cython")
