"""Hot-kernel backend selection.

The compiled extension is used when importable; the numpy lane is the
fallback. `PARGRID_BACKEND=python` (or `=c`) forces a lane at import time,
and `set_backend()` switches at runtime (used by the backend benchmark).
"""

import os

from . import pykernels

try:
    from . import _ckernels
except ImportError:
    _ckernels = None

_BACKENDS = {"python": pykernels}
if _ckernels is not None:
    _BACKENDS["c"] = _ckernels


def _default():
    forced = os.environ.get("PARGRID_BACKEND", "").strip().lower()
    if forced:
        if forced not in _BACKENDS:
            raise ImportError(f"PARGRID_BACKEND={forced!r} is not available "
                              f"(have: {', '.join(sorted(_BACKENDS))})")
        return _BACKENDS[forced]
    return _BACKENDS.get("c", pykernels)


_active = _default()


def available_backends():
    return sorted(_BACKENDS)


def backend_name():
    return _active.BACKEND_NAME


def set_backend(name):
    global _active
    if name not in _BACKENDS:
        raise ValueError(f"unknown backend {name!r} (have: {', '.join(sorted(_BACKENDS))})")
    _active = _BACKENDS[name]


def radix_sort_pairs(keys, values, key_bits):
    return _active.radix_sort_pairs(keys, values, key_bits)


def pairgen_sorted(lo, hi, offsets, total, dims):
    return _active.pairgen_sorted(lo, hi, offsets, total, dims)


def compact_count(lo, hi, offsets, total, dims, ncells):
    return _active.compact_count(lo, hi, offsets, total, dims, ncells)


def compact_fill(lo, hi, offsets, total, dims, cell_starts):
    return _active.compact_fill(lo, hi, offsets, total, dims, cell_starts)


def dda_cast(G, O, verts, tris, blo, bhi, cs, dims, origins, dirs, t_max):
    return _active.dda_cast(G, O, verts, tris, blo, bhi, cs, dims, origins, dirs, t_max)
