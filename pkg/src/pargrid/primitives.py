"""Deterministic data-parallel building blocks.

Scans, segmented scan, stable radix sort of (key, value) pairs, run-length
encode and scatter. All grid builders are composed from these. Every
operation is a pure function: same inputs give bit-identical outputs
regardless of internal parallelism or backend.
"""

import numpy as np

from . import kernels
from .errors import InvariantError, SizeError

# Scan accumulators are 64-bit; stored cell/object ids are 32-bit. These
# bounds make int64 overflow in a cumsum impossible without an O(n) check.
_MAX_ELEM = 1 << 32
_MAX_LEN = 1 << 30


def _as_index_array(xs):
    a = np.asarray(xs, dtype=np.int64)
    if a.ndim != 1:
        raise InvariantError("expected a 1-D index array")
    if a.size and a.min() < 0:
        raise InvariantError("index arrays are non-negative")
    return a


def _check_scan_bounds(a):
    if a.size > _MAX_LEN:
        raise SizeError(f"array of {a.size} elements exceeds the scan size limit")
    if a.size and a.max() > _MAX_ELEM:
        raise SizeError("element too large for 64-bit scan accumulation")


def exclusive_sum(xs):
    """Exclusive prefix sum. Returns (sums, total)."""
    a = _as_index_array(xs)
    _check_scan_bounds(a)
    out = np.zeros(a.size, dtype=np.int64)
    if a.size == 0:
        return out, 0
    np.cumsum(a[:-1], out=out[1:])
    return out, int(out[-1] + a[-1])


def inclusive_sum(xs):
    """Inclusive prefix sum."""
    a = _as_index_array(xs)
    _check_scan_bounds(a)
    return np.cumsum(a, dtype=np.int64)


def mark_boundaries(offsets, nobjs, total):
    """Zero array of length `total` with a 1 at each group start offset.

    offsets[0] is the start of group 0 and gets no mark; an inclusive scan
    of the result recovers the group index for every element. Coincident
    marks (empty groups) are rejected: callers must filter zero-count
    objects first.
    """
    off = _as_index_array(offsets)
    if off.size != nobjs:
        raise InvariantError(f"got {off.size} offsets for {nobjs} objects")
    out = np.zeros(total, dtype=np.int64)
    if nobjs <= 1:
        return out
    marks = off[1:]
    if total == 0 or marks.min() <= 0 or marks.max() >= total:
        raise InvariantError("boundary mark outside ]0, total[")
    if np.unique(marks).size != marks.size:
        raise InvariantError("coincident boundary marks (zero-count group?)")
    out[marks] = 1
    return out


def segmented_exclusive_sum(values, segment_keys):
    """Exclusive prefix sum restarting at 0 wherever adjacent keys differ."""
    vals = _as_index_array(values)
    keys = np.asarray(segment_keys, dtype=np.int64)
    if vals.size != keys.size:
        raise InvariantError("values and segment_keys lengths differ")
    _check_scan_bounds(vals)
    if vals.size == 0:
        return np.zeros(0, dtype=np.int64)
    excl = np.zeros(vals.size, dtype=np.int64)
    np.cumsum(vals[:-1], out=excl[1:])
    is_start = np.empty(vals.size, dtype=bool)
    is_start[0] = True
    np.not_equal(keys[1:], keys[:-1], out=is_start[1:])
    starts = np.flatnonzero(is_start)
    seg_len = np.diff(np.append(starts, vals.size))
    base = np.repeat(excl[starts], seg_len)
    return excl - base


def radix_sort_pairs(keys, values, key_bits):
    """Stable LSD radix sort (8-bit digits) of 32-bit (key, value) pairs.

    Number of passes is ceil(key_bits / 8); equal keys keep input order.
    """
    k = _as_index_array(keys)
    v = _as_index_array(values)
    if k.size != v.size:
        raise InvariantError("keys and values lengths differ")
    if not 0 <= key_bits <= 32:
        raise InvariantError("key_bits must be in [0, 32]")
    if k.size and k.max() >> key_bits:
        raise InvariantError(f"key exceeds {key_bits} bits")
    if v.size and v.max() >= _MAX_ELEM:
        raise SizeError("value does not fit 32-bit id storage")
    ks, vs = kernels.radix_sort_pairs(k.astype(np.uint32), v.astype(np.uint32), key_bits)
    return ks, vs


def run_length_encode(xs):
    """Maximal equal-adjacent runs as (uniques, counts)."""
    a = _as_index_array(xs)
    if a.size == 0:
        return a.copy(), a.copy()
    is_start = np.empty(a.size, dtype=bool)
    is_start[0] = True
    np.not_equal(a[1:], a[:-1], out=is_start[1:])
    starts = np.flatnonzero(is_start)
    counts = np.diff(np.append(starts, a.size))
    return a[starts], counts.astype(np.int64)


def scatter(indices, values, target_len):
    """Write values[i] to out[indices[i]] in a zeroed array of target_len."""
    idx = _as_index_array(indices)
    vals = _as_index_array(values)
    if idx.size != vals.size:
        raise InvariantError("indices and values lengths differ")
    if idx.size and idx.max() >= target_len:
        raise InvariantError("scatter index out of range")
    if np.unique(idx).size != idx.size:
        raise InvariantError("duplicate scatter index")
    out = np.zeros(target_len, dtype=np.int64)
    out[idx] = vals
    return out
