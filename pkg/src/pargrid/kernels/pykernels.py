"""Numpy implementations of the hot kernels.

This is the fallback lane used when the compiled extension is unavailable
(or explicitly disabled). Every function here matches the compiled kernel
bit-for-bit on the integer paths and IEEE-double for the ray kernels.
"""

import math

import numpy as np

BACKEND_NAME = "python"

# Geometric tolerances shared with the compiled lane and the brute-force
# oracle; changing one side breaks DDA/brute-force equivalence.
BARY_EPS = 1e-9
DET_EPS = 1e-12
T_EPS = 1e-9


def radix_sort_pairs(keys, values, key_bits):
    """Stable LSD radix sort of (key, value) pairs, 8-bit digits."""
    k = np.asarray(keys, dtype=np.uint32).copy()
    v = np.asarray(values, dtype=np.uint32).copy()
    for shift in range(0, key_bits, 8):
        digit = ((k >> np.uint32(shift)) & np.uint32(0xFF)).astype(np.uint8)
        # numpy's stable sort on uint8 is itself a counting sort pass
        order = np.argsort(digit, kind="stable")
        k = k[order]
        v = v[order]
    return k, v


def _expand_cells(lo, hi, offsets, total, dims):
    """Global cell ids for every (object, cell) pair in object-major order.

    Each object's cells are enumerated x-fastest within its cell box; the
    flattened result is the sorted builder's pair-generation output.
    """
    if total == 0:
        return np.empty(0, dtype=np.uint32)
    m = (hi - lo + 1).astype(np.int64)
    counts = m.prod(axis=1)
    obj = np.repeat(np.arange(len(lo), dtype=np.int64), counts)
    rel = np.arange(total, dtype=np.int64) - np.repeat(offsets, counts)
    mx = m[obj, 0]
    mxy = mx * m[obj, 1]
    z = rel // mxy
    y = (rel - z * mxy) // mx
    x = rel - mx * (y + m[obj, 1] * z)
    gx = lo[obj, 0] + x
    gy = lo[obj, 1] + y
    gz = lo[obj, 2] + z
    return (gx + dims[0] * (gy + dims[1] * gz)).astype(np.uint32)


def pairgen_sorted(lo, hi, offsets, total, dims):
    return _expand_cells(lo, hi, offsets, total, dims)


def compact_count(lo, hi, offsets, total, dims, ncells):
    """Per-cell object counts (first pass of the compact builder)."""
    cells = _expand_cells(lo, hi, offsets, total, dims)
    return np.bincount(cells, minlength=ncells).astype(np.int64)


def compact_fill(lo, hi, offsets, total, dims, cell_starts):
    """Second compact-builder pass: place object ids into their cell slots.

    Slot claiming is emulated with a stable sort by cell id, which matches a
    sequential cursor walk in object order.
    """
    cells = _expand_cells(lo, hi, offsets, total, dims)
    m = (hi - lo + 1).astype(np.int64)
    obj = np.repeat(np.arange(len(lo), dtype=np.int64), m.prod(axis=1))
    order = np.argsort(cells, kind="stable")
    return obj[order].astype(np.uint32)


def ray_tri(ox, oy, oz, dx, dy, dz, v0, v1, v2):
    """Moller-Trumbore intersection; returns t >= 0 or -1.0 on miss."""
    e1x = v1[0] - v0[0]
    e1y = v1[1] - v0[1]
    e1z = v1[2] - v0[2]
    e2x = v2[0] - v0[0]
    e2y = v2[1] - v0[1]
    e2z = v2[2] - v0[2]
    px = dy * e2z - dz * e2y
    py = dz * e2x - dx * e2z
    pz = dx * e2y - dy * e2x
    det = e1x * px + e1y * py + e1z * pz
    if -DET_EPS < det < DET_EPS:
        return -1.0
    inv = 1.0 / det
    tx = ox - v0[0]
    ty = oy - v0[1]
    tz = oz - v0[2]
    u = (tx * px + ty * py + tz * pz) * inv
    if u < -BARY_EPS or u > 1.0 + BARY_EPS:
        return -1.0
    qx = ty * e1z - tz * e1y
    qy = tz * e1x - tx * e1z
    qz = tx * e1y - ty * e1x
    v = (dx * qx + dy * qy + dz * qz) * inv
    if v < -BARY_EPS or u + v > 1.0 + BARY_EPS:
        return -1.0
    t = (e2x * qx + e2y * qy + e2z * qz) * inv
    if t < -T_EPS:
        return -1.0
    return t if t > 0.0 else 0.0


def _dda_one(G, O, verts, tris, blo, bhi, cs, dims, o, d, t_max):
    # Slab test against the grid bounds.
    t0 = 0.0
    t1 = t_max
    for k in range(3):
        if d[k] != 0.0:
            ta = (blo[k] - o[k]) / d[k]
            tb = (bhi[k] - o[k]) / d[k]
            if ta > tb:
                ta, tb = tb, ta
            if ta > t0:
                t0 = ta
            if tb < t1:
                t1 = tb
        elif o[k] < blo[k] or o[k] > bhi[k]:
            return -1, math.inf
    if t0 > t1:
        return -1, math.inf

    cell = [0, 0, 0]
    step = [0, 0, 0]
    tnext = [math.inf, math.inf, math.inf]
    tdelta = [math.inf, math.inf, math.inf]
    for k in range(3):
        p = o[k] + d[k] * t0
        c = int(math.floor((p - blo[k]) / cs[k]))
        cell[k] = min(max(c, 0), dims[k] - 1)
        if d[k] > 0.0:
            step[k] = 1
            tnext[k] = (blo[k] + (cell[k] + 1) * cs[k] - o[k]) / d[k]
            tdelta[k] = cs[k] / d[k]
        elif d[k] < 0.0:
            step[k] = -1
            tnext[k] = (blo[k] + cell[k] * cs[k] - o[k]) / d[k]
            tdelta[k] = -cs[k] / d[k]

    best_t = math.inf
    best_id = -1
    t_entry = t0
    while True:
        t_exit = min(tnext[0], tnext[1], tnext[2])
        cid = cell[0] + dims[0] * (cell[1] + dims[1] * cell[2])
        for slot in range(G[cid], G[cid + 1]):
            tri = O[slot]
            a, b, c3 = tris[tri]
            t = ray_tri(o[0], o[1], o[2], d[0], d[1], d[2], verts[a], verts[b], verts[c3])
            if t < 0.0 or t > t_max:
                continue
            # mailbox-free rule: only accept hits inside this cell's span
            if t < t_entry - T_EPS or t > t_exit + T_EPS:
                continue
            if t < best_t - T_EPS or (abs(t - best_t) <= T_EPS and (best_id < 0 or tri < best_id)):
                best_t = t
                best_id = int(tri)
        # a later cell can only matter for ties within T_EPS of the best hit
        if best_id >= 0 and t_exit > best_t + T_EPS:
            break
        if tnext[0] <= tnext[1] and tnext[0] <= tnext[2]:
            axis = 0
        elif tnext[1] <= tnext[2]:
            axis = 1
        else:
            axis = 2
        cell[axis] += step[axis]
        if cell[axis] < 0 or cell[axis] >= dims[axis]:
            break
        t_entry = t_exit
        tnext[axis] += tdelta[axis]
        if t_entry > t1 + T_EPS:
            break
    if best_id < 0:
        return -1, math.inf
    return best_id, best_t


def dda_cast(G, O, verts, tris, blo, bhi, cs, dims, origins, dirs, t_max):
    """Batch DDA traversal; returns (hit ids with -1 for miss, hit ts)."""
    n = len(origins)
    ids = np.full(n, -1, dtype=np.int64)
    ts = np.full(n, np.inf, dtype=np.float64)
    for i in range(n):
        hid, t = _dda_one(G, O, verts, tris, blo, bhi, cs, dims, origins[i], dirs[i], float(t_max[i]))
        ids[i] = hid
        ts[i] = t
    return ids, ts
