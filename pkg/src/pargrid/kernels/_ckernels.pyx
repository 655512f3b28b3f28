# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled implementations of the hot kernels.

Same contracts as pykernels; integer paths are bit-identical and the ray
kernels use the same IEEE-double expression order and tolerances.
"""

from libc.math cimport floor, INFINITY
from libc.string cimport memset

import numpy as np
cimport numpy as cnp

BACKEND_NAME = "c"

cdef double BARY_EPS = 1e-9
cdef double DET_EPS = 1e-12
cdef double T_EPS = 1e-9


def radix_sort_pairs(keys, values, int key_bits):
    """Stable LSD radix sort of (key, value) pairs, 8-bit digits."""
    cdef cnp.uint32_t[::1] k = np.ascontiguousarray(keys, dtype=np.uint32).copy()
    cdef cnp.uint32_t[::1] v = np.ascontiguousarray(values, dtype=np.uint32).copy()
    cdef Py_ssize_t n = k.shape[0]
    cdef cnp.uint32_t[::1] k2 = np.empty(n, dtype=np.uint32)
    cdef cnp.uint32_t[::1] v2 = np.empty(n, dtype=np.uint32)
    cdef long long hist[256]
    cdef long long acc, tmp
    cdef Py_ssize_t i, pos
    cdef int shift, b
    cdef cnp.uint32_t d
    for shift in range(0, key_bits, 8):
        memset(hist, 0, sizeof(hist))
        for i in range(n):
            hist[(k[i] >> shift) & 0xFF] += 1
        acc = 0
        for b in range(256):
            tmp = hist[b]
            hist[b] = acc
            acc += tmp
        for i in range(n):
            d = (k[i] >> shift) & 0xFF
            pos = hist[d]
            hist[d] += 1
            k2[pos] = k[i]
            v2[pos] = v[i]
        k, k2 = k2, k
        v, v2 = v2, v
    return np.asarray(k), np.asarray(v)


def pairgen_sorted(lo, hi, offsets, long long total, dims):
    """One pass per object over its cell box, writing global cell ids."""
    cdef const cnp.int32_t[:, ::1] blo = np.ascontiguousarray(lo, dtype=np.int32)
    cdef const cnp.int32_t[:, ::1] bhi = np.ascontiguousarray(hi, dtype=np.int32)
    cdef const cnp.int64_t[::1] off = np.ascontiguousarray(offsets, dtype=np.int64)
    cdef long long dx = dims[0], dy = dims[1]
    cdef cnp.uint32_t[::1] out = np.empty(total, dtype=np.uint32)
    cdef Py_ssize_t nobj = blo.shape[0]
    cdef Py_ssize_t i
    cdef long long pos, x, y, z
    for i in range(nobj):
        pos = off[i]
        for z in range(blo[i, 2], bhi[i, 2] + 1):
            for y in range(blo[i, 1], bhi[i, 1] + 1):
                for x in range(blo[i, 0], bhi[i, 0] + 1):
                    out[pos] = <cnp.uint32_t> (x + dx * (y + dy * z))
                    pos += 1
    return np.asarray(out)


def compact_count(lo, hi, offsets, long long total, dims, long long ncells):
    """Per-cell object counts (first pass of the compact builder)."""
    cdef const cnp.int32_t[:, ::1] blo = np.ascontiguousarray(lo, dtype=np.int32)
    cdef const cnp.int32_t[:, ::1] bhi = np.ascontiguousarray(hi, dtype=np.int32)
    cdef long long dx = dims[0], dy = dims[1]
    counts_arr = np.zeros(ncells, dtype=np.int64)
    cdef cnp.int64_t[::1] counts = counts_arr
    cdef Py_ssize_t nobj = blo.shape[0]
    cdef Py_ssize_t i
    cdef long long x, y, z
    for i in range(nobj):
        for z in range(blo[i, 2], bhi[i, 2] + 1):
            for y in range(blo[i, 1], bhi[i, 1] + 1):
                for x in range(blo[i, 0], bhi[i, 0] + 1):
                    counts[x + dx * (y + dy * z)] += 1
    return counts_arr


def compact_fill(lo, hi, offsets, long long total, dims, cell_starts):
    """Second compact-builder pass: claim a slot per overlapped cell."""
    cdef const cnp.int32_t[:, ::1] blo = np.ascontiguousarray(lo, dtype=np.int32)
    cdef const cnp.int32_t[:, ::1] bhi = np.ascontiguousarray(hi, dtype=np.int32)
    cdef long long dx = dims[0], dy = dims[1]
    cdef cnp.int64_t[::1] cursor = np.asarray(cell_starts[:-1], dtype=np.int64).copy()
    out_arr = np.empty(total, dtype=np.uint32)
    cdef cnp.uint32_t[::1] out = out_arr
    cdef Py_ssize_t nobj = blo.shape[0]
    cdef Py_ssize_t i
    cdef long long x, y, z, c
    for i in range(nobj):
        for z in range(blo[i, 2], bhi[i, 2] + 1):
            for y in range(blo[i, 1], bhi[i, 1] + 1):
                for x in range(blo[i, 0], bhi[i, 0] + 1):
                    c = x + dx * (y + dy * z)
                    out[cursor[c]] = <cnp.uint32_t> i
                    cursor[c] += 1
    return out_arr


cdef inline double _ray_tri(double ox, double oy, double oz,
                            double dx, double dy, double dz,
                            const double* v0, const double* v1, const double* v2) nogil:
    cdef double e1x = v1[0] - v0[0]
    cdef double e1y = v1[1] - v0[1]
    cdef double e1z = v1[2] - v0[2]
    cdef double e2x = v2[0] - v0[0]
    cdef double e2y = v2[1] - v0[1]
    cdef double e2z = v2[2] - v0[2]
    cdef double px = dy * e2z - dz * e2y
    cdef double py = dz * e2x - dx * e2z
    cdef double pz = dx * e2y - dy * e2x
    cdef double det = e1x * px + e1y * py + e1z * pz
    if -DET_EPS < det < DET_EPS:
        return -1.0
    cdef double inv = 1.0 / det
    cdef double tx = ox - v0[0]
    cdef double ty = oy - v0[1]
    cdef double tz = oz - v0[2]
    cdef double u = (tx * px + ty * py + tz * pz) * inv
    if u < -BARY_EPS or u > 1.0 + BARY_EPS:
        return -1.0
    cdef double qx = ty * e1z - tz * e1y
    cdef double qy = tz * e1x - tx * e1z
    cdef double qz = tx * e1y - ty * e1x
    cdef double v = (dx * qx + dy * qy + dz * qz) * inv
    if v < -BARY_EPS or u + v > 1.0 + BARY_EPS:
        return -1.0
    cdef double t = (e2x * qx + e2y * qy + e2z * qz) * inv
    if t < -T_EPS:
        return -1.0
    return t if t > 0.0 else 0.0


def dda_cast(G, O, verts, tris, blo, bhi, cs, dims, origins, dirs, t_max):
    """Batch DDA traversal; returns (hit ids with -1 for miss, hit ts)."""
    cdef const cnp.uint32_t[::1] g = np.ascontiguousarray(G, dtype=np.uint32)
    cdef const cnp.uint32_t[::1] o_ids = np.ascontiguousarray(O, dtype=np.uint32)
    cdef const double[:, ::1] V = np.ascontiguousarray(verts, dtype=np.float64)
    cdef const cnp.int32_t[:, ::1] T = np.ascontiguousarray(tris, dtype=np.int32)
    cdef const double[::1] lo = np.ascontiguousarray(blo, dtype=np.float64)
    cdef const double[::1] hi = np.ascontiguousarray(bhi, dtype=np.float64)
    cdef const double[::1] cell_size = np.ascontiguousarray(cs, dtype=np.float64)
    cdef long long[3] nd
    nd[0] = dims[0]; nd[1] = dims[1]; nd[2] = dims[2]
    cdef const double[:, ::1] orig = np.ascontiguousarray(origins, dtype=np.float64)
    cdef const double[:, ::1] dirv = np.ascontiguousarray(dirs, dtype=np.float64)
    cdef const double[::1] tmax = np.ascontiguousarray(t_max, dtype=np.float64)

    cdef Py_ssize_t nrays = orig.shape[0]
    ids_arr = np.full(nrays, -1, dtype=np.int64)
    ts_arr = np.full(nrays, np.inf, dtype=np.float64)
    cdef cnp.int64_t[::1] ids = ids_arr
    cdef double[::1] ts = ts_arr

    cdef Py_ssize_t r, slot
    cdef int k, axis, tri, a, b, c3
    cdef long long cid
    cdef long long[3] cell
    cdef int[3] step
    cdef double[3] tnext
    cdef double[3] tdelta
    cdef double t0, t1, ta, tb, p, t_entry, t_exit, t, best_t, ox, oy, oz, dxr, dyr, dzr, tm
    cdef long long best_id, cc
    cdef bint miss

    for r in range(nrays):
        ox = orig[r, 0]; oy = orig[r, 1]; oz = orig[r, 2]
        dxr = dirv[r, 0]; dyr = dirv[r, 1]; dzr = dirv[r, 2]
        tm = tmax[r]
        t0 = 0.0
        t1 = tm
        miss = False
        for k in range(3):
            if dirv[r, k] != 0.0:
                ta = (lo[k] - orig[r, k]) / dirv[r, k]
                tb = (hi[k] - orig[r, k]) / dirv[r, k]
                if ta > tb:
                    ta, tb = tb, ta
                if ta > t0:
                    t0 = ta
                if tb < t1:
                    t1 = tb
            elif orig[r, k] < lo[k] or orig[r, k] > hi[k]:
                miss = True
        if miss or t0 > t1:
            continue
        for k in range(3):
            p = orig[r, k] + dirv[r, k] * t0
            cc = <long long> floor((p - lo[k]) / cell_size[k])
            if cc < 0:
                cc = 0
            if cc > nd[k] - 1:
                cc = nd[k] - 1
            cell[k] = cc
            if dirv[r, k] > 0.0:
                step[k] = 1
                tnext[k] = (lo[k] + (cell[k] + 1) * cell_size[k] - orig[r, k]) / dirv[r, k]
                tdelta[k] = cell_size[k] / dirv[r, k]
            elif dirv[r, k] < 0.0:
                step[k] = -1
                tnext[k] = (lo[k] + cell[k] * cell_size[k] - orig[r, k]) / dirv[r, k]
                tdelta[k] = -cell_size[k] / dirv[r, k]
            else:
                step[k] = 0
                tnext[k] = INFINITY
                tdelta[k] = INFINITY

        best_t = INFINITY
        best_id = -1
        t_entry = t0
        while True:
            t_exit = tnext[0]
            if tnext[1] < t_exit:
                t_exit = tnext[1]
            if tnext[2] < t_exit:
                t_exit = tnext[2]
            cid = cell[0] + nd[0] * (cell[1] + nd[1] * cell[2])
            for slot in range(g[cid], g[cid + 1]):
                tri = <int> o_ids[slot]
                a = T[tri, 0]; b = T[tri, 1]; c3 = T[tri, 2]
                t = _ray_tri(ox, oy, oz, dxr, dyr, dzr, &V[a, 0], &V[b, 0], &V[c3, 0])
                if t < 0.0 or t > tm:
                    continue
                if t < t_entry - T_EPS or t > t_exit + T_EPS:
                    continue
                if t < best_t - T_EPS or ((t - best_t <= T_EPS and best_t - t <= T_EPS)
                                          and (best_id < 0 or tri < best_id)):
                    best_t = t
                    best_id = tri
            if best_id >= 0 and t_exit > best_t + T_EPS:
                break
            if tnext[0] <= tnext[1] and tnext[0] <= tnext[2]:
                axis = 0
            elif tnext[1] <= tnext[2]:
                axis = 1
            else:
                axis = 2
            cell[axis] += step[axis]
            if cell[axis] < 0 or cell[axis] >= nd[axis]:
                break
            t_entry = t_exit
            tnext[axis] += tdelta[axis]
            if t_entry > t1 + T_EPS:
                break
        if best_id >= 0:
            ids[r] = best_id
            ts[r] = best_t
    return ids_arr, ts_arr
