"""DDA grid traversal and the brute-force ray caster it is validated against.

This module exists to check built grids end to end: for any ray, walking
the grid must find the same nearest hit as testing every triangle.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import InvariantError
from .kernels import pykernels

T_EPS = pykernels.T_EPS


@dataclass(frozen=True)
class Ray:
    origin: tuple
    direction: tuple
    t_max: float = math.inf

    def __post_init__(self):
        d = np.asarray(self.direction, dtype=np.float64)
        n = float(np.linalg.norm(d))
        if abs(n - 1.0) > 1e-9:
            raise InvariantError("ray direction must be unit length")
        if not self.t_max > 0:
            raise InvariantError("t_max must be positive")


@dataclass(frozen=True)
class Hit:
    triangle_id: int
    t: float


def ray_triangle(ray, v0, v1, v2):
    """Nearest non-negative intersection parameter, or None.

    Edge hits within 1e-9 barycentric tolerance count as hits.
    """
    o = np.asarray(ray.origin, dtype=np.float64)
    d = np.asarray(ray.direction, dtype=np.float64)
    t = pykernels.ray_tri(o[0], o[1], o[2], d[0], d[1], d[2],
                          np.asarray(v0, dtype=np.float64),
                          np.asarray(v1, dtype=np.float64),
                          np.asarray(v2, dtype=np.float64))
    return None if t < 0.0 else t


def dda_cells(spec, ray):
    """Cells pierced by a ray, front to back (used by tests and the
    pure-python traversal)."""
    o = np.asarray(ray.origin, dtype=np.float64)
    d = np.asarray(ray.direction, dtype=np.float64)
    blo, bhi = spec.bounds.lo, spec.bounds.hi
    t0, t1 = 0.0, ray.t_max
    for k in range(3):
        if d[k] != 0.0:
            ta = (blo[k] - o[k]) / d[k]
            tb = (bhi[k] - o[k]) / d[k]
            if ta > tb:
                ta, tb = tb, ta
            t0 = max(t0, ta)
            t1 = min(t1, tb)
        elif o[k] < blo[k] or o[k] > bhi[k]:
            return
    if t0 > t1:
        return
    cell = [0, 0, 0]
    step = [0, 0, 0]
    tnext = [math.inf] * 3
    tdelta = [math.inf] * 3
    cs = spec.cell_size
    for k in range(3):
        p = o[k] + d[k] * t0
        cell[k] = min(max(int(math.floor((p - blo[k]) / cs[k])), 0), spec.dims[k] - 1)
        if d[k] > 0.0:
            step[k] = 1
            tnext[k] = (blo[k] + (cell[k] + 1) * cs[k] - o[k]) / d[k]
            tdelta[k] = cs[k] / d[k]
        elif d[k] < 0.0:
            step[k] = -1
            tnext[k] = (blo[k] + cell[k] * cs[k] - o[k]) / d[k]
            tdelta[k] = -cs[k] / d[k]
    t_entry = t0
    while True:
        t_exit = min(tnext)
        yield tuple(cell), t_entry, t_exit
        axis = tnext.index(t_exit)
        cell[axis] += step[axis]
        if cell[axis] < 0 or cell[axis] >= spec.dims[axis]:
            return
        t_entry = t_exit
        tnext[axis] += tdelta[axis]
        if t_entry > t1 + T_EPS:
            return


def dda_traverse(grid, mesh, ray):
    """Nearest hit found by walking the grid; None on a miss."""
    ids, ts = dda_cast(grid, mesh,
                       np.asarray([ray.origin], dtype=np.float64),
                       np.asarray([ray.direction], dtype=np.float64),
                       np.asarray([ray.t_max], dtype=np.float64))
    if ids[0] < 0:
        return None
    return Hit(int(ids[0]), float(ts[0]))


def dda_cast(grid, mesh, origins, directions, t_max):
    """Batch traversal over many rays; returns (ids, ts) with id -1 on miss."""
    spec = grid.spec
    return kernels.dda_cast(grid.G, grid.O, mesh.vertices, mesh.triangles,
                            spec.bounds.lo, spec.bounds.hi, spec.cell_size,
                            spec.dims, origins, directions, t_max)


def brute_force_raycast(mesh, ray):
    """Min-t intersection over all triangles; t ties within 1e-9 go to the
    lowest triangle id."""
    ids, ts = brute_force_cast(mesh,
                               np.asarray([ray.origin], dtype=np.float64),
                               np.asarray([ray.direction], dtype=np.float64),
                               np.asarray([ray.t_max], dtype=np.float64))
    if ids[0] < 0:
        return None
    return Hit(int(ids[0]), float(ts[0]))


def brute_force_cast(mesh, origins, directions, t_max):
    """Vectorized all-triangles reference caster (the traversal oracle)."""
    tris = mesh.triangles
    n = len(origins)
    out_ids = np.full(n, -1, dtype=np.int64)
    out_ts = np.full(n, np.inf, dtype=np.float64)
    if len(tris) == 0:
        return out_ids, out_ts
    v0 = mesh.vertices[tris[:, 0]]
    e1 = mesh.vertices[tris[:, 1]] - v0
    e2 = mesh.vertices[tris[:, 2]] - v0
    for i in range(n):
        o = origins[i]
        d = directions[i]
        p = np.cross(np.broadcast_to(d, e2.shape), e2)
        det = np.einsum("ij,ij->i", e1, p)
        ok = np.abs(det) >= pykernels.DET_EPS
        inv = np.where(ok, 1.0 / np.where(ok, det, 1.0), 0.0)
        tv = o - v0
        u = np.einsum("ij,ij->i", tv, p) * inv
        ok &= (u >= -pykernels.BARY_EPS) & (u <= 1.0 + pykernels.BARY_EPS)
        q = np.cross(tv, e1)
        v = (q @ d) * inv
        ok &= (v >= -pykernels.BARY_EPS) & (u + v <= 1.0 + pykernels.BARY_EPS)
        t = np.einsum("ij,ij->i", e2, q) * inv
        ok &= t >= -pykernels.T_EPS
        t = np.maximum(t, 0.0)
        ok &= t <= t_max[i]
        if not ok.any():
            continue
        tt = np.where(ok, t, np.inf)
        tmin = tt.min()
        cand = np.flatnonzero(tt <= tmin + T_EPS)
        best = int(cand[0])  # lowest id among near-ties
        out_ids[i] = best
        out_ts[i] = float(tt[best])
    return out_ids, out_ts
