"""Triangle meshes, OBJ I/O, bounding boxes and synthetic benchmark scenes."""

import numpy as np

from .errors import InvariantError, ObjParseError

# splitmix64 constants (Steele et al. mixer). The generators below are
# counter-based on this finalizer so scenes are bit-identical everywhere.
_SM64_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_SM64_M1 = np.uint64(0xBF58476D1CE4E5B9)
_SM64_M2 = np.uint64(0x94D049BB133111EB)


class Aabb:
    """Axis-aligned box, lo <= hi component-wise."""

    __slots__ = ("lo", "hi")

    def __init__(self, lo, hi):
        self.lo = np.asarray(lo, dtype=np.float64)
        self.hi = np.asarray(hi, dtype=np.float64)
        if self.lo.shape != (3,) or self.hi.shape != (3,):
            raise InvariantError("Aabb corners must be 3-D points")
        if np.any(np.isnan(self.lo)) or np.any(np.isnan(self.hi)):
            raise InvariantError("Aabb corners must not be NaN")
        if np.any(self.lo > self.hi):
            raise InvariantError("Aabb requires lo <= hi")

    def __repr__(self):
        return f"Aabb({self.lo.tolist()}, {self.hi.tolist()})"


class TriangleMesh:
    """Immutable vertex/triangle soup. Degenerate triangles are allowed."""

    __slots__ = ("vertices", "triangles")

    def __init__(self, vertices, triangles):
        self.vertices = np.ascontiguousarray(vertices, dtype=np.float64).reshape(-1, 3)
        self.triangles = np.ascontiguousarray(triangles, dtype=np.int32).reshape(-1, 3)
        if self.triangles.size:
            if self.triangles.min() < 0 or self.triangles.max() >= len(self.vertices):
                raise InvariantError("triangle index out of range")
        self.vertices.setflags(write=False)
        self.triangles.setflags(write=False)

    @property
    def ntriangles(self):
        return len(self.triangles)

    def __repr__(self):
        return f"TriangleMesh({len(self.vertices)} vertices, {len(self.triangles)} triangles)"


def mesh_bounds(mesh):
    """Tight bounds over all vertices."""
    if len(mesh.vertices) == 0:
        raise InvariantError("cannot bound an empty mesh")
    return Aabb(mesh.vertices.min(axis=0), mesh.vertices.max(axis=0))


def triangle_aabb(mesh, tri_index):
    v = mesh.vertices[mesh.triangles[tri_index]]
    return Aabb(v.min(axis=0), v.max(axis=0))


def _parse_face_index(token, nverts, line_number):
    first = token.split("/")[0]
    try:
        idx = int(first)
    except ValueError:
        raise ObjParseError(f"bad face index {token!r}", line_number) from None
    if idx > 0:
        idx -= 1
    elif idx < 0:
        idx += nverts
    else:
        raise ObjParseError("face index 0 is not valid", line_number)
    if not 0 <= idx < nverts:
        raise ObjParseError(f"face index {first} out of range", line_number)
    return idx


def load_obj(path):
    """Load the v/f subset of a Wavefront OBJ file.

    Handles 1-based and negative indices, v/vt/vn slash forms, and
    fan-triangulates polygons. Everything else is skipped.
    """
    vertices = []
    triangles = []
    with open(path, "r", encoding="utf-8", errors="replace") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if parts[0] == "v":
                if len(parts) < 4:
                    raise ObjParseError("vertex needs 3 coordinates", lineno)
                try:
                    vertices.append((float(parts[1]), float(parts[2]), float(parts[3])))
                except ValueError:
                    raise ObjParseError("bad vertex coordinate", lineno) from None
            elif parts[0] == "f":
                if len(parts) < 4:
                    raise ObjParseError("face needs at least 3 vertices", lineno)
                idx = [_parse_face_index(tok, len(vertices), lineno) for tok in parts[1:]]
                for i in range(1, len(idx) - 1):
                    triangles.append((idx[0], idx[i], idx[i + 1]))
    return TriangleMesh(np.array(vertices, dtype=np.float64).reshape(-1, 3),
                        np.array(triangles, dtype=np.int32).reshape(-1, 3))


def save_obj(mesh, path):
    """Write a mesh as OBJ (v and f lines only)."""
    with open(path, "w", encoding="utf-8") as fh:
        for v in mesh.vertices:
            fh.write(f"v {float(v[0])!r} {float(v[1])!r} {float(v[2])!r}\n")
        for t in mesh.triangles:
            fh.write(f"f {t[0] + 1} {t[1] + 1} {t[2] + 1}\n")


def _sm64_mix(x):
    z = x.copy()
    z ^= z >> np.uint64(30)
    z *= _SM64_M1
    z ^= z >> np.uint64(27)
    z *= _SM64_M2
    z ^= z >> np.uint64(31)
    return z


def _uniforms(seed, count, stream=0):
    """count doubles in [0, 1) from a counter-based splitmix64 stream."""
    base = np.uint64((seed * 0x632BE59BD9B4E019 + stream) & 0xFFFFFFFFFFFFFFFF)
    ctr = np.arange(1, count + 1, dtype=np.uint64) * _SM64_GAMMA + base
    bits = _sm64_mix(ctr)
    return (bits >> np.uint64(11)).astype(np.float64) * (2.0 ** -53)


def _small_triangles(n, seed, stream, size):
    centers = _uniforms(seed, 3 * n, stream).reshape(n, 3) * (1.0 - size) + size / 2
    jitter = (_uniforms(seed, 9 * n, stream + 1).reshape(n, 3, 3) - 0.5) * size
    return centers[:, None, :] + jitter


def gen_scene(kind, n, seed):
    """Deterministic synthetic scene with n triangles in the unit cube.

    kinds:
      uniform - similar small triangles, uniformly placed (homogeneous).
      skewed  - tiny triangles plus a few very large ones; the first large
                triangle spans the whole cube, stressing per-object load
                imbalance.
      walls   - axis-aligned quads split into triangles plus small clutter,
                an architectural-style mix of dissimilar sizes.
    """
    if n < 1:
        raise InvariantError("scene needs at least one triangle")
    if kind == "uniform":
        size = min(0.05, 0.6 * n ** (-1.0 / 3.0))
        tris = _small_triangles(n, seed, 10, size)
    elif kind == "skewed":
        k = max(1, n // 10000)
        k = min(k, n)
        tiny = _small_triangles(n - k, seed, 20, 0.01) if n > k else np.empty((0, 3, 3))
        big = np.empty((k, 3, 3))
        # one full-extent triangle pins the scene bounds to the unit cube
        big[0] = [(0.0, 0.0, 0.0), (1.0, 1.0, 0.0), (1.0, 0.0, 1.0)]
        if k > 1:
            m = k - 1
            h = 0.15 + 0.25 * _uniforms(seed, m, 22)
            c = _uniforms(seed, 3 * m, 23).reshape(m, 3)
            c = h[:, None] + c * (1.0 - 2.0 * h[:, None])
            big[1:, 0] = c + np.stack([-h, -h, -h], axis=1)
            big[1:, 1] = c + np.stack([h, h, -h], axis=1)
            big[1:, 2] = c + np.stack([h, -h, h], axis=1)
        tris = np.concatenate([big, tiny], axis=0)
    elif kind == "walls":
        nquads = min(max(1, n // 10), n // 2)
        wall_tris = 2 * nquads
        walls = np.empty((wall_tris, 3, 3))
        if nquads:
            u = _uniforms(seed, 8 * nquads, 30).reshape(nquads, 8)
            axis = (u[:, 0] * 3).astype(np.int64)
            for q in range(nquads):
                a = axis[q]
                b, c = (a + 1) % 3, (a + 2) % 3
                pos = u[q, 1]
                lo1 = u[q, 2] * 0.6
                hi1 = lo1 + 0.3 + u[q, 3] * (1.0 - lo1 - 0.3)
                lo2 = u[q, 4] * 0.6
                hi2 = lo2 + 0.3 + u[q, 5] * (1.0 - lo2 - 0.3)
                corners = np.zeros((4, 3))
                corners[:, a] = pos
                corners[:, b] = [lo1, hi1, hi1, lo1]
                corners[:, c] = [lo2, lo2, hi2, hi2]
                walls[2 * q] = corners[[0, 1, 2]]
                walls[2 * q + 1] = corners[[0, 2, 3]]
        nclutter = n - wall_tris
        clutter = _small_triangles(nclutter, seed, 31, 0.02) if nclutter else np.empty((0, 3, 3))
        tris = np.concatenate([walls, clutter], axis=0)
    else:
        raise InvariantError(f"unknown scene kind {kind!r}")
    nt = len(tris)
    return TriangleMesh(tris.reshape(nt * 3, 3), np.arange(nt * 3, dtype=np.int32).reshape(nt, 3))
