"""Grid specification, cell indexing arithmetic and the compact grid type.

Cell linearization is x-fastest everywhere: cell_id = x + dims.x*(y + dims.y*z).
"""

import numpy as np

from .errors import InvariantError, SizeError
from .geometry import Aabb, mesh_bounds

MAX_IDS = (1 << 32) - 1  # cells and pairs must fit 32-bit id storage

# relative padding applied to scene bounds so boundary vertices land
# strictly inside the grid
BOUNDS_PAD = 1e-6


class CellBox:
    """Inclusive integer cell-coordinate box of an object within the grid."""

    __slots__ = ("lo", "hi")

    def __init__(self, lo, hi):
        self.lo = tuple(int(v) for v in lo)
        self.hi = tuple(int(v) for v in hi)
        if any(a > b for a, b in zip(self.lo, self.hi)) or any(v < 0 for v in self.lo):
            raise InvariantError("CellBox requires 0 <= lo <= hi")

    def __eq__(self, other):
        return isinstance(other, CellBox) and self.lo == other.lo and self.hi == other.hi

    def __repr__(self):
        return f"CellBox({self.lo}, {self.hi})"


class GridSpec:
    """World bounds plus integer resolution; cell extents are derived."""

    __slots__ = ("bounds", "dims", "cell_size")

    def __init__(self, bounds, dims):
        self.bounds = bounds
        self.dims = tuple(int(d) for d in dims)
        if len(self.dims) != 3 or any(d < 1 for d in self.dims):
            raise InvariantError("dims must be three positive integers")
        cell_count(self.dims)  # 32-bit id space check
        ext = bounds.hi - bounds.lo
        if np.any(ext <= 0):
            raise InvariantError("grid bounds must have positive extent per axis")
        self.cell_size = ext / np.array(self.dims, dtype=np.float64)

    @property
    def ncells(self):
        return self.dims[0] * self.dims[1] * self.dims[2]

    def __repr__(self):
        return f"GridSpec(dims={self.dims}, bounds={self.bounds})"


class CompactGrid:
    """Offset array G (ncells+1, G[-1] = NO) plus concatenated object ids O.

    Canonical form: object ids strictly ascending within each cell, which
    makes grids from different builders directly comparable.
    """

    __slots__ = ("spec", "G", "O")

    def __init__(self, spec, G, O):
        self.spec = spec
        self.G = np.ascontiguousarray(G, dtype=np.uint32)
        self.O = np.ascontiguousarray(O, dtype=np.uint32)
        if len(self.G) != spec.ncells + 1:
            raise InvariantError("G must have ncells + 1 entries")
        if self.G[0] != 0 or self.G[-1] != len(self.O):
            raise InvariantError("G must start at 0 and end at NO")
        self.G.setflags(write=False)
        self.O.setflags(write=False)

    @property
    def no(self):
        return len(self.O)

    def __repr__(self):
        return f"CompactGrid({self.spec!r}, NO={self.no})"


def cell_count(dims):
    n = 1
    for d in dims:
        if d < 1:
            raise InvariantError("dims must be positive")
        n *= int(d)
    if n > MAX_IDS:
        raise SizeError(f"{n} cells exceed 32-bit id space")
    return n


def linearize(coords, dims):
    x, y, z = (int(v) for v in coords)
    if not (0 <= x < dims[0] and 0 <= y < dims[1] and 0 <= z < dims[2]):
        raise InvariantError(f"coords {coords} outside dims {tuple(dims)}")
    return x + dims[0] * (y + dims[1] * z)


def box_cell_count(box):
    return ((box.hi[0] - box.lo[0] + 1)
            * (box.hi[1] - box.lo[1] + 1)
            * (box.hi[2] - box.lo[2] + 1))


def global_coords(box, rid):
    """Map a relative cell offset inside a CellBox to grid coordinates.

    Cells are enumerated x-fastest, so rid 0 is box.lo and the last offset
    is box.hi.
    """
    if not 0 <= rid < box_cell_count(box):
        raise InvariantError(f"relative offset {rid} out of range")
    mx = box.hi[0] - box.lo[0] + 1
    my = box.hi[1] - box.lo[1] + 1
    z = rid // (mx * my)
    y = (rid - z * mx * my) // mx
    x = rid - mx * (y + my * z)
    return (box.lo[0] + x, box.lo[1] + y, box.lo[2] + z)


def object_cell_box(aabb, spec):
    """Clamped cell box overlapped by an AABB, or None when disjoint.

    A coordinate exactly on the max face floors past the last cell and is
    clamped back in, so boundary-touching boxes stay inside the grid.
    """
    blo, bhi = spec.bounds.lo, spec.bounds.hi
    if np.any(aabb.hi < blo) or np.any(aabb.lo > bhi):
        return None
    lo = np.floor((aabb.lo - blo) / spec.cell_size).astype(np.int64)
    hi = np.floor((aabb.hi - blo) / spec.cell_size).astype(np.int64)
    dims = np.array(spec.dims, dtype=np.int64)
    lo = np.clip(lo, 0, dims - 1)
    hi = np.clip(hi, 0, dims - 1)
    return CellBox(lo, hi)


def object_cell_boxes(mesh, spec):
    """Vectorized cell boxes for every triangle.

    Returns (lo, hi, keep): int32 (n,3) clamped boxes and a bool mask that
    is False for triangles whose AABB misses the grid bounds. Rows where
    keep is False are left as a degenerate box at the origin.
    """
    if mesh.ntriangles == 0:
        z = np.zeros((0, 3), dtype=np.int32)
        return z, z.copy(), np.zeros(0, dtype=bool)
    corners = mesh.vertices[mesh.triangles]  # (n, 3, 3)
    alo = corners.min(axis=1)
    ahi = corners.max(axis=1)
    blo, bhi = spec.bounds.lo, spec.bounds.hi
    keep = np.all(ahi >= blo, axis=1) & np.all(alo <= bhi, axis=1)
    dims = np.array(spec.dims, dtype=np.int64)
    lo = np.floor((alo - blo) / spec.cell_size).astype(np.int64)
    hi = np.floor((ahi - blo) / spec.cell_size).astype(np.int64)
    np.clip(lo, 0, dims - 1, out=lo)
    np.clip(hi, 0, dims - 1, out=hi)
    lo[~keep] = 0
    hi[~keep] = 0
    return lo.astype(np.int32), hi.astype(np.int32), keep


def compute_dims(bounds, ntriangles, density):
    """Resolution heuristic: about `density` cells per triangle by volume."""
    if ntriangles < 1:
        raise InvariantError("need at least one triangle")
    ext = (bounds.hi - bounds.lo).astype(np.float64)
    maxext = float(ext.max())
    if maxext <= 0:
        return (1, 1, 1)
    ext = np.maximum(ext, BOUNDS_PAD * maxext)
    volume = float(ext.prod())
    scale = (density * ntriangles / volume) ** (1.0 / 3.0)
    dims = np.maximum(1, np.floor(ext * scale + 0.5).astype(np.int64))
    return tuple(int(d) for d in dims)


def spec_for_mesh(mesh, dims=None, density=5.0):
    """Grid spec over padded mesh bounds; dims from the density heuristic
    unless given explicitly."""
    b = mesh_bounds(mesh)
    ext = b.hi - b.lo
    maxext = float(ext.max())
    pad = BOUNDS_PAD * maxext if maxext > 0 else BOUNDS_PAD
    lo = b.lo - pad
    hi = b.hi + pad
    hi = np.maximum(hi, lo + 2 * pad)  # degenerate axes get a sliver of width
    padded = Aabb(lo, hi)
    if dims is None:
        dims = compute_dims(padded, mesh.ntriangles, density)
    return GridSpec(padded, dims)


def cell_objects(grid, cell_id):
    """Object ids stored in one cell."""
    if not 0 <= cell_id < grid.spec.ncells:
        raise InvariantError(f"cell {cell_id} out of range")
    return grid.O[grid.G[cell_id]:grid.G[cell_id + 1]]


def grids_equal(a, b):
    return (a.spec.dims == b.spec.dims
            and np.array_equal(a.G, b.G)
            and np.array_equal(a.O, b.O))
