"""Grid attribute statistics and the 4-byte-per-entry memory model."""

from dataclasses import dataclass

import numpy as np

from .gridcore import object_cell_boxes

MB = float(1 << 20)


@dataclass(frozen=True)
class GridStats:
    ntriangles: int
    dims: tuple
    ncells: int
    no: int
    pct_empty: float
    avg_items_per_nonempty_cell: float
    max_cells_per_item: int
    avg_cells_per_item: float
    memory_bytes: int

    @property
    def memory_mb(self):
        return self.memory_bytes / MB


def grid_memory_bytes(ncells, no):
    """4-byte entries for the offset array (with its end sentinel) and the
    object-id array."""
    return 4 * (ncells + 1) + 4 * no


def estimate_pairs(ntriangles, avg_cells_per_item):
    """Expected pair count from object count and mean cell coverage."""
    if ntriangles < 0 or avg_cells_per_item < 0:
        raise ValueError("inputs must be non-negative")
    return int(round(ntriangles * avg_cells_per_item))


def compute_stats(grid, mesh):
    """Attribute set for a built grid; cells-per-item figures cover in-grid
    objects only, consistent with the pair count."""
    ncells = grid.spec.ncells
    g = grid.G.astype(np.int64)
    widths = np.diff(g)
    nonempty = int(np.count_nonzero(widths))
    no = grid.no
    lo, hi, keep = object_cell_boxes(mesh, grid.spec)
    kept = np.flatnonzero(keep)
    cells_per_item = (hi[kept].astype(np.int64) - lo[kept] + 1).prod(axis=1)
    n_in_grid = len(kept)
    return GridStats(
        ntriangles=mesh.ntriangles,
        dims=grid.spec.dims,
        ncells=ncells,
        no=no,
        pct_empty=100.0 * (ncells - nonempty) / ncells,
        avg_items_per_nonempty_cell=no / nonempty if nonempty else 0.0,
        max_cells_per_item=int(cells_per_item.max()) if n_in_grid else 0,
        avg_cells_per_item=no / n_in_grid if n_in_grid else 0.0,
        memory_bytes=grid_memory_bytes(ncells, no),
    )
