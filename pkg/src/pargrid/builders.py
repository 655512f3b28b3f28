"""The three grid construction algorithms plus a brute-force reference.

All builders emit the same canonical CompactGrid (ascending object ids per
cell) so their outputs are bit-comparable, and report per-phase wall times
plus per-task work counters for load-balance analysis.
"""

import time
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass, field

import numpy as np

from . import kernels, primitives
from .errors import SizeError
from .gridcore import MAX_IDS, CompactGrid, object_cell_boxes

PHASES = ("count", "scan", "pairgen", "sort", "rle", "finalize")

# The parallel builder's pair-generation task is one relative-to-global
# cell id conversion: two divs, two mods, three adds and a linearize.
# That fixed op count is what its max_task_work reports.
PAIRGEN_OPS_PER_PAIR = 8

# Test hook: when set, build_parallel corrupts one O entry so validation
# harnesses can prove they detect mismatches.
_fault_inject = False

_REFERENCE_GUARD = 10 ** 8  # max cell-object containment tests


@dataclass
class BuildReport:
    algo: str
    no: int = 0
    max_task_work: int = 0
    total_work: int = 0
    phase_ms: dict = field(default_factory=lambda: {p: 0.0 for p in PHASES})

    @property
    def total_ms(self):
        return sum(self.phase_ms.values())


class _PhaseTimer:
    def __init__(self):
        self.ms = {p: 0.0 for p in PHASES}

    @contextmanager
    def phase(self, name):
        t0 = time.perf_counter()
        yield
        self.ms[name] += (time.perf_counter() - t0) * 1e3


def _cell_boxes(mesh, spec, workers):
    """Per-triangle clamped cell boxes; chunked across threads if asked.

    Chunks are merged in index order, so the result is identical for any
    worker count.
    """
    n = mesh.ntriangles
    if not workers or workers <= 1 or n < 8192:
        return object_cell_boxes(mesh, spec)
    edges = np.linspace(0, n, workers + 1, dtype=np.int64)
    sub = [_SubMesh(mesh, s, e) for s, e in zip(edges[:-1], edges[1:])]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(lambda m: object_cell_boxes(m, spec), sub))
    lo = np.concatenate([p[0] for p in parts])
    hi = np.concatenate([p[1] for p in parts])
    keep = np.concatenate([p[2] for p in parts])
    return lo, hi, keep


class _SubMesh:
    """Triangle-range view used only for chunked box computation."""

    __slots__ = ("vertices", "triangles")

    def __init__(self, mesh, start, end):
        self.vertices = mesh.vertices
        self.triangles = mesh.triangles[start:end]

    @property
    def ntriangles(self):
        return len(self.triangles)


def _count_and_scan(mesh, spec, timer, workers):
    with timer.phase("count"):
        lo, hi, keep = _cell_boxes(mesh, spec, workers)
        kept = np.flatnonzero(keep)
        lo = lo[kept]
        hi = hi[kept]
        counts = (hi.astype(np.int64) - lo + 1).prod(axis=1) if len(kept) else np.zeros(0, np.int64)
    with timer.phase("scan"):
        offsets, no = primitives.exclusive_sum(counts)
        if no > MAX_IDS:
            raise SizeError(f"{no} cell/object pairs exceed 32-bit id space")
    return lo, hi, kept, counts, offsets, no


def _make_cell_ids(rel, obj, lo, hi, dims):
    """Relative-to-global conversion for every pair (O(1) work per pair)."""
    if len(rel) == 0:
        return np.empty(0, dtype=np.int64)
    m = (hi.astype(np.int64) - lo + 1)
    mx = m[obj, 0]
    mxy = mx * m[obj, 1]
    z = rel // mxy
    y = (rel - z * mxy) // mx
    x = rel - mx * (y + m[obj, 1] * z)
    gx = lo[obj, 0] + x
    gy = lo[obj, 1] + y
    gz = lo[obj, 2] + z
    return gx + dims[0] * (gy + dims[1] * gz)


def _finish_sorted_pipeline(spec, timer, c_pairs, o_pairs, kept, no, record):
    """Shared sort -> RLE -> scatter -> scan tail of the pair pipelines."""
    ncells = spec.ncells
    with timer.phase("sort"):
        key_bits = (ncells - 1).bit_length()
        c_sorted, o_sorted = primitives.radix_sort_pairs(c_pairs, o_pairs, key_bits)
    with timer.phase("rle"):
        uniques, run_counts = primitives.run_length_encode(c_sorted)
    with timer.phase("finalize"):
        g_scattered = primitives.scatter(uniques, run_counts, ncells)
        g_offsets, total = primitives.exclusive_sum(g_scattered)
        g = np.empty(ncells + 1, dtype=np.uint32)
        g[:-1] = g_offsets
        g[-1] = total
        o_final = kept[o_sorted.astype(np.int64)].astype(np.uint32)
        if _fault_inject and no:
            o_final = o_final.copy()
            o_final[0] ^= 1
    if record is not None:
        record.update(sorted_c=c_sorted.astype(np.int64), sorted_o=o_sorted.astype(np.int64),
                      rle_uniques=uniques, rle_counts=run_counts, g=g.astype(np.int64))
    return CompactGrid(spec, g, o_final)


def build_parallel(mesh, spec, workers=None, record=None):
    """Pair pipeline with O(1) work per pair in pair generation.

    Pairs are produced from scans alone: group boundaries marked and
    inclusive-scanned into the object id list, a segmented scan yields
    per-object relative cell offsets, and each pair independently converts
    its relative offset to a global cell id. No task ever loops over an
    object's whole cell box.
    """
    timer = _PhaseTimer()
    lo, hi, kept, counts, offsets, no = _count_and_scan(mesh, spec, timer, workers)
    with timer.phase("pairgen"):
        marks = primitives.mark_boundaries(offsets, len(kept), no)
        obj_ids = primitives.inclusive_sum(marks)
        ones = np.ones(no, dtype=np.int64)
        rel_c = primitives.segmented_exclusive_sum(ones, obj_ids)
        global_c = _make_cell_ids(rel_c, obj_ids, lo, hi, spec.dims)
    if record is not None:
        record.update(v=counts.copy(), offsets=offsets.copy(), no=no,
                      obj_ids=obj_ids.copy(), rel_c=rel_c.copy(), global_c=global_c.copy())
    grid = _finish_sorted_pipeline(spec, timer, global_c, obj_ids, kept, no, record)
    report = BuildReport("parallel", no=no,
                         max_task_work=PAIRGEN_OPS_PER_PAIR if no else 0,
                         total_work=PAIRGEN_OPS_PER_PAIR * no,
                         phase_ms=timer.ms)
    return grid, report


def build_sorted(mesh, spec, workers=None, record=None):
    """Sort-based baseline: one pair-generation task per object.

    Each task walks its object's whole cell box, so the largest task does
    maxCellsPerObject writes; that is the load-imbalance this builder is
    instrumented to expose.
    """
    timer = _PhaseTimer()
    lo, hi, kept, counts, offsets, no = _count_and_scan(mesh, spec, timer, workers)
    with timer.phase("pairgen"):
        global_c = kernels.pairgen_sorted(lo, hi, offsets, no, spec.dims).astype(np.int64)
        obj_ids = np.repeat(np.arange(len(kept), dtype=np.int64), counts)
    if record is not None:
        record.update(v=counts.copy(), offsets=offsets.copy(), no=no,
                      obj_ids=obj_ids.copy(), global_c=global_c.copy())
    grid = _finish_sorted_pipeline(spec, timer, global_c, obj_ids, kept, no, record)
    report = BuildReport("sorted", no=no,
                         max_task_work=int(counts.max()) if len(counts) else 0,
                         total_work=no,
                         phase_ms=timer.ms)
    return grid, report


def build_compact(mesh, spec, workers=None):
    """Two-pass counter baseline: count per cell, then claim slots.

    The raw within-cell order depends on insertion order, so the result is
    canonicalized (ids sorted per cell) before returning.
    """
    timer = _PhaseTimer()
    ncells = spec.ncells
    with timer.phase("count"):
        lo, hi, keep = _cell_boxes(mesh, spec, workers)
        kept = np.flatnonzero(keep)
        lo = lo[kept]
        hi = hi[kept]
        counts = (hi.astype(np.int64) - lo + 1).prod(axis=1) if len(kept) else np.zeros(0, np.int64)
        offsets, no = primitives.exclusive_sum(counts)
        if no > MAX_IDS:
            raise SizeError(f"{no} cell/object pairs exceed 32-bit id space")
        cell_counts = kernels.compact_count(lo, hi, offsets, no, spec.dims, ncells)
    with timer.phase("scan"):
        g_offsets, total = primitives.exclusive_sum(cell_counts)
        g = np.empty(ncells + 1, dtype=np.uint32)
        g[:-1] = g_offsets
        g[-1] = total
    with timer.phase("pairgen"):
        o_raw = kernels.compact_fill(lo, hi, offsets, no, spec.dims, g)
    with timer.phase("finalize"):
        o_orig = kept[o_raw.astype(np.int64)]
        slot_cell = np.repeat(np.arange(ncells, dtype=np.int64),
                              np.diff(g.astype(np.int64)))
        order = np.lexsort((o_orig, slot_cell))
        o_final = o_orig[order].astype(np.uint32)
    grid = CompactGrid(spec, g, o_final)
    report = BuildReport("compact", no=no,
                         max_task_work=int(counts.max()) if len(counts) else 0,
                         total_work=2 * no,
                         phase_ms=timer.ms)
    return grid, report


def build_reference(mesh, spec):
    """Oracle: containment-test every (cell, object) combination directly."""
    ncells = spec.ncells
    lo, hi, keep = object_cell_boxes(mesh, spec)
    kept = np.flatnonzero(keep)
    lo = lo[kept].astype(np.int64)
    hi = hi[kept].astype(np.int64)
    if ncells * max(len(kept), 1) > _REFERENCE_GUARD:
        raise SizeError("reference builder guard exceeded")
    dx, dy, _ = spec.dims
    o_parts = []
    cell_counts = np.zeros(ncells, dtype=np.int64)
    chunk = max(1, min(ncells, _REFERENCE_GUARD // max(len(kept), 1), 1 << 14))
    for start in range(0, ncells, chunk):
        ids = np.arange(start, min(start + chunk, ncells), dtype=np.int64)
        cx = ids % dx
        cy = (ids // dx) % dy
        cz = ids // (dx * dy)
        inside = ((lo[None, :, 0] <= cx[:, None]) & (cx[:, None] <= hi[None, :, 0])
                  & (lo[None, :, 1] <= cy[:, None]) & (cy[:, None] <= hi[None, :, 1])
                  & (lo[None, :, 2] <= cz[:, None]) & (cz[:, None] <= hi[None, :, 2]))
        ci, ti = np.nonzero(inside)  # row-major: canonical cell then id order
        o_parts.append(kept[ti])
        cell_counts[start:start + len(ids)] = inside.sum(axis=1)
    o = np.concatenate(o_parts) if o_parts else np.zeros(0, dtype=np.int64)
    g = np.zeros(ncells + 1, dtype=np.uint32)
    g[1:] = np.cumsum(cell_counts)
    return CompactGrid(spec, g, o.astype(np.uint32))
