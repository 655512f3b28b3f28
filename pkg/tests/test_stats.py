import numpy as np
import pytest

from pargrid import build_parallel, compute_stats, estimate_pairs, gen_scene, spec_for_mesh
from pargrid.geometry import Aabb, TriangleMesh
from pargrid.gridcore import GridSpec, box_cell_count, object_cell_box
from pargrid.geometry import triangle_aabb
from pargrid.stats import MB, grid_memory_bytes

# published grid attribute rows used as fixed checks: (ntris, dims, avg
# cells/item, expected MB)
FAIRY = (172_170, (141, 37, 141), 3.88, 5.35)
SAN_MIGUEL = (10_480_000, (565, 116, 648), 1.65, 228.03)


def test_estimate_pairs():
    assert estimate_pairs(172_170, 3.88) == 668_020
    assert estimate_pairs(12345, 1.0) == 12345
    assert estimate_pairs(0, 99.0) == 0


@pytest.mark.parametrize("ntris,dims,avg,mb", [FAIRY, SAN_MIGUEL])
def test_memory_model_reproduces_published_mb(ntris, dims, avg, mb):
    ncells = dims[0] * dims[1] * dims[2]
    no = estimate_pairs(ntris, avg)
    got_mb = grid_memory_bytes(ncells, no) / MB
    assert got_mb == pytest.approx(mb, rel=0.005)


def test_fairy_memory_bytes_exact():
    no = estimate_pairs(FAIRY[0], FAIRY[2])
    assert no == 668_020
    assert grid_memory_bytes(735_597, no) == 5_614_472


def test_compute_stats_small_grid():
    mesh = gen_scene("uniform", 300, 21)
    spec = spec_for_mesh(mesh, dims=(6, 6, 6))
    grid, report = build_parallel(mesh, spec)
    st = compute_stats(grid, mesh)
    assert st.ntriangles == 300
    assert st.ncells == 216
    assert st.no == report.no
    assert 0 <= st.pct_empty <= 100
    assert st.memory_bytes == 4 * 217 + 4 * st.no

    # independent recomputation from mesh + spec
    nonempty = int(np.count_nonzero(np.diff(grid.G.astype(np.int64))))
    boxes = [object_cell_box(triangle_aabb(mesh, i), spec) for i in range(300)]
    cells = [box_cell_count(b) for b in boxes if b is not None]
    assert st.max_cells_per_item == max(cells)
    assert st.avg_cells_per_item == pytest.approx(sum(cells) / len(cells))
    assert st.avg_items_per_nonempty_cell * nonempty == pytest.approx(st.no)
    assert st.avg_cells_per_item * len(cells) == pytest.approx(st.no)
    assert st.pct_empty == pytest.approx(100 * (216 - nonempty) / 216)


def test_empty_grid_stats():
    spec = GridSpec(Aabb([0, 0, 0], [1, 1, 1]), (3, 3, 3))
    mesh = TriangleMesh(np.zeros((0, 3)), np.zeros((0, 3), np.int32))
    grid, _ = build_parallel(mesh, spec)
    st = compute_stats(grid, mesh)
    assert st.pct_empty == 100.0
    assert st.no == 0
    assert st.memory_bytes == 4 * (27 + 1)
    assert st.avg_items_per_nonempty_cell == 0.0


def test_estimate_pairs_rejects_negative():
    with pytest.raises(ValueError):
        estimate_pairs(-1, 1.0)
