"""Uniform grid spatial partitioning for triangle meshes.

Three construction algorithms (parallel, sorted, compact) that all emit the
same canonical compact grid, plus the data-parallel primitives they are built
from, a DDA traversal for validation, grid statistics, and a benchmark CLI.
"""

from .errors import GridError, InvariantError, ObjParseError, SizeError
from .geometry import Aabb, TriangleMesh, gen_scene, load_obj, mesh_bounds, save_obj, triangle_aabb
from .gridcore import CellBox, CompactGrid, GridSpec, spec_for_mesh
from .builders import BuildReport, build_compact, build_parallel, build_reference, build_sorted
from .stats import GridStats, compute_stats, estimate_pairs
from .traverse import Hit, Ray, brute_force_raycast, dda_traverse

__version__ = "0.1.0"

__all__ = [
    "Aabb",
    "BuildReport",
    "CellBox",
    "CompactGrid",
    "GridError",
    "GridSpec",
    "GridStats",
    "Hit",
    "InvariantError",
    "ObjParseError",
    "Ray",
    "SizeError",
    "TriangleMesh",
    "brute_force_raycast",
    "build_compact",
    "build_parallel",
    "build_reference",
    "build_sorted",
    "compute_stats",
    "dda_traverse",
    "estimate_pairs",
    "gen_scene",
    "load_obj",
    "mesh_bounds",
    "save_obj",
    "spec_for_mesh",
    "triangle_aabb",
]
