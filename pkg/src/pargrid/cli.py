"""Benchmark and validation command line.

Subcommands: build (phase-timed construction benchmark), stats (grid
attribute row), validate (builder equivalence + traversal-vs-brute-force),
raycast (grid-accelerated casting), gen (write a synthetic scene as OBJ).
Exit codes: 0 success, 1 validation failure, 2 usage or I/O error.
"""

import argparse
import statistics
import sys

import numpy as np

from . import builders, kernels
from .errors import GridError
from .geometry import _uniforms, gen_scene, load_obj, save_obj
from .gridcore import grids_equal, spec_for_mesh
from .stats import compute_stats
from .traverse import brute_force_cast, dda_cast

BUILD_COLUMNS = ("scene,algo,ntris,dims,ncells,NO,pct_empty,avg_items_nonempty,"
                 "max_cells_item,avg_cells_item,memory_bytes,count_ms,scan_ms,"
                 "pairgen_ms,sort_ms,rle_ms,finalize_ms,total_ms_median,"
                 "total_ms_min,max_task_work").split(",")

STATS_COLUMNS = ("scene,ntris,dims,ncells,NO,pct_empty,avg_items_nonempty,"
                 "max_cells_item,avg_cells_item,memory_bytes").split(",")

ALGORITHMS = {
    "parallel": builders.build_parallel,
    "sorted": builders.build_sorted,
    "compact": builders.build_compact,
}

VALIDATE_KINDS = ("uniform", "skewed", "walls")


def _parse_dims(text):
    parts = text.lower().split("x")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("dims must look like 141x37x141")
    try:
        dims = tuple(int(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError("dims must be integers") from None
    if any(d < 1 for d in dims):
        raise argparse.ArgumentTypeError("dims must be positive")
    return dims


def _parse_gen(text):
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("generator spec must look like uniform:100000:7")
    kind, n, seed = parts[0], parts[1], parts[2]
    try:
        return kind, int(n), int(seed)
    except ValueError:
        raise argparse.ArgumentTypeError("generator count and seed must be integers") from None


def _load_scene(args):
    if args.mesh is not None:
        return load_obj(args.mesh), args.mesh
    if args.gen is not None:
        kind, n, seed = args.gen
        return gen_scene(kind, n, seed), f"{kind}:{n}:{seed}"
    raise GridError("one of --mesh or --gen is required")


def _make_spec(mesh, args):
    if args.dims is not None:
        return spec_for_mesh(mesh, dims=args.dims)
    return spec_for_mesh(mesh, density=args.density)


def _emit(rows, columns, fmt, out):
    if fmt == "md":
        lines = ["| " + " | ".join(columns) + " |",
                 "|" + "|".join("---" for _ in columns) + "|"]
        lines += ["| " + " | ".join(str(r[c]) for c in columns) + " |" for r in rows]
    else:
        lines = [",".join(columns)]
        lines += [",".join(str(r[c]) for c in columns) for r in rows]
    text = "\n".join(lines) + "\n"
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _fmt_ms(x):
    return f"{x:.3f}"


def _stats_fields(scene, mesh, grid):
    st = compute_stats(grid, mesh)
    return {
        "scene": scene,
        "ntris": st.ntriangles,
        "dims": "x".join(str(d) for d in st.dims),
        "ncells": st.ncells,
        "NO": st.no,
        "pct_empty": f"{st.pct_empty:.2f}",
        "avg_items_nonempty": f"{st.avg_items_per_nonempty_cell:.2f}",
        "max_cells_item": st.max_cells_per_item,
        "avg_cells_item": f"{st.avg_cells_per_item:.2f}",
        "memory_bytes": st.memory_bytes,
    }


def cmd_build(args):
    mesh, scene = _load_scene(args)
    spec = _make_spec(mesh, args)
    rows = []
    for algo in args.algo:
        build = ALGORITHMS[algo]
        reports = []
        grid = None
        for _ in range(args.repeat):
            grid, report = build(mesh, spec, workers=args.workers)
            reports.append(report)
        row = _stats_fields(scene, mesh, grid)
        row["algo"] = algo
        for phase in builders.PHASES:
            row[f"{phase}_ms"] = _fmt_ms(statistics.median(r.phase_ms[phase] for r in reports))
        totals = [r.total_ms for r in reports]
        row["total_ms_median"] = _fmt_ms(statistics.median(totals))
        row["total_ms_min"] = _fmt_ms(min(totals))
        row["max_task_work"] = reports[0].max_task_work
        rows.append(row)
    _emit(rows, BUILD_COLUMNS, args.format, args.out)
    return 0


def cmd_stats(args):
    mesh, scene = _load_scene(args)
    spec = _make_spec(mesh, args)
    grid, _ = builders.build_parallel(mesh, spec, workers=args.workers)
    _emit([_stats_fields(scene, mesh, grid)], STATS_COLUMNS, args.format, args.out)
    return 0


def make_rays(bounds, n, seed):
    """Seeded rays aimed from outside the bounds at interior targets."""
    center = (bounds.lo + bounds.hi) / 2
    radius = float(np.linalg.norm(bounds.hi - bounds.lo)) * 1.2 + 1e-3
    u = _uniforms(seed, 5 * n, 101).reshape(n, 5)
    phi = 2 * np.pi * u[:, 0]
    cos_th = 2 * u[:, 1] - 1
    sin_th = np.sqrt(np.maximum(0.0, 1 - cos_th ** 2))
    origins = center + radius * np.stack(
        [sin_th * np.cos(phi), sin_th * np.sin(phi), cos_th], axis=1)
    targets = bounds.lo + u[:, 2:5] * (bounds.hi - bounds.lo)
    d = targets - origins
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    t_max = np.full(n, 4.0 * radius)
    return origins, d, t_max


def _compare_hits(gids, gts, bids, bts, rel_tol=1e-6):
    """Indices where grid-accelerated and brute-force results disagree."""
    with np.errstate(invalid="ignore"):
        t_mismatch = (gids >= 0) & (bids >= 0) & (
            np.abs(gts - bts) > rel_tol * np.maximum(1.0, np.abs(bts)))
    return np.flatnonzero((gids != bids) | t_mismatch)


def validate_builders(nscenes, seed, workers=None, max_tris=2000, max_dim=32):
    """Equivalence of all four builders over seeded random scenes.

    Returns (failures, checked) where failures is a list of messages.
    """
    failures = []
    u = _uniforms(seed, 2 * nscenes, 201).reshape(nscenes, 2)
    for i in range(nscenes):
        kind = VALIDATE_KINDS[i % len(VALIDATE_KINDS)]
        n = 1 + int(u[i, 0] * (max_tris - 1))
        scene_seed = seed * 1_000_003 + i
        mesh = gen_scene(kind, n, scene_seed)
        dims = tuple(1 + int(v * (max_dim - 1))
                     for v in _uniforms(scene_seed, 3, 202))
        spec = spec_for_mesh(mesh, dims=dims)
        ref = builders.build_reference(mesh, spec)
        for algo, build in ALGORITHMS.items():
            grid, _ = build(mesh, spec, workers=workers)
            if not grids_equal(grid, ref):
                diff = np.flatnonzero(grid.G.astype(np.int64) - ref.G.astype(np.int64))
                cell = int(diff[0]) - 1 if len(diff) else -1
                failures.append(
                    f"{algo} != reference on scene {i} ({kind}:{n}:{scene_seed}, "
                    f"dims {dims}, first differing cell {cell})")
                break
    return failures, nscenes


def validate_raycast(nrays, seed, nscenes=10, workers=None):
    """DDA-through-grid vs brute force on seeded random rays."""
    failures = []
    per_scene = max(1, nrays // nscenes)
    for i in range(nscenes):
        kind = VALIDATE_KINDS[i % len(VALIDATE_KINDS)]
        scene_seed = seed * 2_000_003 + i
        mesh = gen_scene(kind, 200 + 37 * i, scene_seed)
        spec = spec_for_mesh(mesh, density=5.0)
        grid, _ = builders.build_parallel(mesh, spec, workers=workers)
        origins, dirs, t_max = make_rays(spec.bounds, per_scene, scene_seed)
        gids, gts = dda_cast(grid, mesh, origins, dirs, t_max)
        bids, bts = brute_force_cast(mesh, origins, dirs, t_max)
        bad = _compare_hits(gids, gts, bids, bts)
        if len(bad):
            r = int(bad[0])
            failures.append(
                f"ray {r} on scene {i} ({kind}, seed {scene_seed}): "
                f"grid hit ({gids[r]}, {gts[r]:.9g}) vs brute ({bids[r]}, {bts[r]:.9g})")
    return failures, per_scene * nscenes


def cmd_validate(args):
    b_fail, b_n = validate_builders(args.scenes, args.seed, workers=args.workers)
    r_fail, r_n = validate_raycast(args.rays, args.seed, workers=args.workers)
    failures = b_fail + r_fail
    print(f"builder equivalence: {b_n} scenes, {len(b_fail)} mismatches")
    print(f"ray casting: {r_n} rays, {len(r_fail)} mismatches")
    for msg in failures[:5]:
        print("FAIL:", msg)
    print(f"{len(failures)} mismatches")
    return 1 if failures else 0


def cmd_raycast(args):
    mesh, scene = _load_scene(args)
    spec = _make_spec(mesh, args)
    grid, _ = builders.build_parallel(mesh, spec, workers=args.workers)
    origins, dirs, t_max = make_rays(spec.bounds, args.rays, args.seed)
    ids, ts = dda_cast(grid, mesh, origins, dirs, t_max)
    hits = int(np.count_nonzero(ids >= 0))
    print(f"scene {scene}: {args.rays} rays, {hits} hits")
    if args.check:
        bids, bts = brute_force_cast(mesh, origins, dirs, t_max)
        bad = _compare_hits(ids, ts, bids, bts)
        print(f"brute-force check: {len(bad)} mismatches")
        return 1 if len(bad) else 0
    return 0


def cmd_gen(args):
    kind, n, seed = args.spec
    mesh = gen_scene(kind, n, seed)
    if args.out:
        save_obj(mesh, args.out)
    else:
        save_obj(mesh, "/dev/stdout")
    return 0


def build_arg_parser():
    p = argparse.ArgumentParser(prog="pargrid",
                                description="Uniform grid construction benchmark and validation")
    p.add_argument("--backend", choices=kernels.available_backends(),
                   help="force a kernel backend (default: compiled if built)")
    sub = p.add_subparsers(dest="command", required=True)

    def add_scene_opts(sp, with_algo=False):
        sp.add_argument("--mesh", help="OBJ file to grid")
        sp.add_argument("--gen", type=_parse_gen, metavar="KIND:N:SEED",
                        help="synthetic scene (uniform, skewed or walls)")
        sp.add_argument("--dims", type=_parse_dims, metavar="AxBxC",
                        help="explicit grid resolution")
        sp.add_argument("--density", type=float, default=5.0,
                        help="cells per triangle for the resolution heuristic")
        sp.add_argument("--workers", type=int, default=None,
                        help="cap internal parallelism")
        sp.add_argument("--out", help="output path (default stdout)")
        sp.add_argument("--format", choices=("csv", "md"), default="csv")
        if with_algo:
            sp.add_argument("--algo", default="parallel",
                            help="comma list from: parallel, sorted, compact")
            sp.add_argument("--repeat", type=int, default=3)

    b = sub.add_parser("build", help="time grid construction per phase")
    add_scene_opts(b, with_algo=True)
    b.set_defaults(func=cmd_build)

    s = sub.add_parser("stats", help="grid attribute row for a scene")
    add_scene_opts(s)
    s.set_defaults(func=cmd_stats)

    v = sub.add_parser("validate", help="builder equivalence and ray-cast checks")
    v.add_argument("--scenes", type=int, default=100)
    v.add_argument("--rays", type=int, default=10000)
    v.add_argument("--seed", type=int, default=1)
    v.add_argument("--workers", type=int, default=None)
    v.set_defaults(func=cmd_validate)

    r = sub.add_parser("raycast", help="cast rays through a built grid")
    add_scene_opts(r)
    r.add_argument("--rays", type=int, default=1000)
    r.add_argument("--seed", type=int, default=1)
    r.add_argument("--check", action="store_true",
                   help="compare against the brute-force caster")
    r.set_defaults(func=cmd_raycast)

    g = sub.add_parser("gen", help="write a synthetic scene as OBJ")
    g.add_argument("spec", type=_parse_gen, metavar="KIND:N:SEED")
    g.add_argument("--out", help="output OBJ path (default stdout)")
    g.set_defaults(func=cmd_gen)
    return p


def main(argv=None):
    parser = build_arg_parser()
    args = parser.parse_args(argv)
    if args.backend:
        kernels.set_backend(args.backend)
    if getattr(args, "algo", None) is not None and isinstance(args.algo, str):
        algos = [a.strip() for a in args.algo.split(",") if a.strip()]
        unknown = [a for a in algos if a not in ALGORITHMS]
        if unknown or not algos:
            parser.error(f"unknown algorithm(s): {', '.join(unknown) or '(none)'}")
        args.algo = algos
    if getattr(args, "repeat", 1) < 1:
        parser.error("--repeat must be >= 1")
    try:
        return args.func(args)
    except (GridError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
