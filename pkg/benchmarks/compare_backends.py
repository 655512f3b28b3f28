"""Compare the compiled kernels against the pure-numpy fallback.

Times grid construction (all three builders) and batched ray casting on a
few synthetic scenes, once per available backend, and prints a table with
the speedup of the compiled lane over the python one.

Usage:
    python3 benchmarks/compare_backends.py [--n 200000] [--rays 20000]
            [--repeat 3] [--kinds uniform,skewed,walls]
"""

import argparse
import time

import numpy as np

from pargrid import (build_compact, build_parallel, build_sorted, gen_scene,
                     spec_for_mesh)
from pargrid import kernels
from pargrid.cli import make_rays
from pargrid.traverse import dda_cast

BUILDERS = {
    "parallel": build_parallel,
    "sorted": build_sorted,
    "compact": build_compact,
}


def best_of(repeat, fn):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best * 1000.0


def run(kind, n, nrays, repeat):
    mesh = gen_scene(kind, n, seed=99)
    spec = spec_for_mesh(mesh, density=5.0)
    grid, _ = build_parallel(mesh, spec)
    origins, dirs, t_max = make_rays(spec.bounds, nrays, seed=100)

    rows = []
    for name, build in BUILDERS.items():
        ms = best_of(repeat, lambda: build(mesh, spec))
        rows.append((f"build {name}", ms))
    ms = best_of(repeat, lambda: dda_cast(grid, mesh, origins, dirs, t_max))
    rows.append((f"raycast x{nrays}", ms))
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=200_000, help="triangles per scene")
    ap.add_argument("--rays", type=int, default=20_000)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--kinds", default="uniform,skewed,walls")
    args = ap.parse_args()

    backends = kernels.available_backends()
    print(f"backends: {', '.join(backends)}")
    if len(backends) < 2:
        print("only one backend available; timings reported without speedups")

    for kind in args.kinds.split(","):
        timings = {}
        for backend in backends:
            kernels.set_backend(backend)
            timings[backend] = run(kind, args.n, args.rays, args.repeat)
        kernels.set_backend(backends[0])

        print(f"\nscene {kind} ({args.n} triangles)")
        header = f"  {'task':<18}" + "".join(f"{b + ' ms':>14}" for b in backends)
        if "c" in timings and "python" in timings:
            header += f"{'speedup':>10}"
        print(header)
        for i, (task, _) in enumerate(timings[backends[0]]):
            line = f"  {task:<18}"
            for b in backends:
                line += f"{timings[b][i][1]:>14.2f}"
            if "c" in timings and "python" in timings:
                line += f"{timings['python'][i][1] / timings['c'][i][1]:>9.1f}x"
            print(line)


if __name__ == "__main__":
    main()
