"""Time the numba kernels against their numpy fallbacks.

Usage::

    python benchmarks/bench_kernels.py [--resolution 128] [--repeat 5] [--solve]

Kernel timings exclude the first (compiling) call.  With ``--solve`` an
end-to-end disk solve is also timed once per backend in a subprocess, with
``VEXLAP_NO_NUMBA`` set for the numpy run.
"""
import argparse
import os
import subprocess
import sys
import time

import numpy as np

from vexlap import kernels
from vexlap.mesh import build_mesh

SOLVE_SNIPPET = """
import time
from vexlap import BACKEND, RasterDomain, SourceTerm, build_mesh, make_exponent, solve_dirichlet
from vexlap.geometry import Disk
res = {res}
mesh = build_mesh((0, 0, 1, 1), res)
o = RasterDomain.from_shape(Disk(0.5, 0.5, 0.4), (0, 0, 1, 1), res)
p = make_exponent("affine(2, 0.5, 0)", mesh)
solve_dirichlet(o, SourceTerm.constant(1.0, mesh), p)
t0 = time.perf_counter()
u, rep = solve_dirichlet(o, SourceTerm.constant(1.0, mesh), p)
print(BACKEND, time.perf_counter() - t0, rep.iterations)
"""


def best_of(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--resolution", type=int, default=128)
    ap.add_argument("--points", type=int, default=3000, help="point-pair kernel size")
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--solve", action="store_true")
    args = ap.parse_args(argv)
    if not kernels.HAVE_NUMBA:
        sys.exit("numba is unavailable (or disabled); nothing to compare")

    rng = np.random.default_rng(0)
    mesh = build_mesh((0.0, 0.0, 1.0, 1.0), args.resolution)
    tris, G = mesh.triangles.astype(np.int64), mesh.basis_gradients
    u = rng.standard_normal(mesh.n_nodes)
    p = 1.5 + rng.random(mesh.n_triangles)
    a = mesh.areas / p
    xy = rng.random((args.points, 2))
    vals = rng.random(args.points)
    B = rng.random((args.points, 2))

    cases = [
        (f"assemble ({mesh.n_triangles} elements)",
         lambda: kernels.assemble_loop(u, tris, G, a, p, 1e-3, True),
         lambda: kernels.assemble_numpy(u, tris, G, a, p, 1e-3, True)),
        (f"log_holder_sup ({args.points} points)",
         lambda: kernels.log_holder_loop(xy, vals), lambda: kernels.log_holder_numpy(xy, vals)),
        (f"holder_seminorm ({args.points} points)",
         lambda: kernels.holder_seminorm_loop(xy, vals, 0.5), lambda: kernels.holder_seminorm_numpy(xy, vals, 0.5)),
        (f"directed_hausdorff ({args.points}x{args.points})",
         lambda: kernels.directed_hausdorff_loop(xy, B), lambda: kernels.directed_hausdorff_numpy(xy, B)),
    ]
    print(f"{'kernel':40s} {'numba [ms]':>11s} {'numpy [ms]':>11s} {'speedup':>8s}")
    for name, fast, slow in cases:
        tf, ts = best_of(fast, args.repeat), best_of(slow, args.repeat)
        print(f"{name:40s} {1e3 * tf:11.3f} {1e3 * ts:11.3f} {ts / tf:8.2f}")

    if args.solve:
        print("\nend-to-end solve, p = 2 + 0.5x on a disk")
        for flag in ("", "1"):
            env = dict(os.environ, VEXLAP_NO_NUMBA=flag)
            out = subprocess.run([sys.executable, "-c", SOLVE_SNIPPET.format(res=args.resolution)],
                                 env=env, capture_output=True, text=True, check=True).stdout.split()
            print(f"  {out[0]:6s} {float(out[1]):8.3f} s  ({out[2]} Newton iterations)")


if __name__ == "__main__":
    main()
