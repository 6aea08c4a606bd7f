"""Compare the compiled and numpy stencil kernels.

    python3 benchmarks/bench_kernels.py [--repeat 20] [--json out.json]

Times one right-hand-side evaluation at several grid sizes on both
backends, checks that they agree, and times a full finite-difference run.
"""
import argparse
import json
import time

import numpy as np

from kramers_sep import (KramersParams, RFunction, SchemeTag, SpectralPair,
                         build_coordinate_system, build_solution, kernels)
from kramers_sep.verify import GridSpec, fd_simulate

SIZES = (64, 128, 256, 512, 1024)


def _best(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_rhs(n, repeat, backends):
    rng = np.random.default_rng(n)
    x = np.linspace(-1, 1, n)
    y = np.linspace(-1, 1, n)
    u = rng.standard_normal((n, n))
    dx = dy = x[1] - x[0]
    row = {"n": n}
    outs = {}
    for name in backends:
        out = np.zeros_like(u)
        fn = lambda: kernels.rhs_interior(u, x, y, dx, dy, 1.0, 0.25, out, backend=name)
        fn()
        row[name] = _best(fn, repeat)
        outs[name] = out.copy()
    if len(outs) == 2:
        a, b = outs.values()
        row["max_diff"] = float(np.max(np.abs(a - b)))
        row["speedup"] = row["python"] / row["cython"]
    return row


def bench_fd(backends, n=65):
    p = KramersParams(2.0, 0.75)
    cs = build_coordinate_system(SchemeTag.SecondOrderSpecialK, RFunction("sech", 0.5), p,
                                 (0.1, 0.9))
    sol = build_solution(SchemeTag.SecondOrderSpecialK, cs, SpectralPair(0.3, -0.2))
    grid = GridSpec((-1, 1), (-1, 1), n, n, 0.2, 0.5)
    row = {"n": n}
    for name in backends:
        t0 = time.perf_counter()
        res = fd_simulate(sol, grid, backend=name)
        row[name] = time.perf_counter() - t0
        row[f"{name}_error_max"] = res.error_max
    return row


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=20)
    ap.add_argument("--json", help="also write results here")
    args = ap.parse_args(argv)

    backends = ["python"]
    try:
        kernels.get_backend("cython")
        backends.append("cython")
    except ImportError:
        print("compiled backend not built; timing the numpy kernels only")

    rows = [bench_rhs(n, args.repeat, backends) for n in SIZES]
    print(f"{'n':>6} " + " ".join(f"{b + ' [ms]':>14}" for b in backends)
          + ("   speedup   max|diff|" if len(backends) == 2 else ""))
    for r in rows:
        line = f"{r['n']:>6} " + " ".join(f"{1e3 * r[b]:>14.3f}" for b in backends)
        if "speedup" in r:
            line += f"   {r['speedup']:7.1f}   {r['max_diff']:.1e}"
        print(line)

    fd = bench_fd(backends)
    print(f"fd_simulate {fd['n']}x{fd['n']}: "
          + ", ".join(f"{b} {fd[b]:.2f} s (err {fd[b + '_error_max']:.2e})" for b in backends))
    if args.json:
        with open(args.json, "w") as fh:
            json.dump({"rhs": rows, "fd_simulate": fd, "threads": kernels.num_threads()},
                      fh, indent=2, sort_keys=True)


if __name__ == "__main__":
    main()
