"""Compare the compiled and pure-Python Laplace shape-function kernels.

Usage::

    python3 benchmarks/bench_kernels.py [--points N] [--repeat R]

Both backends evaluate values and gradients at the same interior points of
a square and of transition polygons with 5, 8 and 11 vertices; the script
prints the best-of-R wall time per backend, the speed-up, and the largest
difference between the two results.
"""
import argparse
import timeit

import numpy as np

from qtfem import kernels
from qtfem.mesh import generate_mesh


def polygons():
    cells = {4: None, 5: None, 8: None, 11: None}
    for gen, depth, balance in (("corner", 2, True), ("corner", 3, False), ("diag", 3, False)):
        for p in generate_mesh(gen, depth, balance=balance).polygons:
            if p.n in cells and cells[p.n] is None:
                cells[p.n] = p.coords
    return {n: c for n, c in cells.items() if c is not None}


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    parser.add_argument("--points", type=int, default=2000)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args(argv)
    rng = np.random.default_rng(0)
    if kernels.BACKEND != "cython":
        print("compiled kernel not available; only the Python backend is timed")
    print(f"{'vertices':>8} {'points':>7} {'cython [s]':>11} {'python [s]':>11} "
          f"{'speed-up':>9} {'max diff':>9}")
    for n, coords in polygons().items():
        pts = rng.dirichlet(np.ones(n), args.points) @ coords
        timings, results = {}, {}
        backends = {"python": kernels.python_laplace_eval}
        if kernels.BACKEND == "cython":
            backends["cython"] = kernels.laplace_eval
        for name, fn in backends.items():
            results[name] = fn(coords, pts, True)
            timings[name] = min(timeit.repeat(lambda: fn(coords, pts, True),
                                              number=1, repeat=args.repeat))
        if "cython" in timings:
            diff = max(float(np.abs(a - b).max())
                       for a, b in zip(results["cython"], results["python"]))
            print(f"{n:>8} {args.points:>7} {timings['cython']:>11.4f} {timings['python']:>11.4f} "
                  f"{timings['python'] / timings['cython']:>8.1f}x {diff:>9.1e}")
        else:
            print(f"{n:>8} {args.points:>7} {'-':>11} {timings['python']:>11.4f}")


if __name__ == "__main__":
    main()
