"""Compare the numba and numpy backends on the hot kernels and on whole runs.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Each timing is the best of ``--repeat`` runs, taken after a warm-up call so
that JIT compilation is excluded.
"""

import argparse
import timeit

import numpy as np

from degenpara import Grid, asian_problem, solve
from degenpara import _kernels
from degenpara._compat import HAVE_NUMBA
from degenpara.scheme import assemble_step, operator_bands


def best(fn, repeat, number):
    fn()  # warm-up
    return min(timeit.repeat(fn, repeat=repeat, number=number)) / number


def row(label, times):
    cols = "  ".join(f"{times[b] * 1e3:10.3f}" for b in times)
    speedup = times["numpy"] / times["numba"] if "numba" in times else float("nan")
    print(f"{label:<28}{cols}  {speedup:8.1f}x")


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    backends = ["numpy", "numba"] if HAVE_NUMBA else ["numpy"]
    if not HAVE_NUMBA:
        print("numba not installed; timing the numpy backend only")
    p = asian_problem()
    print(f"{'kernel':<28}" + "  ".join(f"{b + ' [ms]':>10}" for b in backends) + "   speedup")

    for J in (64, 256, 1024, 4096):
        g = Grid(J, 16)
        u = np.tanh(g.x)
        row(f"operator_bands J={J}", {b: best(lambda b=b: operator_bands(p, g, 0, backend=b), args.repeat, 20) for b in backends})
        sys = assemble_step(p, g, 0, u)
        solver = {b: _kernels.get_backend(b)[1] for b in backends}
        row(f"band_solve J={J}", {b: best(lambda b=b: solver[b](sys.bands, sys.rhs), args.repeat, 20) for b in backends})

    for J in (100, 400):
        g = Grid(J, J)
        row(f"solve asian J=N={J}", {b: best(lambda b=b: solve(p, g, backend=b), args.repeat, 1) for b in backends})


if __name__ == "__main__":
    main()
