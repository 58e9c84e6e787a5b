"""Compare the compiled kernels with the numpy fallback.

Run with ``python3 benchmarks/bench_kernels.py``. Reports the best of several
repeats for each kernel and grid size, and the max difference between
backends.
"""

import argparse
import time

import numpy as np

from parkguard import _kernels_py

try:
    from parkguard import _kernels as native
except ImportError:  # extension not built
    native = None


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[101, 201, 401])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if native is None:
        print("compiled extension not available; build it with pip install -e . --no-build-isolation")
        return 1
    rng = np.random.default_rng(0)
    print(f"{'kernel':<22}{'n':>6}{'cython ms':>12}{'numpy ms':>12}{'speedup':>10}{'max diff':>12}")
    for n in args.sizes:
        h = 2.0 / (n - 1)
        y, x = np.mgrid[0:n, 0:n] * h - 1.0
        phi = 1.0 - np.hypot(x, y) + 0.01 * rng.standard_normal((n, n))
        v = 0.5 + rng.random((n, n))
        for order in (2, 1):
            tc, a = best_of(lambda: native.godunov_hamiltonian_field(phi, v, h, order), args.repeat)
            tp, b = best_of(lambda: _kernels_py.godunov_hamiltonian_field(phi, v, h, order), args.repeat)
            print(f"{'hamiltonian order ' + str(order):<22}{n:>6}{1e3 * tc:>12.2f}{1e3 * tp:>12.2f}"
                  f"{tp / tc:>10.1f}{np.max(np.abs(a - b)):>12.1e}")
        t = np.linspace(0, 2 * np.pi, 4 * n)
        pts = np.column_stack([0.8 * np.cos(t), 0.8 * np.sin(t)])
        segs = np.hstack([pts[:-1], pts[1:]])
        xs = ys = np.linspace(-1, 1, n)
        tc, a = best_of(lambda: native.segment_distance(xs, ys, segs), args.repeat)
        tp, b = best_of(lambda: _kernels_py.segment_distance(xs, ys, segs), args.repeat)
        print(f"{'segment distance':<22}{n:>6}{1e3 * tc:>12.2f}{1e3 * tp:>12.2f}"
              f"{tp / tc:>10.1f}{np.max(np.abs(a - b)):>12.1e}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
