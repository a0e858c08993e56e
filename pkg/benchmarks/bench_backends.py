"""Timing comparison of the compiled and numpy kernel backends.

Run from the repository root:

    python3 benchmarks/bench_backends.py

Each (kernel, backend) pair is timed in its own subprocess.  Isolation
matters: glibc raises its mmap threshold after large allocations are
freed, so one workload can halve the temporary-allocation cost of the
next and make in-process timings depend on row order.  A fresh process
per measurement reports what each kernel costs in a program that runs
only that kernel, which is how the training loop actually behaves.
Within a process the best of several repeats is kept so scheduling
noise does not leak in.
"""

import subprocess
import sys
import time

import numpy as np

REPEATS = 5

ROWS = [
    ("eigvals", "jacobi_eigvals  (40 x 24x24)"),
    ("facets", "facet_scan      (26 pts)"),
    ("collocation", "collocation     (20 passes)"),
]


def best_time(fn, repeats=REPEATS):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def bench_eigvals(mod):
    rng = np.random.default_rng(1)
    mats = []
    for _ in range(40):
        m = rng.standard_normal((24, 24))
        mats.append((m + m.T) / 2.0)

    def run():
        for m in mats:
            mod.jacobi_eigvals(m)

    return best_time(run)


def bench_facets(mod):
    rng = np.random.default_rng(2)
    pts = rng.standard_normal((13, 6))
    pts = np.vstack([pts, -pts])        # 26 points -> 230230 subsets

    def run():
        mod.facet_scan(pts, 1e-9)

    return best_time(run)


def bench_collocation(mod):
    from gfo.kkt import LpProblem
    from gfo.neural import Mlp

    lp = LpProblem(
        [-9.54, -8.16, -4.26, -11.43], [[3.18, 2.72, 1.42, 3.81]], [7.81]
    )
    sizes = (1, 100, 5)
    mlp = Mlp.init(sizes, seed=0)
    t = np.linspace(0.0, 10.0, 1001)
    y0 = np.zeros(5)

    def run():
        for _ in range(20):
            mod.collocation_pass(mlp.theta, sizes, t, lp.cost, lp.A, lp.b, y0, True)

    return best_time(run)


BENCHES = {
    "eigvals": bench_eigvals,
    "facets": bench_facets,
    "collocation": bench_collocation,
}


def run_one(name, backend):
    """Child-process entry: time one kernel on one backend, print seconds."""
    if backend == "c":
        from gfo import _kernels as mod
    else:
        from gfo import _py_kernels as mod
    print(f"{BENCHES[name](mod):.6f}")


def measure(name, backend):
    proc = subprocess.run(
        [sys.executable, __file__, name, backend],
        capture_output=True,
        text=True,
    )
    if proc.returncode != 0:
        return None
    return float(proc.stdout.strip())


def main():
    try:
        from gfo import _kernels  # noqa: F401
        have_c = True
    except ImportError:
        have_c = False

    print(f"{'kernel':<32}{'python':>12}{'c':>12}{'speedup':>10}")
    for name, label in ROWS:
        t_py = measure(name, "python")
        t_c = measure(name, "c") if have_c else None
        if t_py is None:
            print(f"{label:<32}{'error':>12}")
            continue
        if t_c is None:
            print(f"{label:<32}{t_py:>11.4f}s{'n/a':>12}{'n/a':>10}")
            continue
        print(f"{label:<32}{t_py:>11.4f}s{t_c:>11.4f}s{t_py / t_c:>9.2f}x")
    if not have_c:
        print("\ncompiled backend not built; install with the Cython extension")


if __name__ == "__main__":
    if len(sys.argv) == 3:
        run_one(sys.argv[1], sys.argv[2])
    else:
        main()
