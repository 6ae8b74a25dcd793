"""Compare the compiled and numpy kernel backends.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--rows 100000]

Times ``bounds_batch`` on large batches, single enclosure calls (the
branch-and-bound inner loop) and full ``minimize`` runs on corpus entries.
Each figure is the best of ``--repeat`` runs.
"""

import argparse
import timeit

import numpy as np

from lipbounds import solver
from lipbounds._backend import available_backends
from lipbounds.bounds import bounds_batch
from lipbounds.corpus import get_entry


def best_of(fn, repeat, number=1):
    return min(timeit.repeat(fn, repeat=repeat, number=number)) / number


def bench_batch(kern, rows, n, repeat):
    rng = np.random.default_rng(0)
    A = rng.uniform(-1, 1, (rows, n))
    B = rng.uniform(-1, 1, (rows, n))
    G = rng.normal(size=(rows, n))
    klo = -np.ones(n)
    M = rng.uniform(0, 1, (n, n))
    M = M + M.T
    return best_of(lambda: bounds_batch(A, B, G, klo, -klo, -M, M, kernel=kern), repeat)


def bench_enclose(kern, n, repeat, calls=2000):
    rng = np.random.default_rng(1)
    lower, upper = -np.ones(n), np.ones(n)
    anchor = np.zeros(n)
    g = rng.normal(size=n)
    M = np.ones((n, n))

    def loop():
        for _ in range(calls):
            kern.enclose_linear(0.0, anchor, lower, upper, -g, g)
            kern.enclose_quadratic(0.0, g, anchor, lower, upper, -M, M)

    return best_of(loop, repeat) / calls


def bench_minimize(kern, name, repeat):
    e = get_entry(name)
    saved = solver.kernels
    solver.kernels = kern
    try:
        return best_of(lambda: solver.minimize(e.model, e.box, (e.kappa_oracle, e.m_oracle), tol=1e-3,
                                               record_trace=False), repeat)
    finally:
        solver.kernels = saved


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--rows", type=int, default=100_000)
    args = ap.parse_args()

    backends = available_backends()
    names = sorted(backends)
    if "cython" not in backends:
        print("compiled kernels not built; timing the numpy backend only")

    cases = []
    for n in (2, 5):
        cases.append((f"bounds_batch rows={args.rows} n={n}",
                      lambda k, n=n: bench_batch(k, args.rows, n, args.repeat)))
    for n in (2, 5):
        cases.append((f"enclose pair n={n} (per call)", lambda k, n=n: bench_enclose(k, n, args.repeat)))
    for name in ("six_hump_camel", "rosenbrock"):
        cases.append((f"minimize {name} tol=1e-3", lambda k, name=name: bench_minimize(k, name, args.repeat)))

    header = f"{'case':40s}" + "".join(f"{b:>14s}" for b in names)
    if len(names) == 2:
        header += f"{'speedup':>10s}"
    print(header)
    for label, fn in cases:
        times = {b: fn(backends[b]) for b in names}
        line = f"{label:40s}" + "".join(f"{times[b] * 1e3:12.3f}ms" for b in names)
        if len(names) == 2:
            line += f"{times['python'] / times['cython']:9.1f}x"
        print(line)


if __name__ == "__main__":
    main()
