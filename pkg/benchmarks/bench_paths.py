"""Benchmark the all-pairs BFS kernel: compiled extension vs pure Python.

Generates random connected rooted graphs of several sizes, runs both
kernels on identical CSR inputs, checks that outputs agree, and reports
wall-clock times and speedup.

Usage: python benchmarks/bench_paths.py [--sizes 20,50,100,200] [--repeats 5]
"""

import argparse
import time

import numpy as np

from structgen.amr import AmrGraph
from structgen.paths import KERNEL, _csr_adjacency, bfs_python

try:
    from structgen import _pathkernel

    compiled = _pathkernel.all_pairs_bfs
except ImportError:
    compiled = None


def random_graph(rng, n):
    nodes = {f"n{i}": f"c{i}" for i in range(n)}
    edges = []
    for i in range(1, n):
        parent = int(rng.integers(0, i))
        edges.append((f"n{parent}", f":op{int(rng.integers(1, 6))}", f"n{i}"))
    for _ in range(n // 5):
        u, v = rng.integers(0, n, size=2)
        if u != v:
            edges.append((f"n{u}", ":mod", f"n{v}"))
    return AmrGraph(nodes=nodes, edges=tuple(edges), root="n0")


def bench(fn, args, repeats):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - start)
    return best, out


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--sizes", default="20,50,100,200")
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]

    print(f"active kernel at import: {KERNEL}")
    if compiled is None:
        print("compiled kernel unavailable; benchmarking pure Python only")
    header = f"{'nodes':>7} {'python':>12} {'compiled':>12} {'speedup':>9}"
    print(header)
    print("-" * len(header))
    rng = np.random.default_rng(args.seed)
    for n in sizes:
        g = random_graph(rng, n)
        index = {nid: i for i, nid in enumerate(g.nodes)}
        csr = _csr_adjacency(g, index)
        t_py, out_py = bench(bfs_python, csr, args.repeats)
        if compiled is not None:
            t_cy, out_cy = bench(compiled, csr, args.repeats)
            for a, b in zip(out_py, out_cy):
                np.testing.assert_array_equal(a, b)
            print(f"{n:>7} {t_py * 1e3:>10.2f}ms {t_cy * 1e3:>10.2f}ms {t_py / t_cy:>8.1f}x")
        else:
            print(f"{n:>7} {t_py * 1e3:>10.2f}ms {'-':>12} {'-':>9}")


if __name__ == "__main__":
    main()
