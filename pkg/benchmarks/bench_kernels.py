"""Compiled vs numpy kernels: wall time and result parity.

    python3 benchmarks/bench_kernels.py [--repeat 3]
"""
import argparse
import time

import numpy as np

from sxgraphs import kernels
from sxgraphs.graphs import random_regular, schreier_graph
from sxgraphs.groups import random_generator_set


def _time(fn, repeat):
    best, out = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def _same(a, b):
    if isinstance(a, tuple):
        return all(np.array_equal(x, y) for x, y in zip(a, b))
    return np.array_equal(a, b)


def cases():
    g = random_regular(1024, 4, 0)
    h = random_regular(64, 3, 1)
    s = schreier_graph(10007, random_generator_set(10007, 2, 0))
    srcs = np.arange(0, s.n, 50, dtype=np.int64)
    return [
        ("nb_endpoint_counts n=1024 q=3 k=11",
         lambda m: m.nb_endpoint_counts(g.target, g.partner, g.degree, 0, 11)),
        ("nb_cycle_counts n=64 q=2 k=12",
         lambda m: m.nb_cycle_counts(h.target, h.partner, h.degree, 12)),
        ("bfs_distances n=10008",
         lambda m: m.bfs_distances(s.target, s.degree, 0)),
        (f"bfs_summary n=10008 sources={srcs.size}",
         lambda m: m.bfs_summary(s.target, s.degree, srcs, 10.0)),
    ]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    compiled = kernels.backend_module("compiled")
    python = kernels.backend_module("python")
    print(f"{'kernel':42s} {'compiled s':>11s} {'python s':>10s} {'speedup':>8s}  parity")
    for name, fn in cases():
        tc, rc = _time(lambda: fn(compiled), args.repeat)
        tp, rp = _time(lambda: fn(python), args.repeat)
        print(f"{name:42s} {tc:11.4f} {tp:10.4f} {tp / tc:8.1f}  {_same(rc, rp)}")


if __name__ == "__main__":
    main()
