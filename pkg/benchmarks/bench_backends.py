"""Timing comparison of the compiled kernels against the pure-Python ones.

Run from the repository root:

    python3 benchmarks/bench_backends.py

Both backends produce bit-identical output, so this measures speed only.
Each workload is timed best-of-5 after one warmup call.
"""

import time

import numpy as np

from pppkit._kernels import _fallback
from pppkit.randcore import RngStream
from pppkit.regions import Ball, Box, parse_region

try:
    from pppkit._kernels import _core
except ImportError:
    _core = None

K0, K1 = RngStream(12345, 0)._k0, RngStream(12345, 0)._k1


def best_of(fn, repeats=5):
    fn()
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def workloads():
    quarter = Box((0.0, 0.0), (1.0, 1.0)) & Ball((0.0, 0.0), 0.5)
    prog, (lo, wid) = quarter._program, quarter._frame
    blob = parse_region("union(diff(box:0,0;1,1, ball:0.5,0.5;0.3), "
                        "ball:0.2,0.8;0.15)")
    pts = np.random.default_rng(0).uniform(-0.2, 1.2, size=(1_000_000, 2))
    out = np.empty((100_000, 2))

    yield "fill_unit, 1e6 draws", lambda k: k.fill_unit(K0, K1, 0, 1_000_000)
    yield ("rejection_fill, 1e5 points on a quarter disk",
           lambda k: k.rejection_fill(K0, K1, 0, prog.codes, prog.offs,
                                      prog.vals, lo, wid, out, 1_000_000))
    yield ("mc_hits, 1e6 samples on a quarter disk",
           lambda k: k.mc_hits(K0, K1, 0, prog.codes, prog.offs, prog.vals,
                               lo, wid, 1_000_000))
    yield ("contains_many, 1e6 points, 4-node region",
           lambda k: k.contains_many(blob._program.codes, blob._program.offs,
                                     blob._program.vals, pts))


def main():
    if _core is None:
        print("compiled backend not importable; timing the fallback only\n")
    name_w = 46
    print(f"{'workload':<{name_w}} {'fallback':>10} {'compiled':>10} "
          f"{'speedup':>8}")
    for name, load in workloads():
        fb = best_of(lambda: load(_fallback))
        if _core is None:
            print(f"{name:<{name_w}} {fb * 1e3:>8.1f}ms {'-':>10} {'-':>8}")
            continue
        co = best_of(lambda: load(_core))
        print(f"{name:<{name_w}} {fb * 1e3:>8.1f}ms {co * 1e3:>8.1f}ms "
              f"{fb / co:>7.1f}x")


if __name__ == "__main__":
    main()
