"""Benchmark the compiled kernels against the pure-Python twin.

Workloads mirror the heavy pieces of the acceptance suite: prefix optima and
pursuit runs over random elasticity sequences, plus a fine critical ladder.

    python benchmarks/bench_backends.py [--count 2000] [--t-max 50]
"""

import argparse
import math
import time

import numpy as np

from crpursuit._kernels import _purecore
from crpursuit.adversary import CriticalSequenceSpec, critical_sequence, random_sequence
from crpursuit.revenue import packed_arrays

try:
    from crpursuit._kernels import _fastcore
except ImportError:
    _fastcore = None


def make_workload(count, t_max):
    rng = np.random.default_rng(0)
    packs = []
    for _ in range(count):
        T = int(rng.integers(1, t_max + 1))
        seq = random_sequence(
            int(rng.integers(0, 2**31)),
            T,
            "linear_elastic",
            delta=1.0,
            m=1.0,
            M=math.e,
        )
        packs.append((packed_arrays(seq), seq.delta, seq.M))
    return packs


def bench(backend, packs, ladder_pack, pi):
    start = time.perf_counter()
    sold = 0.0
    for packed, delta, bound in packs:
        _, vbars, _ = backend.pursuit_run(*packed, delta, bound, pi)
        sold += sum(vbars)
    mid = time.perf_counter()
    packed, delta, bound = ladder_pack
    _, vbars, _ = backend.pursuit_run(*packed, delta, bound, pi)
    end = time.perf_counter()
    return mid - start, end - mid, sold + sum(vbars)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--count", type=int, default=2000, help="ensemble size")
    parser.add_argument("--t-max", type=int, default=50, help="max slots per sequence")
    parser.add_argument("--ladder", type=int, default=10**4, help="critical ladder size")
    args = parser.parse_args()

    packs = make_workload(args.count, args.t_max)
    ladder = critical_sequence(
        CriticalSequenceSpec(m=1.0, M=math.e, n=args.ladder, delta=1.0)
    )
    ladder_pack = (packed_arrays(ladder), ladder.delta, ladder.M)
    pi = 16.0 / 7.0

    backends = [("python", _purecore)]
    if _fastcore is not None:
        backends.insert(0, ("cython", _fastcore))
    else:
        print("compiled kernel not built; timing the pure backend only")

    results = {}
    for name, backend in backends:
        ens, lad, checksum = bench(backend, packs, ladder_pack, pi)
        results[name] = (ens, lad)
        print(
            f"{name:>7}: ensemble({args.count} seqs, T<={args.t_max}) {ens:8.3f}s"
            f" | critical ladder(n={args.ladder}) {lad:8.3f}s"
            f" | checksum {checksum:.6f}"
        )
    if len(results) == 2:
        ens_ratio = results["python"][0] / results["cython"][0]
        lad_ratio = results["python"][1] / results["cython"][1]
        print(f"speedup: ensemble {ens_ratio:.1f}x, ladder {lad_ratio:.1f}x")


if __name__ == "__main__":
    main()
