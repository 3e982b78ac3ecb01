"""Time the Monte Carlo kernels on both backends.

    python3 benchmarks/bench_mc.py [--pulses N] [--repeat R]

The first numba call compiles (or loads the on-disk cache); it is timed
separately and excluded from the steady-state numbers. Counts must agree
exactly between backends, otherwise the script exits nonzero.
"""

import argparse
import sys
import time

import numpy as np

from qkdopt import _kernels
from qkdopt.mcoracle import McConfig, _kernel_args
from qkdopt.profiles import get_profile


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--pulses", type=int, default=2_000_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    if not _kernels.HAVE_NUMBA:
        print("numba unavailable or disabled (QKDOPT_NO_NUMBA); timing numpy only")
    cfg = McConfig(pulses=args.pulses, seed=2024, profile=get_profile("KTH15"), mu=0.5, L=10.0)
    key = _kernels.seed_key(cfg.seed)
    print(f"{'model':8s} {'backend':8s} {'seconds':>10s} {'Mpulse/s':>10s}  counts")
    status = 0
    for model in ("simple", "qc", "bb84"):
        name, kargs = _kernel_args(cfg, model)
        results = {}
        for backend in ("numba", "numpy"):
            if backend == "numba" and not _kernels.HAVE_NUMBA:
                continue
            run = lambda: _kernels.run_kernel(name, key, 0, cfg.pulses, *kargs, backend=backend)
            if backend == "numba":
                t0 = time.perf_counter()
                _kernels.run_kernel(name, key, 0, 10, *kargs, backend=backend)
                print(f"{model:8s} {'compile':8s} {time.perf_counter() - t0:10.3f}")
            secs, counts = best_of(run, args.repeat)
            results[backend] = counts
            print(f"{model:8s} {backend:8s} {secs:10.3f} {cfg.pulses / secs / 1e6:10.1f}  {counts.tolist()}")
        if len(results) == 2 and not np.array_equal(results["numba"], results["numpy"]):
            print(f"{model}: backends disagree", file=sys.stderr)
            status = 1
    return status


if __name__ == "__main__":
    sys.exit(main())
