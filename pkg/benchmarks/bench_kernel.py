"""Throughput comparison of the compiled and pure-Python detector kernels.

Usage: python benchmarks/bench_kernel.py [--windows 200] [--n-list 1 4 16]
"""

import argparse
import time

import numpy as np

from tapesim.detector import HAVE_COMPILED_KERNEL, DetectorConfig, get_kernel, initial_state
from tapesim.equalizer import WhitenerCoeffs


def bench(kernel, n_list, windows, period=198, order=3, seed=0):
    rng = np.random.default_rng(seed)
    p = np.array([0.4, -0.1, 0.05])[:order]
    cfg = DetectorConfig(n_list=n_list, whitener=WhitenerCoeffs(p))
    phi, err = initial_state(cfg)
    z = rng.normal(0, 1.0, size=windows * period) + rng.choice(
        [-2.0, 0.0, 2.0], size=windows * period)
    t0 = time.perf_counter()
    for w in range(windows):
        out = kernel.run_window(z[w * period:(w + 1) * period], p, phi, err, n_list)
        # Renormalized continuation, as the detector does.
        bits, metrics, states, ranks, errs = out
        phi = np.full_like(phi, np.inf)
        err = np.zeros_like(err)
        for i in range(bits.shape[0]):
            phi[int(states[i]), int(ranks[i])] = metrics[i] - metrics[0]
            err[int(states[i]), int(ranks[i])] = errs[i]
    dt = time.perf_counter() - t0
    return windows * period / dt


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--windows", type=int, default=200)
    ap.add_argument("--n-list", type=int, nargs="+", default=[1, 4, 16])
    args = ap.parse_args()

    kernels = [get_kernel("pure")]
    if HAVE_COMPILED_KERNEL:
        kernels.insert(0, get_kernel("compiled"))
    else:
        print("compiled kernel unavailable; benchmarking pure only")

    print(f"{'N':>4s}  " + "".join(f"{k.KERNEL_NAME + ' (bits/s)':>20s}" for k in kernels)
          + f"{'speedup':>10s}" * (len(kernels) > 1))
    for n in args.n_list:
        rates = [bench(k, n, args.windows) for k in kernels]
        row = f"{n:4d}  " + "".join(f"{r:20.0f}" for r in rates)
        if len(rates) > 1:
            row += f"{rates[0] / rates[1]:9.1f}x"
        print(row)


if __name__ == "__main__":
    main()
