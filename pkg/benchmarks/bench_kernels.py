#!/usr/bin/env python3
"""Time the numba kernels against their numpy versions in one process.

    python benchmarks/bench_kernels.py [--n 100000] [--repeat 5]

Both backends are called through the public ``backend=`` argument, so the
comparison covers exactly the code the library runs.  Results agree to a
few ulps; the maximum relative difference is printed next to each timing.
Run with OSCPOLY_NUMBA=0 to confirm the numpy path works without numba
(the numba rows are then skipped).
"""
import argparse
import time

import numpy as np

from oscpoly import _accel, kernels
from oscpoly.params import derive_params, theorem_interval

CASES = [(200, 2.0), (200, 0.0), (40, -10.25)]
MAPS = ["phase_closed", "phase_phi", "r_bound", "eps_b_bound", "b_values"]


def best_of(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=100_000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    backends = ["numpy"] + (["numba"] if _accel.HAVE_NUMBA else [])
    print(f"n={args.n}  backends={backends}")
    print(f"{'case':>16} {'kernel':>14} " + " ".join(f"{b + ' ns/pt':>14}" for b in backends) + f" {'speedup':>8} {'max rel diff':>13}")
    for k, a in CASES:
        p = derive_params(k, a)
        xs = np.linspace(0.0, theorem_interval(p).x_end, args.n, endpoint=False)
        args_ = (p.u, p.q, p.one_minus_q, xs)
        for name in MAPS:
            fn = getattr(kernels, name)
            out, ns = {}, {}
            for b in backends:
                out[b] = fn(*args_, backend=b)  # warm-up and compile
                ns[b] = 1e9 * best_of(lambda: fn(*args_, backend=b), args.repeat) / args.n
            row = f"{f'k={k} a={a}':>16} {name:>14} " + " ".join(f"{ns[b]:14.2f}" for b in backends)
            if len(backends) == 2:
                ref = out["numpy"]
                diff = np.nanmax(np.abs(out["numba"] - ref) / np.maximum(np.abs(ref), 1e-300))
                row += f" {ns['numpy'] / ns['numba']:8.2f} {diff:13.2e}"
            print(row)
        # adaptive quadrature of |eps b| up to 0.99 x_end
        x_hi = 0.99 * theorem_interval(p).x_end
        for b in backends:
            kernels.integrate_profile(kernels.INTEGRAND_ABS_EPS_B, p.u, p.q, p.one_minus_q, 0.0, x_hi, 1e-14, 1e-11,
                                      backend=b)
        t = {b: best_of(lambda: kernels.integrate_profile(kernels.INTEGRAND_ABS_EPS_B, p.u, p.q, p.one_minus_q, 0.0,
                                                            x_hi, 1e-14, 1e-11, backend=b), args.repeat)
             for b in backends}
        row = f"{f'k={k} a={a}':>16} {'int |eps b|':>14} " + " ".join(f"{1e9 * t[b]:14.0f}" for b in backends)
        if len(backends) == 2:
            row += f" {t['numpy'] / t['numba']:8.2f}"
        print(row + "   (ns per integral)")


if __name__ == "__main__":
    main()
