"""Time the numba and pure-numpy kernel backends on the same inputs.

Usage: python benchmarks/bench_kernels.py [--sizes 256 1024 4096] [--repeat 5]

Both backends are imported directly, so the ``FRACVOLTERRA_NUMBA`` flag does
not matter here. Numba compilation happens in a warm-up call that is not timed.
"""

import argparse
import timeit

import numpy as np

from fracvolterra._kernels import numba_kernels, numpy_kernels
from fracvolterra._quad import running_weights
from fracvolterra.fbm import cell_covariances, get_sampler, path_rng


def make_cases(n, rng_seed=0):
    W = get_sampler(1.0, n, 0.75).sample(path_rng(rng_seed), 2)
    vals = np.ascontiguousarray(W.values)
    dt = 1.0 / n
    alpha = 0.3
    interior, end = running_weights(np.arange(n + 1, dtype=float), -alpha - 1.0)
    interior2, end2 = running_weights(np.arange(n + 1, dtype=float), alpha - 2.0)
    qden = (np.arange(n + 1) * dt) ** (1 - alpha)
    qden[0] = np.inf
    breaks = np.concatenate(([0.0], np.arange(n) + 0.5))
    mi, me = running_weights(breaks, -alpha - 1.0)
    omega = cell_covariances(n, dt, 0.75)
    cells = np.ascontiguousarray(vals[1:])
    return {
        "holder_sup": lambda k: k.holder_sup(vals, dt, 0.7),
        "walpha1_integrals": lambda k: k.walpha1_integrals(vals, interior, end),
        "w1malpha2_sup": lambda k: k.w1malpha2_sup(vals, qden, interior2, end2),
        "frac_left_mid": lambda k: k.frac_left_mid(vals, mi, me),
        "frac_right_mid": lambda k: k.frac_right_mid(vals, mi, me),
        "toeplitz_apply": lambda k: k.toeplitz_apply(cells, omega),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[256, 1024, 4096])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    print(f"{'kernel':<20}{'n':>7}{'numpy [ms]':>13}{'numba [ms]':>13}{'speed-up':>10}{'max diff':>11}")
    for n in args.sizes:
        for name, call in make_cases(n).items():
            ref = np.asarray(call(numpy_kernels))
            got = np.asarray(call(numba_kernels))  # also compiles
            diff = float(np.max(np.abs(ref - got))) if ref.size else 0.0
            t_np = min(timeit.repeat(lambda: call(numpy_kernels), number=1, repeat=args.repeat))
            t_nb = min(timeit.repeat(lambda: call(numba_kernels), number=1, repeat=args.repeat))
            print(f"{name:<20}{n:>7}{t_np * 1e3:>13.3f}{t_nb * 1e3:>13.3f}"
                  f"{t_np / t_nb:>10.1f}{diff:>11.1e}")


if __name__ == "__main__":
    main()
