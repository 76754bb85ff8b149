"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5]

Prints one line per kernel with the best-of-N wall time of each backend and
the speedup.
"""
import argparse
import timeit

import numpy as np

from bclab import _kernels_py, kernels


def cases():
    rng = np.random.default_rng(0)
    n = np.arange(60, dtype=float)
    pw, dpw = 0.7 ** n, n * 0.7 ** np.maximum(n - 1, 0)
    xi = rng.uniform(-1e4, 1e4, 1 << 16)
    coef = 0.45 ** np.arange(20)
    bits = rng.integers(0, 1 << 64, size=1 << 16, dtype=np.uint64, endpoint=False)
    bcoef = np.vstack([0.45 ** np.arange(64)] * 2)
    knots = np.sort(rng.uniform(-2, 2, 513))
    pcoefs = rng.normal(size=(512, 6))
    x = rng.uniform(-2.5, 2.5, 1 << 18)
    d = rng.uniform(-1e-4, 1e-4, 1 << 18)
    return {
        "cos_product": (pw, xi),
        "cos_product_dlambda": (pw, dpw, xi[: 1 << 14]),
        "signed_sums": (coef,),
        "bit_signed_sums": (bits, bcoef),
        "ppoly_eval": (knots, pcoefs, 0.0, 1.0, x),
        "ppoly_increment": (knots, pcoefs, 0.0, 1.0, x, d),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if "cython" not in kernels.available_backends():
        print("compiled kernels not built; only the numpy fallback is available")
        return
    from bclab import _ckernels

    print(f"{'kernel':<22}{'numpy [ms]':>12}{'cython [ms]':>13}{'speedup':>9}")
    for name, a in cases().items():
        t_py = min(timeit.repeat(lambda: getattr(_kernels_py, name)(*a), number=1, repeat=args.repeat))
        t_c = min(timeit.repeat(lambda: getattr(_ckernels, name)(*a), number=1, repeat=args.repeat))
        print(f"{name:<22}{1e3 * t_py:>12.2f}{1e3 * t_c:>13.2f}{t_py / t_c:>8.1f}x")


if __name__ == "__main__":
    main()
