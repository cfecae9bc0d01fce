"""Time the compiled kernels against their pure-Python twins.

    python benchmarks/bench_backends.py [--repeat 5] [--quick]

Each row reports the best-of-N wall time per backend and the speedup, and
checks that both backends return the same numbers.
"""

import argparse
import timeit

import numpy as np

from fracflow import _fallback, fracops

try:
    from fracflow import _core
except ImportError:
    _core = None


def cases(quick):
    n_t = 400 if quick else 2000
    n_z = 2000 if quick else 20000
    rng = np.random.default_rng(7)
    conv, first = fracops.product_weights(0.5, 1.0 / n_t, n_t)
    values = rng.standard_normal((n_t + 1, 64))
    z = -rng.uniform(0.0, 20.0, n_z)
    n_cells, steps = (32, 300) if quick else (64, 1500)
    y = np.linspace(0.0, 1.0, n_cells + 1)
    u0 = np.sin(np.pi * y)
    mconv, mfirst = fracops.product_weights(0.5, 1.0 / steps, steps)
    coef = (1.0 / steps) * n_cells ** 2
    return [
        (f"history_convolve {n_t + 1}x64",
         lambda k: k.history_convolve(values, conv, first)),
        (f"ml_series_many nu=1.5 n={n_z}",
         lambda k: k.ml_series_many(1.5, 1.0, z, 1e-12, 10000)[0]),
        (f"ml_asymptotic_many nu=1.5 n={n_z}",
         lambda k: k.ml_asymptotic_many(1.5, 1.0, z - 200.0, 1e-12, 200)[0]),
        (f"march {n_cells} cells x {steps} steps",
         lambda k: k.march(u0, mconv, mfirst, coef, steps, 10.0)[0]),
    ]


def best(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--quick", action="store_true", help="small sizes (smoke run)")
    args = p.parse_args(argv)
    if _core is None:
        print("compiled extension not built; only the fallback can be timed")
    print(f"{'kernel':<40} {'python [s]':>11} {'cython [s]':>11} {'speedup':>8}  agree")
    for name, run in cases(args.quick):
        t_py = best(lambda: run(_fallback), args.repeat)
        if _core is None:
            print(f"{name:<40} {t_py:11.4g} {'-':>11} {'-':>8}  -")
            continue
        t_c = best(lambda: run(_core), args.repeat)
        a, b = run(_fallback), run(_core)
        scale = max(1.0, float(np.max(np.abs(a))))
        agree = float(np.max(np.abs(np.asarray(a) - np.asarray(b)))) <= 1e-12 * scale
        print(f"{name:<40} {t_py:11.4g} {t_c:11.4g} {t_py / t_c:8.1f}  {agree}")


if __name__ == "__main__":
    main()
