"""Regenerate the critical-kappa table used by fracflow.numeric.

For one eigenmode of -mu0 D2 with eigenvalue lam, the explicit scheme is the
scalar recursion v[n+1] = v[n] - kappa * sum_i w[n-i] v[i] with
kappa = lam * dt**(alpha+1) and dt-free product-trapezoid weights w. We bisect
for the largest kappa whose response to v[0] = 1 stays within 1.05 over
n_steps. Prints a Python literal to paste into numeric.py.
"""

import argparse

import numpy as np

from fracflow._backend import kernels
from fracflow.fracops import product_weights


def is_stable(alpha, kappa, n_steps):
    conv, first = product_weights(alpha, 1.0, n_steps)
    # one interior node: D2 of (0, q, 0) is -2 q
    hist, bad = kernels.march(np.array([0.0, 1.0, 0.0]), conv, first, 0.5 * kappa, n_steps, 10.0)
    return bad < 0 and np.max(np.abs(hist[:, 1])) <= 1.05


def critical_kappa(alpha, n_steps, iters=40):
    lo, hi = 0.0, 8.0
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if is_stable(alpha, mid, n_steps):
            lo = mid
        else:
            hi = mid
    return lo


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--steps", type=int, default=4000)
    args = ap.parse_args()
    alphas = [0.0] + [round(0.025 * k, 3) for k in range(1, 40)] + [0.98, 0.99, 0.995, 0.999]
    rows = []
    for a in alphas:
        k = critical_kappa(max(a, 1e-9), args.steps)
        rows.append((a, k))
        print(f"# alpha={a:.3f} kappa={k:.6g}", flush=True)
    print("_KAPPA_TABLE = (")
    for a, k in rows:
        print(f"    ({a!r}, {k:.6g}),")
    print(")")


if __name__ == "__main__":
    main()
