"""Decay envelopes on the real line and growth on complex disks for the basis.

    python scripts/decay_and_growth.py [--quick]
"""

import argparse
import math

import numpy as np

from rvinterp.bounds_lab import (
    basis_function,
    decay_fit,
    exponential_rate,
    gaussian_calibration,
    growth_in_n,
    growth_on_disks,
    lower_bound_check,
)


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--quick", action="store_true", help="smaller index ranges")
    a = p.parse_args()
    nmax = 6 if a.quick else 12

    print("upper envelope  A n^(3/4) log^3(1+n) [e^{-c x^2/n} for x <= C n, e^{-c x} beyond], fitted on peaks")
    for target in ("value", "derivative"):
        fit = decay_fit(range(1, nmax + 1), target=target)
        k = ", ".join(f"{name}={v:.4g}" for name, v in fit.constants.items())
        print(f"  {target:10s} violation {fit.violation:.4f}  {k}")
    r = exponential_rate(0)
    print(f"  a_0 decay rate {r.constants['rate']:.4f} (sqrt(3) pi = {math.sqrt(3) * math.pi:.4f})")

    print("lower envelope  c_n dist(x, sqrt N) e^{-c x}")
    for n in range(min(nmax, 5) + 1):
        for sign in (1, -1):
            fit = lower_bound_check(n, sign)
            if fit.degenerate:
                continue
            print(f"  b_{n}^{'+' if sign > 0 else '-'}  c_n {fit.constants['c_n']:.4g}  c {fit.constants['c']:.4f}"
                  f"  violation {max(fit.violation, 0.0):.3f}")

    print("growth of b_0^+ on |z| = r")
    rep = growth_on_disks(basis_function(0), np.linspace(1.0, 3.0, 9))
    for rr, lm in zip(rep.radii, rep.log_max):
        print(f"  r {rr:.2f}  log M {lm:9.4f}  log M / r^2 {lm / rr**2:.4f}")
    print(f"  order {rep.order:.3f}  type at last radius {rep.type_last:.3f}  quadratic-fit type {rep.type_fit:.3f}"
          f"  (pi = {math.pi:.4f})")

    idx = growth_in_n(3.0, 10 if not a.quick else 6)
    print(f"log max |b_n^+| on |z| = 3 against n: slope {idx.slope:.4f}, R^2 {idx.r_squared:.4f}")
    cal = gaussian_calibration(N=32)
    print(f"calibration (Gaussian from its own samples): order {cal.order:.4f}, type {cal.type_last:.4f}")


if __name__ == "__main__":
    main()
