"""Verdicts of the gap functional for x_n = a sqrt(n) across a, and matching of perturbed nodes.

    python scripts/node_classification.py --a 0.8 0.9 0.99 1.0 1.01 1.2
"""

import argparse

import numpy as np

from rvinterp.nodes import classify_pair, match_nodes


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--a", type=float, nargs="+", default=[0.8, 0.9, 0.95, 0.99, 1.0, 1.01, 1.05, 1.2])
    p.add_argument("--count", type=int, default=2000)
    p.add_argument("--D", type=float, nargs="+", default=[3.0, 4.0, 5.0])
    a = p.parse_args()
    n = np.arange(a.count, dtype=float)
    print(f"{'a':>6} {'limit a^2/2':>11} {'tail inf':>9} {'tail sup':>9}  verdict")
    for s in a.a:
        xs = s * np.sqrt(n)
        c = classify_pair(xs, xs)
        print(f"{s:6.3f} {s * s / 2:11.4f} {c.x_inf:9.4f} {c.x_sup:9.4f}  {c.verdict}")

    # nodes sqrt(n) + n^(-D/2), matched back to sqrt(n)
    rng = np.random.default_rng(0)
    print("matching x_n = sqrt(n) + u_n n^(-D/2), |u_n| <= 1/2")
    k = np.arange(1, a.count)
    for D in a.D:
        xs = np.concatenate([[0.0], np.sqrt(k) + rng.uniform(-0.5, 0.5, k.size) * k ** (-D / 2)])
        m = match_nodes(xs, D=D)
        print(f"  D {D:.1f}: covered up to {m.covered_up_to}, induced exponent {m.exponent:.3f}, "
              f"admissible {m.admissible}")


if __name__ == "__main__":
    main()
