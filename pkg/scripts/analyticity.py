"""Complex extension of exp(-alpha x^2) from samples at exponentially perturbed nodes.

    python scripts/analyticity.py --N 16 24 32 --alpha 3.14159 1.0
"""

import argparse

from rvinterp.bounds_lab import analyticity_demo
from rvinterp.nodes import NodePlan, Perturbation


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--N", type=int, nargs="+", default=[16, 24, 32])
    p.add_argument("--alpha", type=float, nargs="+", default=[3.141592653589793, 2.0, 1.0])
    p.add_argument("--c", type=float, default=0.01)
    p.add_argument("--rate", type=float, default=0.5)
    p.add_argument("--radius", type=float, default=1.5)
    a = p.parse_args()
    for N in a.N:
        plan = NodePlan(Perturbation.exponential(a.c, a.rate), N)
        for alpha in a.alpha:
            try:
                r = analyticity_demo(plan, alpha, a.radius)
            except ValueError as exc:
                print(f"N {N:3d} alpha {alpha:.3f}: {exc}")
                continue
            g = r.growth
            print(f"N {N:3d} alpha {alpha:.3f}: sample decay {r.sample_decay:.3f}, basis growth {r.basis_growth:.3f}, "
                  f"tail {r.margin_tail:.1e}, max rel error {r.max_rel_error:.1e}, "
                  f"order {g.order:.2f} type {g.type_fit:.3f}")


if __name__ == "__main__":
    main()
