"""Defect, inverse agreement, node residual and reconstruction error over N and amplitude.

    python scripts/perturbation_sweep.py --N 16 32 64 --amps 0.005 0.01 0.05 0.1
"""

import argparse
import json

import numpy as np

from rvinterp.interpolate import Gaussian, reconstruct, sample
from rvinterp.nodes import NodePlan, Perturbation
from rvinterp.perturb_op import (
    NeumannError,
    WeightScheme,
    build_truncation,
    hs_defect,
    invert_direct,
    invert_neumann,
    node_residual,
    perturbed_coeffs,
    synthesis_matrix,
    unweighted_inverse,
)


def run(N, amp, alpha, weight, grid, Phi):
    plan = NodePlan(Perturbation.power(amp, alpha), N)
    op = build_truncation(plan, weight)
    d = hs_defect(op)
    direct = invert_direct(op)
    try:
        inv = invert_neumann(op)
        gap = float(np.abs(inv.inverse - direct.inverse).max())
    except NeumannError:
        inv, gap = direct, float("nan")
    res = node_residual(perturbed_coeffs(op, inv.inverse), plan, min(N, 32))
    f = Gaussian()
    err = reconstruct(sample(f, plan), grid, unweighted_inverse(op, inv.inverse), truth=f, Phi=Phi).sup_error
    return {"N": N, "amp": amp, "defect": d, "tail": op.tail_estimate(), "method": inv.method,
            "neumann_gap": gap, "condition": direct.condition, "node_residual": res, "sup_error": err}


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--N", type=int, nargs="+", default=[16, 32, 64])
    p.add_argument("--amps", type=float, nargs="+", default=[0.005, 0.01, 0.05, 0.1])
    p.add_argument("--alpha", type=float, default=1.5)
    p.add_argument("--weight", default="s=5")
    p.add_argument("--json", help="also write the rows here")
    a = p.parse_args()
    grid = np.arange(-300, 301) * 0.01
    w = WeightScheme.parse(a.weight)
    rows = []
    print(f"{'N':>3} {'amp':>7} {'defect':>9} {'tail':>9} {'method':>8} {'|N-D|':>9} {'cond':>8} {'resid':>9} {'sup err':>9}")
    for N in a.N:
        Phi = synthesis_matrix(N, grid, "extended")
        for amp in a.amps:
            r = run(N, amp, a.alpha, w, grid, Phi)
            rows.append(r)
            print(f"{N:3d} {amp:7.3f} {r['defect']:9.5f} {r['tail']:9.2e} {r['method']:>8} {r['neumann_gap']:9.1e} "
                  f"{r['condition']:8.3f} {r['node_residual']:9.1e} {r['sup_error']:9.1e}")
    if a.json:
        with open(a.json, "w") as fh:
            json.dump(rows, fh, indent=2)


if __name__ == "__main__":
    main()
