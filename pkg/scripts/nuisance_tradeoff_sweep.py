#!/usr/bin/env python3
"""Sweep the assumed nuisance MSE and print the elimination-bound tradeoff.

For the phase model (built-in E) the interest-MSE bound rises from the
partial-information floor g11 as the allowed nuisance error V_NN approaches
its quantum floor g22, quantifying how much the unknown phase costs.

Usage:
    python scripts/nuisance_tradeoff_sweep.py [--theta1 0.5] [--points 12]
"""
import argparse
import sys

import numpy as np

from qnuisance.bounds import nui_bound_11, weight_limit_bound
from qnuisance.fisher import sld_fisher
from qnuisance.models import make_builtin


def run(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--theta1", type=float, default=0.5)
    parser.add_argument("--theta2", type=float, default=0.3)
    parser.add_argument("--points", type=int, default=12)
    args = parser.parse_args(argv)

    model = make_builtin("E")
    bundle = sld_fisher(model, [args.theta1, args.theta2])
    g22 = bundle.G_inv[1, 1]
    limit = weight_limit_bound("nagaoka-1+1", [[1.0]], bundle.G_inv)
    print(f"# model E, theta = ({args.theta1}, {args.theta2})")
    print(f"# weight-limit floor (nuisance error unconstrained): {limit.value:.12g}")
    print("V_NN/g22  bound  excess_over_floor")
    for ratio in np.geomspace(1.05, 1e3, args.points):
        res = nui_bound_11(bundle.G_inv, 0.0, ratio * g22)
        print(f"{ratio:8.3f}  {res.value:.12g}  {res.value - limit.value:.12g}")
    return 0


if __name__ == "__main__":
    sys.exit(run())
