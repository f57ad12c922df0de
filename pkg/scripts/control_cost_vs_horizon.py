"""Cost of steering the rod to a fixed profile as the horizon varies.

The reachable set does not depend on T, but the cheapest control does. For a
target produced by a reference control at T = 1 this prints the L2 cost of
the synthesized control for each scenario and horizon.

    python3 scripts/control_cost_vs_horizon.py --T 0.25 0.5 1 2 4
"""

import argparse
import csv
import sys

import numpy as np

from heatrkhs.control import (ControlSignal, StateField, apply_operator, min_norm_control)

SCENARIOS = ("left", "sym", "both")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--T", type=float, nargs="+", default=[0.25, 0.5, 1.0, 2.0, 4.0])
    ap.add_argument("--points", type=int, default=10)
    ap.add_argument("--M", type=int, default=4096)
    args = ap.parse_args()
    x = np.linspace(0.1, 0.9, args.points)
    u_ref = ControlSignal.from_function(lambda t: np.sin(np.pi * t), 1.0, args.M)
    out = csv.writer(sys.stdout, lineterminator="\n")
    out.writerow(["scenario", "T", "control_norm", "norm_estimate", "residual", "lambda"])
    for sc in SCENARIOS:
        profile = apply_operator(sc, u_ref, u_ref, x).values
        for T in args.T:
            res = min_norm_control(sc, StateField(x, profile, T), M=args.M)
            out.writerow([sc, T, "%.6g" % res.control_norm, "%.6g" % res.norm_estimate,
                          "%.3e" % res.residual, "%.3e" % res.lam])


if __name__ == "__main__":
    main()
