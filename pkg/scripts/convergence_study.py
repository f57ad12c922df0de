"""Discretization study for the synthesis round trip and the operator.

Prints, as CSV, the round-trip residual of the left scenario against the
number of control samples M, and the Crank-Nicolson discrepancy against the
grid resolution.

    python3 scripts/convergence_study.py --T 1
"""

import argparse
import csv
import sys

import numpy as np

from heatrkhs.control import ControlSignal, apply_operator, fd_oracle, min_norm_control


def roundtrip_rows(T, sizes, n_points):
    u = ControlSignal.from_function(lambda t: t**2 * (1 - t), T, 16384)
    x = np.linspace(0.05, 0.95, n_points)
    target = apply_operator("left", u, None, x)
    scale = np.max(np.abs(target.values))
    for M in sizes:
        res = min_norm_control("left", target, M=M)
        yield ["roundtrip", M, res.residual / scale, res.control_norm / u.l2_norm()]


def fd_rows(T, grids):
    ul = lambda t: np.sin(np.pi * t)  # noqa: E731
    ur = lambda t: t * (1 - t)  # noqa: E731
    x = np.linspace(0.05, 0.95, 20)
    exact = apply_operator("both", ControlSignal.from_function(ul, T, 16000),
                           ControlSignal.from_function(ur, T, 16000), x).values
    for nx in grids:
        ref = fd_oracle(ul, ur, nx, 20 * nx, x, T=T).values
        yield ["crank-nicolson", nx, float(np.max(np.abs(ref - exact))), ""]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--T", type=float, default=1.0)
    ap.add_argument("--points", type=int, default=12)
    args = ap.parse_args()
    out = csv.writer(sys.stdout, lineterminator="\n")
    out.writerow(["study", "resolution", "error", "norm_ratio"])
    for row in roundtrip_rows(args.T, (1024, 2048, 4096, 8192, 16384), args.points):
        out.writerow(row)
    for row in fd_rows(args.T, (100, 200, 400)):
        out.writerow(row)


if __name__ == "__main__":
    main()
