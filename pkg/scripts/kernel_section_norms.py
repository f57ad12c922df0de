"""Norm of a kernel section recovered by the Gram solve.

For the left scenario the target ``K_l(., y0; T)`` has squared norm
``K_l(y0, y0; T)`` in the reachable space. This script reports the relative
error of ``norm_estimate**2`` as the collocation set on (0, 1) refines.

    python3 scripts/kernel_section_norms.py --y0 0.3 0.6 --T 0.5 1 2
"""

import argparse
import csv
import sys

import numpy as np

from heatrkhs.control import StateField, min_norm_control
from heatrkhs.kernels import KernelSpec, eval_kernel


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--y0", type=float, nargs="+", default=[0.3, 0.6, 0.85])
    ap.add_argument("--T", type=float, nargs="+", default=[0.5, 1.0, 2.0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[4, 8, 16, 24])
    args = ap.parse_args()
    out = csv.writer(sys.stdout, lineterminator="\n")
    out.writerow(["T", "y0", "points", "norm2", "K_yy", "rel_error", "lambda"])
    for T in args.T:
        spec = KernelSpec("left", T)
        for y0 in args.y0:
            kyy = float(np.real(eval_kernel(spec, y0, y0)))
            for n in args.sizes:
                x = np.linspace(0.05, 0.95, n)
                res = min_norm_control("left", StateField(x, eval_kernel(spec, x, y0), T), M=1024)
                out.writerow([T, y0, n, "%.10g" % res.norm_estimate**2, "%.10g" % kyy,
                              "%.3e" % (abs(res.norm_estimate**2 - kyy) / kyy), "%.3e" % res.lam])


if __name__ == "__main__":
    main()
