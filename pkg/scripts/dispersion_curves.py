"""Tabulate the first few band functions and velocities on a k grid."""

import argparse
import csv
import sys

import numpy as np

from hallfiber import fiber_solver as fs


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--bands", type=int, default=4)
    ap.add_argument("--k-min", type=float, default=-3.0)
    ap.add_argument("--k-max", type=float, default=5.0)
    ap.add_argument("--points", type=int, default=81)
    ap.add_argument("--workers", type=int, default=4)
    ap.add_argument("--out", default="-")
    args = ap.parse_args()

    cfg = fs.SolverConfig()
    ks = np.linspace(args.k_min, args.k_max, args.points)
    out = sys.stdout if args.out == "-" else open(args.out, "w", newline="")
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["n", "k", "lambda", "dlambda", "status"])
    for n in range(1, args.bands + 1):
        # cross-checking every point doubles the cost; the test suite does that
        for r in fs.band_sweep(n, ks, cfg, cross_check=False, workers=args.workers):
            if isinstance(r, fs.BandPoint):
                w.writerow([n, "%.6g" % r.k, "%.17g" % r.lam, "%.17g" % r.dlam, "ok"])
            else:
                w.writerow([n, "%.6g" % r.k, "", "", r.reason])
    if out is not sys.stdout:
        out.close()


if __name__ == "__main__":
    main()
