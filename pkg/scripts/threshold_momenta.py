"""Threshold momenta k_n(delta) against the two-term expansion, over many decades of delta."""

import argparse

import numpy as np

from hallfiber import asymptotics as asy
from hallfiber.errors import PrecisionFloorError


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--bands", type=int, nargs="+", default=[1, 2, 3])
    ap.add_argument("--log-delta", type=float, nargs=2, default=[-1.0, -11.0], metavar=("HI", "LO"))
    ap.add_argument("--points", type=int, default=11)
    args = ap.parse_args()

    print(f"{'n':>2} {'delta':>9} {'k_numeric':>12} {'k_expansion':>12} {'gap':>9} {'residual':>10}")
    for n in args.bands:
        for e in np.linspace(*args.log_delta, args.points):
            delta = 10.0**e
            try:
                t = asy.k_delta(n, delta)
            except PrecisionFloorError as exc:
                print(f"{n:>2} {delta:9.2e}  {exc}")
                continue
            gap = t.k_numeric - t.k_expansion
            print(f"{n:>2} {delta:9.2e} {t.k_numeric:12.6f} {t.k_expansion:12.6f} {gap:9.5f} {t.residual:10.1e}")


if __name__ == "__main__":
    main()
