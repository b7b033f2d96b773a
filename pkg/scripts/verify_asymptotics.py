"""Leading-term ratios, Kato-Temple enclosures and the bulk velocity envelope in one pass."""

import argparse

from hallfiber import asymptotics as asy
from hallfiber import fiber_solver as fs
from hallfiber import quasimode as qm


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--bands", type=int, nargs="+", default=[1, 2, 3])
    ap.add_argument("--k", type=float, nargs="+", default=[3.0, 3.5, 4.0, 4.5])
    ap.add_argument("--cutoff", choices=["exp_bump", "smoothstep7"], default="exp_bump")
    ap.add_argument("--deltas", type=float, nargs="+", default=[1e-4, 1e-6, 1e-8])
    args = ap.parse_args()
    cfg = fs.SolverConfig()
    cut = qm.CutoffSpec(args.cutoff)

    for n in args.bands:
        rep = asy.convergence_report(n, args.k, cfg)
        print(f"band {n}: slope of |rho-1| {rep.slope:.2f}, of |rho'-1| {rep.slope_prime:.2f}")
        e_n = 2.0 * n - 1
        for row in rep.rows:
            res = qm.energy_and_residual(qm.build(n, row.k, cut, cfg))
            kt = qm.kato_temple(res.eta, res.epsilon, e_n - 1, e_n + 1)
            inside = kt.contains(e_n + row.excess)
            print(
                f"  k={row.k:4.2f} rho={row.rho:.4f} rho'={row.rho_prime:.4f} "
                f"eps={res.epsilon:.2e} enclosure={'ok' if inside else 'MISS' if kt.valid else 'invalid'}"
            )
        mu = asy.calibrate_mu(n, args.deltas, cfg)
        ok = asy.sandwich_check(n, min(args.deltas), max(args.deltas), mu, config=cfg)[0]
        print(f"  calibrated mu = {mu:.3f}, sandwich {'holds' if ok else 'fails'}")


if __name__ == "__main__":
    main()
