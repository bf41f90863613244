"""Finite-eta ground-state photon numbers against the eta -> infinity limit.

Example:
    python scripts/photon_convergence.py --alpha 1.2 --beta 0.8 --R 1.2 --eta 25,50,100,200
"""
import argparse

from tmrabi.analytic import mean_photon_analytic
from tmrabi.model import ModelParams
from tmrabi.solver import solve_ground_state


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--alpha", type=float, default=1.2)
    ap.add_argument("--beta", type=float, default=0.8)
    ap.add_argument("--R", type=float, default=1.2)
    ap.add_argument("--eta", default="25,50,100,200", help="comma-separated eta values")
    args = ap.parse_args()

    limit = mean_photon_analytic(ModelParams(args.alpha, args.beta, R=args.R))
    print(f"limit: n1/eta={limit.n1_over_eta:.6f} n2/eta={limit.n2_over_eta:.6f}")
    print(f"{'eta':>8} {'n1/eta':>10} {'n2/eta':>10} {'n2/n1':>9} {'dim':>7} {'conv':>5}")
    for eta in (float(e) for e in args.eta.split(",")):
        res = solve_ground_state(ModelParams(args.alpha, args.beta, 0.0, args.R, eta))
        ratio = res.n2 / res.n1 if res.n1 > 0 else float("nan")
        print(f"{eta:8g} {res.n1 / eta:10.6f} {res.n2 / eta:10.6f} {ratio:9.2e} "
              f"{res.trunc_used.dimension:7d} {str(res.converged):>5}")


if __name__ == "__main__":
    main()
