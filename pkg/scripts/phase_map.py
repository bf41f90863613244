"""Text rendering of the eta -> infinity phase diagram in the (gamma, R) plane.

Each character is one grid cell: '.' normal, '2' mode-2 superradiant,
'1' mode-1 superradiant, 'o' the gamma = 1 line with a degenerate ring.
"""
import argparse

import numpy as np

from tmrabi.analytic import Phase, classify_phase
from tmrabi.model import ModelParams

SYMBOLS = {Phase.NORMAL: ".", Phase.SUPERRADIANT_Y2: "2", Phase.SUPERRADIANT_Y1: "1", Phase.BOUNDARY_U1: "o"}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--beta", type=float, default=1.0)
    ap.add_argument("--gamma-max", type=float, default=2.0)
    ap.add_argument("--R-max", type=float, default=2.0)
    ap.add_argument("--cols", type=int, default=61)
    ap.add_argument("--rows", type=int, default=25)
    args = ap.parse_args()

    gammas = np.linspace(0.0, args.gamma_max, args.cols)
    gammas[0] = gammas[1] / 2
    if args.gamma_max > 1.0:
        # put one column exactly on gamma = 1
        gammas[np.argmin(np.abs(gammas - 1.0))] = 1.0
    for R in np.linspace(args.R_max, 0.0, args.rows):
        line = "".join(
            SYMBOLS[classify_phase(ModelParams(g * args.beta**2, args.beta, R=R), boundary_tol=1e-12).label]
            for g in gammas
        )
        print(f"R={R:5.2f} {line}")
    print(f"gamma from {gammas[0]:.3f} to {gammas[-1]:.3f}, beta = {args.beta}")


if __name__ == "__main__":
    main()
