"""Tabulate phi_{r,alpha}(theta2) for several alpha and check it is decreasing."""
import argparse

import numpy as np

from spde2d.phi import phi


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--r", type=float, default=1.8974)
    ap.add_argument("--alpha", type=float, nargs="+", default=[0.5, 1.0, 1.5, 2.5])
    ap.add_argument("--theta2", type=float, nargs=2, default=[0.05, 2.0])
    ap.add_argument("--points", type=int, default=50)
    args = ap.parse_args()
    grid = np.linspace(*args.theta2, args.points)
    print("alpha,theta2,phi")
    for alpha in args.alpha:
        vals = [phi(args.r, alpha, t) for t in grid]
        for t, v in zip(grid, vals):
            print(f"{alpha},{t:.6g},{v:.12g}")
        if np.any(np.diff(vals) >= 0):
            print(f"# alpha={alpha}: not strictly decreasing")


if __name__ == "__main__":
    main()
