"""Reduced-scale rerun of the m1 x n grid of the reference Monte Carlo table.

Usage: python3 scripts/table1_reduced.py --reps 50 --tail-L 10000 --out results/table1
"""
import argparse
import csv
from pathlib import Path

from spde2d.config import ExperimentConfig
from spde2d.harness import ESTIMATORS, load_reference, run_mc


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--reps", type=int, default=50)
    ap.add_argument("--tail-L", type=int, default=0, help="alias-tail cutoff (0 = block modes only)")
    ap.add_argument("--m1", type=int, nargs="+", default=[15])
    ap.add_argument("--n", type=int, nargs="+", default=[50, 100])
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--out", default="results/table1")
    args = ap.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for m1 in args.m1:
        for n in args.n:
            cfg = ExperimentConfig(m1=m1, n=n, reps=args.reps, tail_L=args.tail_L, threads=args.threads)
            table, _ = run_mc(cfg, out_dir=out / f"m1_{m1}_n_{n}")
            ref = load_reference(1, m1, n) or {}
            row = {"m1": m1, "n": n, "failed": table.n_failed, "flagged": table.n_flagged}
            for name in ESTIMATORS:
                key = name[:-4]
                row[f"{key}_mean"] = table.mean(name)
                row[f"{key}_sd"] = table.sd(name)
                row[f"{key}_ref"] = ref.get(f"{key}_mean", float("nan"))
            rows.append(row)
            print(", ".join(f"{k}={v:.4g}" if isinstance(v, float) else f"{k}={v}" for k, v in row.items()))
    with open(out / "table1_reduced.csv", "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        w.writerows(rows)


if __name__ == "__main__":
    main()
