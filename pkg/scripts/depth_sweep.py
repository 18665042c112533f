"""Depth ratio of the distributed MCZ versus k, and the speedup at the best k.

Writes two CSV files: the full (N, k) sweep and one row per N with the
optimal k and its speedup.
"""

import argparse
import csv
import math
from pathlib import Path

from netdqc.cost import SweepRow, optimal_k, speedup, depth_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, nargs="+", default=[8, 18, 32, 50, 72, 98])
    ap.add_argument("--k-max", type=int, default=20)
    ap.add_argument("--speedup-n-max", type=int, default=200)
    ap.add_argument("--out-dir", default="results")
    args = ap.parse_args()

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = depth_sweep(args.n, range(2, args.k_max + 1))
    with open(out / "depth_ratio.csv", "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(SweepRow.COLUMNS)
        w.writerows(r.as_tuple() for r in rows)

    with open(out / "speedup.csv", "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["N", "optimal_k", "speedup", "speedup_over_sqrt_N"])
        for n in range(4, args.speedup_n_max + 1):
            s = speedup(n)
            w.writerow([n, optimal_k(n), s, s / math.sqrt(n)])

    for n in args.n:
        best = min((r for r in rows if r.n == n), key=lambda r: r.ratio)
        print(f"N={n:4d}  min ratio {best.ratio:.4f} at k={best.k}  "
              f"(sqrt(2N)={math.sqrt(2 * n):.2f}, speedup {speedup(n):.3f})")
    print(f"wrote {out / 'depth_ratio.csv'} and {out / 'speedup.csv'}")


if __name__ == "__main__":
    main()
