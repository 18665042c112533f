"""How often each node's trailing MCZ fires in the distributed MCZ."""

import argparse

from netdqc.verify import correction_frequencies


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--runs", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    for n, k in [(4, 2), (6, 3), (8, 4), (10, 4)]:
        freq = correction_frequencies(n, k, args.runs, args.seed)
        cells = " ".join(f"{f:.3f}" for f in freq)
        print(f"N={n:2d} k={k}  {cells}")


if __name__ == "__main__":
    main()
