"""Distributed vs monolithic Grover over a grid of N and k."""

import argparse
import time

import numpy as np

from netdqc.grover import GroverSpec, run_distributed_grover, run_monolithic_grover
from netdqc.network import PartitionPlan


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, nargs="+", default=[3, 4, 5, 6, 7, 8])
    ap.add_argument("--k", type=int, nargs="+", default=[2, 3])
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    print(f"{'N':>3} {'k':>3} {'marked':>10} {'layers':>6} {'qubits':>6} {'ebits':>6} "
          f"{'success':>10} {'max |dP|':>10} {'sec':>6}")
    for n in args.n:
        for k in args.k:
            if k > n:
                continue
            marked = format(int(rng.integers(2 ** n)), f"0{n}b")
            spec = GroverSpec(n, marked, 0, PartitionPlan.balanced(n, k))
            t0 = time.perf_counter()
            dist = run_distributed_grover(spec, seed=int(rng.integers(2 ** 32)))
            dt = time.perf_counter() - t0
            mono = run_monolithic_grover(spec)
            err = np.max(np.abs(dist.outcome_distribution - mono.outcome_distribution))
            print(f"{n:>3} {k:>3} {marked:>10} {dist.layers_used:>6} {dist.total_qubits:>6} "
                  f"{dist.cost.ebits:>6} {dist.success_probability:>10.6f} {err:>10.1e} {dt:>6.2f}")


if __name__ == "__main__":
    main()
