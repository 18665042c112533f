"""Command-line driver: ``verify``, ``grover`` and ``cost-sweep``.

Exit codes: 0 success, 1 verification failure, 2 argument error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__, sim
from .cost import SweepRow, depth_sweep
from .grover import GroverSpec, run_distributed_grover
from .network import Network, NetworkError, PartitionPlan, SeededOutcomes, StarTopology
from .verify import SUITES, run_suite


class ArgumentError(Exception):
    pass


def _record(obj: dict) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    try:
        Path(out).write_text(text)
    except OSError as exc:
        raise ArgumentError(f"cannot write {out}: {exc}") from None


def load_topology(path: str) -> StarTopology:
    try:
        return StarTopology.from_dict(json.loads(Path(path).read_text()))
    except (OSError, json.JSONDecodeError, NetworkError) as exc:
        raise ArgumentError(f"bad topology file {path}: {exc}") from None


# -- verify -------------------------------------------------------------------


def _largest_topology(suite: str, max_n: int, max_k: int) -> int:
    k = min(max_k, max_n)
    if suite == "mcz":
        return max_n + 2 * k
    if suite == "diagonal":
        return 2 * max_n + k
    if suite == "protocols":
        return 6
    return 4


def cmd_verify(args) -> int:
    suites = SUITES if args.suite == "all" else (args.suite,)
    if args.max_n < 2 or args.max_k < 1 or args.cases < 1:
        raise ArgumentError("need --max-n >= 2, --max-k >= 1, --cases >= 1")
    for s in suites:
        size = _largest_topology(s, args.max_n, args.max_k)
        if size > sim.MAX_QUBITS:
            raise ArgumentError(f"suite {s} needs {size} qubits, cap is {sim.MAX_QUBITS}")

    results = []
    for s in suites:
        results += run_suite(s, args.max_n, args.max_k, args.seed, args.cases)
    failed = [r for r in results if not r.passed]

    if args.format == "records":
        lines = []
        for r in results:
            rec = r.to_record()
            rec.update(command="verify", version=__version__, run_seed=args.seed)
            lines.append(_record(rec))
        summary = {"command": "verify", "version": __version__, "seed": args.seed,
                   "cases": len(results), "failed": len(failed),
                   "ebits_total": sum(r.cost.ebits for r in results),
                   "classical_bits_total": sum(r.cost.classical_bits for r in results),
                   "topologies": [json.loads(t) for t in
                                  sorted({_record(r.topology.to_dict()) for r in results})]}
        text = "\n".join(lines + [_record(summary)]) + "\n"
    elif args.format == "csv":
        buf = io.StringIO()
        fields = list(results[0].to_record()) if results else []
        fields = [f for f in fields if f not in ("topology", "ledger")]
        w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n", extrasaction="ignore")
        w.writeheader()
        for r in results:
            w.writerow(r.to_record())
        text = buf.getvalue()
    else:
        lines = [f"# verify suite={args.suite} seed={args.seed} version={__version__}",
                 f"{'suite':<10} {'case':<22} {'branches':>8} {'min fidelity':>20} "
                 f"{'ebits':>6} {'cbits':>6}  status"]
        for r in results:
            lines.append(f"{r.suite:<10} {r.case_id:<22} {r.branches:>8} "
                         f"{r.min_fidelity:>20.15f} {r.cost.ebits:>6} {r.cost.classical_bits:>6}  "
                         f"{'ok' if r.passed else 'FAIL ' + r.detail}")
        lines.append(f"# {len(results) - len(failed)}/{len(results)} cases passed")
        text = "\n".join(lines) + "\n"
    _emit(text, args.out)
    for r in failed:
        print(f"FAILED {r.suite} {r.case_id} seed={r.seed} "
              f"branch={''.join(map(str, r.worst_path))} fidelity={r.min_fidelity!r} {r.detail}",
              file=sys.stderr)
    return 1 if failed else 0


# -- grover -------------------------------------------------------------------


def grover_record(args) -> dict:
    n, marked = args.n, args.marked
    if len(marked) != n or set(marked) - {"0", "1"}:
        raise ArgumentError(f"--marked must be a {n}-bit string, got {marked!r}")
    if args.topology:
        topology = load_topology(args.topology)
        k = len(topology.nodes)
        if args.k is not None and args.k != k:
            raise ArgumentError(f"--k {args.k} disagrees with the topology's {k} nodes")
    else:
        k = args.k or 1
    if not 1 <= k <= n:
        raise ArgumentError(f"need 1 <= k <= N, got k={k}")
    plan = PartitionPlan.balanced(n, k)
    if not args.topology:
        topology = StarTopology.for_partition(plan)
    if topology.total_qubits > sim.MAX_QUBITS:
        raise ArgumentError(f"{topology.total_qubits} qubits exceeds the cap of {sim.MAX_QUBITS}")
    spec = GroverSpec(n, marked, args.layers, plan)
    net = Network(topology, SeededOutcomes(args.seed))
    try:
        result = run_distributed_grover(spec, net)
    except NetworkError as exc:
        raise ArgumentError(f"undersized topology: {exc}") from None
    rec = {
        "command": "grover",
        "version": __version__,
        "seed": args.seed,
        "topology": topology.to_dict(),
        "N": n,
        "k": k,
        "marked": marked,
        "layers_used": result.layers_used,
        "total_qubits": result.total_qubits,
        "success_probability": result.success_probability,
        "distribution": [float(p) for p in result.outcome_distribution],
        "ebits": result.cost.ebits,
        "classical_bits": result.cost.classical_bits,
        "ledger": result.cost.to_dict(),
    }
    if args.shots:
        rng = np.random.default_rng([args.seed, 1])
        p = result.outcome_distribution / result.outcome_distribution.sum()
        counts = rng.multinomial(args.shots, p)
        rec["shots"] = args.shots
        rec["counts"] = {format(i, f"0{n}b"): int(c) for i, c in enumerate(counts) if c}
    return rec


def cmd_grover(args) -> int:
    rec = grover_record(args)
    if args.format == "table":
        n = rec["N"]
        dist = rec["distribution"]
        order = sorted(range(len(dist)), key=lambda i: (-dist[i], i))[:4]
        lines = [
            f"# grover N={n} k={rec['k']} marked={rec['marked']} seed={rec['seed']} "
            f"version={rec['version']}",
            f"layers_used          {rec['layers_used']}",
            f"total_qubits         {rec['total_qubits']}",
            f"success_probability  {rec['success_probability']:.10f}",
            f"ebits                {rec['ebits']}",
            f"classical_bits       {rec['classical_bits']}",
            "top outcomes:",
        ] + [f"  {format(i, f'0{n}b')}  {dist[i]:.10f}" for i in order]
        text = "\n".join(lines) + "\n"
    elif args.format == "csv":
        n = rec["N"]
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["bitstring", "probability"])
        for i, p in enumerate(rec["distribution"]):
            w.writerow([format(i, f"0{n}b"), repr(p)])
        text = buf.getvalue()
    else:
        text = _record(rec) + "\n"
    _emit(text, args.out)
    return 0


# -- cost sweep -----------------------------------------------------------------


def _fmt(x) -> str:
    if isinstance(x, float):
        return "inf" if math.isinf(x) else repr(x)
    return str(x)


def cmd_cost_sweep(args) -> int:
    if args.n_min < 3 and args.n_min <= args.n_max:
        raise ArgumentError("the depth model needs N >= 3")
    if args.k_max < 2:
        raise ArgumentError("need --k-max >= 2")
    rows = depth_sweep(range(args.n_min, args.n_max + 1), range(2, args.k_max + 1))
    if args.format == "records":
        text = "".join(_record({"command": "cost-sweep", "version": __version__, "seed": args.seed,
                                **dict(zip(SweepRow.COLUMNS, r.as_tuple()))}) + "\n"
                       for r in rows)
    elif args.format == "table":
        lines = ["  ".join(f"{c:>17}" for c in SweepRow.COLUMNS)]
        lines += ["  ".join(f"{_fmt(v):>17}" for v in r.as_tuple()) for r in rows]
        text = "\n".join(lines) + "\n"
    else:
        text = ",".join(SweepRow.COLUMNS) + "\n"
        text += "".join(",".join(_fmt(v) for v in r.as_tuple()) + "\n" for r in rows)
    _emit(text, args.out)
    return 0


# -- entry point ----------------------------------------------------------------


def _u64(s: str) -> int:
    v = int(s, 0)
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_u64, default=0)
    common.add_argument("--out", default=None, help="output path (default: stdout)")

    p = argparse.ArgumentParser(prog="netdqc", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", parents=[common], help="all-branch equivalence suites")
    v.add_argument("suite", choices=SUITES + ("all",))
    v.add_argument("--max-n", type=int, default=6)
    v.add_argument("--max-k", type=int, default=3)
    v.add_argument("--cases", type=int, default=3, help="random inputs per configuration")
    v.add_argument("--format", choices=("table", "csv", "records"), default="table")
    v.set_defaults(func=cmd_verify)

    g = sub.add_parser("grover", parents=[common], help="distributed Grover search")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--marked", required=True)
    g.add_argument("--layers", type=int, default=0, help="0 = optimal iteration count")
    g.add_argument("--k", type=int, default=None, help="number of worker nodes")
    g.add_argument("--topology", default=None, help="JSON topology file")
    g.add_argument("--shots", type=int, default=0, help="0 = exact distribution only")
    g.add_argument("--format", choices=("table", "csv", "records"), default="records")
    g.set_defaults(func=cmd_grover)

    c = sub.add_parser("cost-sweep", parents=[common], help="distributed MCZ depth sweep")
    c.add_argument("--n-min", type=int, default=8)
    c.add_argument("--n-max", type=int, default=32)
    c.add_argument("--k-max", type=int, default=10)
    c.add_argument("--format", choices=("table", "csv", "records"), default="csv")
    c.set_defaults(func=cmd_cost_sweep)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if getattr(args, "layers", 0) < 0 or getattr(args, "shots", 0) < 0:
            raise ArgumentError("--layers and --shots must be non-negative")
        return args.func(args)
    except ArgumentError as exc:
        print(f"netdqc {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
