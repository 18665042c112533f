"""Outcome-independence checks: every measurement branch against a monolithic oracle."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Callable, Iterator

import numpy as np

from . import sim
from .cost import CostReport, Strategy, ebit_cost
from .network import (
    Network,
    PartitionPlan,
    ScriptedOutcomes,
    StarTopology,
    Tag,
)
from . import protocols as P

FIDELITY_TOL = 1e-10


@dataclass
class Branch:
    path: tuple[int, ...]
    probability: float
    network: Network
    result: Any


def iter_branches(setup: Callable[[Any], Network],
                  protocol: Callable[[Network], Any]) -> Iterator[Branch]:
    """Run ``protocol`` once per measurement branch, depth first.

    ``setup(outcomes)`` must build a fresh network (with its input state) that
    draws measurement results from ``outcomes``.
    """
    stack = [([], None)]
    while stack:
        prefix, checkpoint = stack.pop()
        src = ScriptedOutcomes(prefix, checkpoint)
        net = setup(src)
        result = protocol(net)
        stack.extend(reversed(src.alternatives))
        yield Branch(tuple(src.path), src.probability, net, result)


@dataclass
class CaseResult:
    suite: str
    case_id: str
    seed: int
    branches: int
    min_fidelity: float
    worst_path: tuple[int, ...]
    total_probability: float
    cost: CostReport
    expected_ebits: int | None = None
    passed: bool = True
    detail: str = ""
    topology: StarTopology | None = None

    def to_record(self) -> dict:
        return {
            "suite": self.suite,
            "case": self.case_id,
            "seed": self.seed,
            "branches": self.branches,
            "min_fidelity": self.min_fidelity,
            "worst_path": "".join(map(str, self.worst_path)),
            "total_probability": self.total_probability,
            "ebits": self.cost.ebits,
            "expected_ebits": self.expected_ebits,
            "classical_bits": self.cost.classical_bits,
            "passed": self.passed,
            "detail": self.detail,
            "topology": self.topology.to_dict() if self.topology else None,
            "ledger": self.cost.to_dict(),
        }


def check_all_branches(suite: str, case_id: str, seed: int, topology: StarTopology,
                       prepare: Callable[[Network], None],
                       protocol: Callable[[Network], Any],
                       oracle: Callable[[Network], sim.StateVector],
                       expected_ebits: int | None = None) -> CaseResult:
    """Compare the full network state after ``protocol`` with ``oracle`` on every branch.

    ``oracle`` receives a freshly prepared network and returns the expected
    final state. Ancillas must come back to |0>, since they are part of the
    compared state.
    """
    ref = Network(topology)
    prepare(ref)
    start = ref.reg.copy()
    expected = oracle(ref)

    def setup(src):
        net = Network(topology, src)
        net.reg = start.copy()
        return net

    worst, worst_path, total, count = 1.0, (), 0.0, 0
    costs = set()
    cost = None
    for b in iter_branches(setup, protocol):
        count += 1
        total += b.probability
        f = b.network.fidelity(expected)
        if f < worst:
            worst, worst_path = f, b.path
        cost = b.network.report()
        costs.add((cost.ebits, cost.classical_bits))
        b.network.ledger.check()
    passed = worst >= 1 - FIDELITY_TOL and abs(total - 1) < 1e-9 and len(costs) == 1
    detail = []
    if expected_ebits is not None and cost.ebits != expected_ebits:
        passed = False
        detail.append(f"ebits {cost.ebits} != {expected_ebits}")
    if len(costs) != 1:
        detail.append(f"ledger differs across branches: {sorted(costs)}")
    if abs(total - 1) >= 1e-9:
        detail.append(f"branch probabilities sum to {total}")
    return CaseResult(suite, case_id, seed, count, worst, worst_path, total, cost,
                      expected_ebits, passed, "; ".join(detail), topology)


# -- suites ----------------------------------------------------------------


def _seed_for(seed: int, *key: int) -> int:
    return int(np.random.SeedSequence([seed, *key]).generate_state(1)[0])


def mcz_case(n: int, k: int, seed: int) -> CaseResult:
    plan = PartitionPlan.balanced(n, k)
    topology = StarTopology.for_partition(plan)
    rng = np.random.default_rng(seed)
    psi = sim.random_state(n, rng)

    def prepare(net):
        net.load_data(psi)

    def protocol(net):
        return P.distributed_mcz(net, [net.data_qubits(i) for i in range(k)])

    def oracle(net):
        data = [net.index(a) for a in net.all_data()]
        op = sim.MCZ(*data) if len(data) > 1 else sim.Z(data[0])
        return sim.apply_gate(net.state, op)

    expected = ebit_cost(Strategy.STAR_COLLECTIVE, k=k) if k > 1 else 0
    return check_all_branches("mcz", f"N={n},k={k}", seed, topology, prepare, protocol,
                              oracle, expected)


def diagonal_case(arity: int, nodes: int, seed: int) -> CaseResult:
    """Random diagonal over ``arity`` qubits spread round-robin on ``nodes`` nodes."""
    rng = np.random.default_rng(seed)
    counts = [0] * nodes
    for i in range(arity):
        counts[i % nodes] += 1
    topology = StarTopology(tuple((c, 1) for c in counts), arity)
    gate = sim.DiagonalGate(arity, tuple(rng.uniform(0, 2 * math.pi, 1 << arity)))
    psi = sim.random_state(arity, rng)

    def qubits(net):
        return [net.data(i % nodes, i // nodes) for i in range(arity)]

    def prepare(net):
        net.load_data(psi, qubits(net))

    def protocol(net):
        return P.remote_diagonal(net, qubits(net), gate)

    def oracle(net):
        return sim.apply_gate(net.state, sim.Diagonal(gate, *(net.index(a) for a in qubits(net))))

    lo, hi = ebit_cost(Strategy.DIAGONAL_BOUNDS, k=nodes, n=arity)
    res = check_all_branches("diagonal", f"m={arity},nodes={nodes}", seed, topology, prepare,
                             protocol, oracle, arity)
    if not lo <= res.cost.ebits <= hi:
        res.passed = False
        res.detail += f" ebits outside [{lo}, {hi}]"
    return res


def phi_plus_fidelity(net: Network, a, b) -> float:
    """Fidelity of qubits a, b with Phi+ given every other qubit is |0>."""
    target = sim.embed(sim.StateVector(2, np.array([1, 0, 0, 1]) / math.sqrt(2)),
                       [net.index(a), net.index(b)], net.state.num_qubits)
    return sim.fidelity_up_to_global_phase(net.state, target)


def swap_case(seed: int = 0) -> CaseResult:
    topology = StarTopology(((0, 1), (0, 1)), 2)

    def protocol(net):
        before = net.report()
        ab = net.create_bell_pair(net.comm(0), net.router(0))
        bc = net.create_bell_pair(net.router(1), net.comm(1))
        ac = P.entanglement_swap(net, ab, bc)
        return ac, before

    worst, worst_path, total, count, costs = 1.0, (), 0.0, 0, set()

    def setup(src):
        return Network(topology, src)

    for b in iter_branches(setup, protocol):
        ac, _ = b.result
        f = phi_plus_fidelity(b.network, ac.a, ac.b)
        count += 1
        total += b.probability
        if f < worst:
            worst, worst_path = f, b.path
        led = b.network.ledger
        costs.add((led.link_consumed, led.created, len(led.open_pairs)))
        cost = b.network.report()
    passed = worst >= 1 - 1e-12 and count == 4 and costs == {(2, 3, 1)}
    return CaseResult("swap", "A-R-C", seed, count, worst, worst_path, total, cost, 2, passed,
                      "" if passed else f"ledger states {sorted(costs)}", topology)


def cat_roundtrip_case(seed: int) -> CaseResult:
    topology = StarTopology(((2, 1),), 1)
    psi = sim.random_state(2, np.random.default_rng(seed))

    def prepare(net):
        net.load_data(psi)

    def protocol(net):
        g = P.cat_entangler(net, net.data(0, 0), [net.router(0)])
        P.cat_disentangler(net, g)

    return check_all_branches("protocols", "cat-roundtrip", seed, topology, prepare, protocol,
                              lambda net: net.state.copy(), 1)


def teleport_case(seed: int) -> CaseResult:
    """Teleport node 0's data qubit to the router; node 0 also holds a partner qubit."""
    topology = StarTopology(((2, 1),), 1)
    psi = sim.random_state(2, np.random.default_rng(seed))

    def prepare(net):
        net.load_data(psi)

    def protocol(net):
        pair = net.create_bell_pair(net.comm(0), net.router(0))
        return P.teleport_state(net, net.data(0, 0), pair)

    def oracle(net):
        # the state of data(0,0) moves to the router qubit, data(0,0) ends in |0>
        return sim.embed(psi, [net.index(net.router(0)), net.index(net.data(0, 1))],
                         net.state.num_qubits)

    return check_all_branches("protocols", "teleport", seed, topology, prepare, protocol,
                              oracle, 1)


def random_unitary_2x2(rng: np.random.Generator) -> np.ndarray:
    z = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def two_qubit_case(seed: int) -> CaseResult:
    rng = np.random.default_rng(seed)
    dec = P.TwoQubitDecomposition(
        random_unitary_2x2(rng), random_unitary_2x2(rng),
        random_unitary_2x2(rng), random_unitary_2x2(rng),
        sim.DiagonalGate(2, tuple(rng.uniform(0, 2 * math.pi, 4))),
    )
    topology = StarTopology(((1, 1), (1, 1)), 2)
    psi = sim.random_state(2, rng)

    def prepare(net):
        net.load_data(psi)

    def protocol(net):
        return P.remote_two_qubit(net, net.data(0, 0), net.data(1, 0), dec)

    def oracle(net):
        out = sim.StateVector(2, dec.matrix() @ psi.amplitudes)
        return sim.embed(out, [net.index(net.data(0, 0)), net.index(net.data(1, 0))],
                         net.state.num_qubits)

    return check_all_branches("protocols", "two-qubit", seed, topology, prepare, protocol,
                              oracle, 2)


def lump_case(seed: int) -> CaseResult:
    """CRz then Rzz on the same two fanned qubits, plus an MCZ over three nodes."""
    rng = np.random.default_rng(seed)
    theta, phi = rng.uniform(0, 2 * math.pi, 2)
    topology = StarTopology(((1, 1), (1, 1), (1, 1)), 3)
    psi = sim.random_state(3, rng)

    def qubits(net):
        return [net.data(i, 0) for i in range(3)]

    def gates(net):
        a, b, c = qubits(net)
        return [(sim.crz_diagonal(theta), [a, b]), (sim.rzz_diagonal(phi), [a, b]),
                (sim.mcz_diagonal(3), [a, b, c])]

    def prepare(net):
        net.load_data(psi)

    def protocol(net):
        return P.lump_execute(net, qubits(net), gates(net))

    def oracle(net):
        out = net.state.copy()
        for g, qs in gates(net):
            sim.apply_inplace(out, sim.Diagonal(g, *(net.index(q) for q in qs)))
        return out

    return check_all_branches("protocols", "lump", seed, topology, prepare, protocol, oracle,
                              ebit_cost(Strategy.DENSE_STAR, k=3, m=1))


SUITES = ("protocols", "mcz", "diagonal", "swap")


def run_suite(suite: str, max_n: int, max_k: int, seed: int, cases: int = 3) -> list[CaseResult]:
    results = []
    if suite == "mcz":
        for n in range(2, max_n + 1):
            for k in range(1, min(max_k, n) + 1):
                for c in range(cases):
                    results.append(mcz_case(n, k, _seed_for(seed, 0, n, k, c)))
    elif suite == "diagonal":
        for arity in range(2, max_n + 1):
            for nodes in range(2, min(max_k, arity) + 1):
                for c in range(cases):
                    results.append(diagonal_case(arity, nodes, _seed_for(seed, 1, arity, nodes, c)))
    elif suite == "swap":
        results.append(swap_case(seed))
    elif suite == "protocols":
        for c in range(cases):
            s = _seed_for(seed, 2, c)
            results += [cat_roundtrip_case(s), teleport_case(s), two_qubit_case(s), lump_case(s)]
    else:
        raise ValueError(f"unknown suite {suite!r}")
    return results


def correction_frequencies(n: int, k: int, runs: int, seed: int) -> np.ndarray:
    """Fraction of seeded distributed-MCZ runs in which each node's trailing MCZ fired."""
    from .network import SeededOutcomes

    plan = PartitionPlan.balanced(n, k)
    topology = StarTopology.for_partition(plan)
    rng = np.random.default_rng(seed)
    fired = np.zeros(k)
    for _ in range(runs):
        net = Network(topology, SeededOutcomes(rng))
        net.load_data(sim.random_state(n, rng))
        P.distributed_mcz(net, [net.data_qubits(i) for i in range(k)])
        for e in net.log.entries:
            if e.tag is Tag.FAN_IN:
                fired[e.dest] += e.bit
    return fired / runs
