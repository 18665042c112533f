"""Single-solution Grover search, monolithic and distributed over a star network."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import sim
from .cost import CostReport
from .network import Network, PartitionPlan, SeededOutcomes, StarTopology, NetworkError
from .protocols import distributed_mcz


def optimal_iterations(n: int) -> int:
    if n < 2:
        raise ValueError(f"need N >= 2, got {n}")
    return max(1, math.floor(math.pi / 4 * math.sqrt(2 ** n)))


@dataclass(frozen=True)
class GroverSpec:
    num_qubits: int
    marked: str
    layers: int = 0
    partition: PartitionPlan | None = None

    def __post_init__(self):
        if len(self.marked) != self.num_qubits or set(self.marked) - {"0", "1"}:
            raise ValueError(f"marked must be a {self.num_qubits}-bit string, got {self.marked!r}")
        if self.layers < 0:
            raise ValueError("layers must be >= 0")
        if self.partition is not None and self.partition.total_data_qubits != self.num_qubits:
            raise ValueError("partition does not cover the search register")

    @property
    def layers_used(self) -> int:
        return self.layers or optimal_iterations(self.num_qubits)


@dataclass
class GroverResult:
    outcome_distribution: np.ndarray
    success_probability: float
    cost: CostReport
    layers_used: int
    total_qubits: int

    def top(self, count: int = 4) -> list[tuple[str, float]]:
        n = int(math.log2(len(self.outcome_distribution)))
        order = np.argsort(-self.outcome_distribution, kind="stable")[:count]
        return [(format(int(i), f"0{n}b"), float(self.outcome_distribution[i])) for i in order]


def _mark_flips(marked: str) -> list[int]:
    # X on every qubit whose marked bit is 0 turns |marked> into |1...1>
    return [i for i, b in enumerate(marked) if b == "0"]


def _mcz_op(qubits: list[int]) -> sim.GateOp:
    return sim.MCZ(*qubits) if len(qubits) > 1 else sim.Z(qubits[0])


def run_monolithic_grover(spec: GroverSpec) -> GroverResult:
    n = spec.num_qubits
    state = sim.new_state(n, 0)
    qubits = list(range(n))
    flips = _mark_flips(spec.marked)

    def apply(ops):
        for op in ops:
            sim.apply_inplace(state, op)

    apply(sim.H(q) for q in qubits)
    for _ in range(spec.layers_used):
        apply(sim.X(q) for q in flips)
        apply([_mcz_op(qubits)])
        apply(sim.X(q) for q in flips)
        apply(sim.H(q) for q in qubits)
        apply(sim.X(q) for q in qubits)
        apply([_mcz_op(qubits)])
        apply(sim.X(q) for q in qubits)
        apply(sim.H(q) for q in qubits)
    dist = sim.probabilities(state)
    return GroverResult(dist, float(dist[int(spec.marked, 2)]), CostReport(notes="monolithic"),
                        spec.layers_used, n)


def grover_network(spec: GroverSpec, seed: int = 0) -> Network:
    """Network sized for the spec: ceil/floor(N/k) data + 1 comm per node, k router qubits."""
    plan = spec.partition or PartitionPlan.balanced(spec.num_qubits, 1)
    return Network(StarTopology.for_partition(plan), SeededOutcomes(seed))


def run_distributed_grover(spec: GroverSpec, network: Network | None = None,
                           seed: int = 0) -> GroverResult:
    """Grover with both MCZs of every layer executed by :func:`distributed_mcz`.

    Logical qubit i lives on the node given by the partition's contiguous
    split; X and H layers run locally on the owning node.
    """
    plan = spec.partition or PartitionPlan.balanced(spec.num_qubits, 1)
    net = network if network is not None else grover_network(spec, seed)
    nodes = net.topology.nodes
    if len(nodes) != plan.node_count:
        raise NetworkError(f"network has {len(nodes)} nodes, partition needs {plan.node_count}")
    for i, need in enumerate(plan.per_node_counts):
        if nodes[i][0] < need or nodes[i][1] < 1:
            raise NetworkError(f"node {i} needs {need} data qubits and a communication qubit")
    if plan.node_count > 1 and net.topology.router_qubits < plan.node_count:
        raise NetworkError(f"router needs {plan.node_count} qubits")

    logical = [net.data(node, j) for node, j in plan.logical_to_node()]
    by_node = [[q for q in logical if q.node == i] for i in range(plan.node_count)]
    flips = [logical[i] for i in _mark_flips(spec.marked)]

    def layer(gate, qubits):
        for q in qubits:
            net.local(gate, q)

    layer(sim.H, logical)
    for _ in range(spec.layers_used):
        layer(sim.X, flips)
        distributed_mcz(net, by_node)
        layer(sim.X, flips)
        layer(sim.H, logical)
        layer(sim.X, logical)
        distributed_mcz(net, by_node)
        layer(sim.X, logical)
        layer(sim.H, logical)
    dist = net.data_distribution(logical)
    return GroverResult(dist, float(dist[int(spec.marked, 2)]), net.report("distributed"),
                        spec.layers_used, len(net.addresses))
