"""Star network of worker QPUs around a router, simulated as one state vector.

Global layout: each worker node contributes its data qubits followed by its
communication qubits, in node order; the router's qubits come last.
"""

from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import sim
from .cost import CostReport

ROUTER = -1


class NetworkError(ValueError):
    pass


class StarViolation(NetworkError):
    pass


class NotFresh(NetworkError):
    pass


class CapacityError(NetworkError):
    pass


class UnknownPair(NetworkError):
    pass


class Role(enum.Enum):
    DATA = "data"
    COMM = "comm"
    ROUTER = "router"


@dataclass(frozen=True)
class QubitAddress:
    node: int
    index: int
    role: Role

    def __post_init__(self):
        if (self.role is Role.ROUTER) != (self.node == ROUTER):
            raise NetworkError(f"role {self.role.value} not allowed on node {self.node}")

    def __str__(self):
        where = "R" if self.node == ROUTER else f"n{self.node}"
        return f"{where}.{self.role.value}{self.index}"


@dataclass(frozen=True)
class StarTopology:
    nodes: tuple[tuple[int, int], ...]
    router_qubits: int

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple((int(d), int(c)) for d, c in self.nodes))
        for i, (d, c) in enumerate(self.nodes):
            if d < 0 or c < 1:
                raise NetworkError(f"node {i} needs >= 0 data and >= 1 communication qubits")
        if self.router_qubits < 0:
            raise NetworkError("router_qubits must be non-negative")

    @property
    def total_qubits(self) -> int:
        return sum(d + c for d, c in self.nodes) + self.router_qubits

    @classmethod
    def for_partition(cls, plan: "PartitionPlan", comm: int = 1, router: int | None = None):
        return cls(tuple((n, comm) for n in plan.per_node_counts),
                   plan.node_count if router is None else router)

    def to_dict(self) -> dict:
        return {"node_count": len(self.nodes), "nodes": [list(n) for n in self.nodes],
                "router": self.router_qubits}

    @classmethod
    def from_dict(cls, d: dict) -> "StarTopology":
        try:
            nodes = [tuple(n) for n in d["nodes"]]
            router = int(d["router"])
        except (KeyError, TypeError, ValueError) as exc:
            raise NetworkError(f"bad topology description: {exc}") from None
        if "node_count" in d and int(d["node_count"]) != len(nodes):
            raise NetworkError("node_count does not match the nodes list")
        if any(len(n) != 2 for n in nodes):
            raise NetworkError("each node is a [data, comm] pair")
        return cls(tuple(nodes), router)


@dataclass(frozen=True)
class PartitionPlan:
    total_data_qubits: int
    node_count: int
    per_node_counts: tuple[int, ...]

    def __post_init__(self):
        counts = tuple(self.per_node_counts)
        object.__setattr__(self, "per_node_counts", counts)
        if len(counts) != self.node_count or sum(counts) != self.total_data_qubits:
            raise NetworkError("per-node counts must sum to N over k nodes")
        if counts and max(counts) - min(counts) > 1:
            raise NetworkError("partition must be balanced")

    @classmethod
    def balanced(cls, n: int, k: int) -> "PartitionPlan":
        if k < 1 or n < k:
            raise NetworkError(f"need 1 <= k <= N, got N={n}, k={k}")
        q, r = divmod(n, k)
        return cls(n, k, tuple(q + 1 if i < r else q for i in range(k)))

    def logical_to_node(self) -> list[tuple[int, int]]:
        """(node, local index) of each logical data qubit, in logical order."""
        return [(node, j) for node, c in enumerate(self.per_node_counts) for j in range(c)]


class Tag(enum.Enum):
    FAN_OUT = "FanOutCorrection"
    FAN_IN = "FanInCorrection"
    BSM = "BsmCorrection"
    TELEPORT = "TeleportCorrection"


@dataclass(frozen=True)
class ClassicalMessage:
    source: int
    dest: int
    bit: int
    tag: Tag


@dataclass
class ClassicalLog:
    entries: list[ClassicalMessage] = field(default_factory=list)

    def count(self, tag: Tag | None = None) -> int:
        return sum(1 for e in self.entries if tag is None or e.tag is tag)


def send_classical(log: ClassicalLog, source: int, dest: int, bit: int, tag: Tag) -> None:
    if source == dest:
        raise NetworkError("classical message source and destination coincide")
    if bit not in (0, 1):
        raise NetworkError(f"classical bit must be 0 or 1, got {bit}")
    log.entries.append(ClassicalMessage(source, dest, int(bit), tag))


@dataclass(frozen=True)
class BellPair:
    a: QubitAddress
    b: QubitAddress
    serial: int
    swapped: bool = False

    def ends(self) -> tuple[QubitAddress, QubitAddress]:
        return (self.a, self.b)


@dataclass
class BellPairLedger:
    """Bell pairs produced and measured out.

    Pairs produced by entanglement swapping are tracked like link pairs so the
    conservation identity holds; ``link_consumed`` counts only physical
    router links, which is the ebit cost.
    """

    created: int = 0
    consumed: int = 0
    link_consumed: int = 0
    open_pairs: list[BellPair] = field(default_factory=list)

    def check(self) -> None:
        assert self.consumed <= self.created
        assert self.created - self.consumed == len(self.open_pairs)


def consume_pair(pair: BellPair, ledger: BellPairLedger) -> None:
    if pair not in ledger.open_pairs:
        raise UnknownPair(f"pair {pair} is not open")
    ledger.open_pairs.remove(pair)
    ledger.consumed += 1
    if not pair.swapped:
        ledger.link_consumed += 1


def ledger_report(ledger: BellPairLedger, log: ClassicalLog, notes: str = "") -> CostReport:
    by_tag = Counter(e.tag.value for e in log.entries)
    return CostReport(
        ebits=ledger.link_consumed,
        classical_bits=len(log.entries),
        ebits_created=ledger.created,
        ebits_consumed=ledger.consumed,
        classical_by_tag=dict(sorted(by_tag.items())),
        notes=notes,
    )


@dataclass
class Checkpoint:
    depth: int
    state: sim.Register
    probability: float


class ScriptedOutcomes:
    """Measurement outcome source that follows a fixed prefix of bits.

    Past the prefix it takes outcome 0 unless that has zero probability. Where
    outcome 1 was also possible it saves the pre-measurement state, so a later
    run with that prefix can skip the shared part of the protocol: while
    ``replaying`` the network only does bookkeeping, and the quantum state is
    restored at the checkpoint depth.
    """

    def __init__(self, prefix: Sequence[int] = (), checkpoint: Checkpoint | None = None):
        self.prefix = list(prefix)
        self.path: list[int] = []
        self.probability = 1.0
        self.alternatives: list[tuple[list[int], Checkpoint]] = []
        self.checkpoint = checkpoint

    @property
    def replaying(self) -> bool:
        return self.checkpoint is not None

    def advance(self) -> sim.Register | None:
        depth = len(self.path)
        if depth < self.checkpoint.depth:
            self.path.append(self.prefix[depth])
            return None
        cp, self.checkpoint = self.checkpoint, None
        self.probability = cp.probability
        return cp.state

    def choose(self, p1: float, state: sim.Register) -> int:
        depth = len(self.path)
        p0 = 1.0 - p1
        if depth < len(self.prefix):
            bit = self.prefix[depth]
            if (p1 if bit else p0) < sim.ZERO_PROB:
                raise sim.SimulationError(f"scripted outcome {bit} has zero probability")
        else:
            bit = 0 if p0 >= sim.ZERO_PROB else 1
            if bit == 0 and p1 >= sim.ZERO_PROB:
                self.alternatives.append(
                    (self.path + [1], Checkpoint(depth, state.copy(), self.probability)))
        self.path.append(bit)
        self.probability *= p1 if bit else p0
        return bit


class SeededOutcomes:
    def __init__(self, seed: int | np.random.Generator):
        self.rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
        self.path: list[int] = []
        self.probability = 1.0

    def choose(self, p1: float, state: sim.Register) -> int:
        bit = int(self.rng.random() < p1)
        self.path.append(bit)
        self.probability *= p1 if bit else 1.0 - p1
        return bit


class Network:
    """State, address map and resource ledgers of one star network."""

    def __init__(self, topology: StarTopology, outcomes=None):
        if topology.total_qubits > sim.MAX_QUBITS:
            raise CapacityError(
                f"{topology.total_qubits} qubits exceeds the simulator cap of {sim.MAX_QUBITS}"
            )
        self.topology = topology
        self.addresses: list[QubitAddress] = []
        for node, (d, c) in enumerate(topology.nodes):
            self.addresses += [QubitAddress(node, j, Role.DATA) for j in range(d)]
            self.addresses += [QubitAddress(node, j, Role.COMM) for j in range(c)]
        self.addresses += [QubitAddress(ROUTER, j, Role.ROUTER) for j in range(topology.router_qubits)]
        self._index = {a: i for i, a in enumerate(self.addresses)}
        self.reg = sim.Register(len(self.addresses))
        self.ledger = BellPairLedger()
        self.log = ClassicalLog()
        self.creg: dict[str, int] = {}
        self.outcomes = outcomes if outcomes is not None else SeededOutcomes(0)
        self.busy: set[QubitAddress] = set()
        self.open_cats: set[QubitAddress] = set()
        self._serial = 0

    # -- addressing

    @property
    def num_nodes(self) -> int:
        return len(self.topology.nodes)

    def index(self, addr: QubitAddress) -> int:
        try:
            return self._index[addr]
        except KeyError:
            raise NetworkError(f"no qubit {addr} in this network") from None

    def address(self, index: int) -> QubitAddress:
        return self.addresses[index]

    def data(self, node: int, j: int) -> QubitAddress:
        return QubitAddress(node, j, Role.DATA)

    def comm(self, node: int, j: int = 0) -> QubitAddress:
        return QubitAddress(node, j, Role.COMM)

    def router(self, j: int) -> QubitAddress:
        return QubitAddress(ROUTER, j, Role.ROUTER)

    def data_qubits(self, node: int) -> list[QubitAddress]:
        return [self.data(node, j) for j in range(self.topology.nodes[node][0])]

    def all_data(self) -> list[QubitAddress]:
        return [a for a in self.addresses if a.role is Role.DATA]

    def free_comm(self, node: int) -> QubitAddress:
        for j in range(self.topology.nodes[node][1]):
            a = self.comm(node, j)
            if a not in self.busy:
                return a
        raise CapacityError(f"node {node} has no free communication qubit")

    def free_router(self, count: int) -> list[QubitAddress]:
        free = [self.router(j) for j in range(self.topology.router_qubits)
                if self.router(j) not in self.busy]
        if len(free) < count:
            raise CapacityError(f"router needs {count} free qubits, has {len(free)}")
        return free[:count]

    # -- quantum operations

    @property
    def state(self) -> sim.StateVector:
        """Full state vector over every qubit of the network (a fresh copy)."""
        return self.reg.to_state()

    @state.setter
    def state(self, value: sim.StateVector) -> None:
        if value.num_qubits != len(self.addresses):
            raise NetworkError(f"state has {value.num_qubits} qubits, network has {len(self.addresses)}")
        self.reg = sim.Register.from_state(value)

    def fidelity(self, expected: sim.StateVector) -> float:
        return self.reg.fidelity(expected)

    @property
    def live(self) -> bool:
        return not getattr(self.outcomes, "replaying", False)

    def apply(self, op: sim.GateOp) -> None:
        if self.live:
            self.reg.apply(op, self.creg)

    def gate(self, kind_fn, *addrs: QubitAddress, **kw) -> None:
        """``net.gate(sim.CNOT, a, b)`` applies a gate by address."""
        self.apply(kind_fn(*(self.index(a) for a in addrs), **kw))

    def local(self, kind_fn, *addrs: QubitAddress, **kw) -> None:
        """Like :meth:`gate`, but all qubits must sit on one node."""
        if len({a.node for a in addrs}) != 1:
            raise StarViolation(f"local gate spans several nodes: {[str(a) for a in addrs]}")
        self.gate(kind_fn, *addrs, **kw)

    def measure(self, addr: QubitAddress) -> int:
        q = self.index(addr)
        if not self.live:
            restored = self.outcomes.advance()
            if restored is None:
                return self.outcomes.path[-1]
            self.reg = restored
        p1 = min(max(self.reg.prob_one(q), 0.0), 1.0)
        bit = self.outcomes.choose(p1, self.reg)
        self.reg.collapse(q, bit, p1 if bit else 1.0 - p1)
        return bit

    def reset(self, addr: QubitAddress, bit: int) -> None:
        """Return a qubit just measured as ``bit`` to |0>."""
        if bit:
            self.gate(sim.X, addr)

    def is_zero(self, addr: QubitAddress) -> bool:
        if not self.live:
            return True
        return self.reg.prob_one(self.index(addr)) < sim.ZERO_PROB

    def load_data(self, psi: sim.StateVector, qubits: Sequence[QubitAddress] | None = None) -> None:
        """Overwrite the network state with ``psi`` on data qubits, ancillas |0>."""
        qubits = self.all_data() if qubits is None else list(qubits)
        self.state = sim.embed(psi, [self.index(a) for a in qubits], len(self.addresses))

    def data_distribution(self, qubits: Sequence[QubitAddress] | None = None) -> np.ndarray:
        qubits = self.all_data() if qubits is None else list(qubits)
        return sim.probabilities(self.state, [self.index(a) for a in qubits])

    # -- entanglement and classical traffic

    def create_bell_pair(self, a: QubitAddress, b: QubitAddress) -> BellPair:
        if (a.role is Role.ROUTER) == (b.role is Role.ROUTER):
            raise StarViolation(f"Bell pairs must join a worker and the router, got {a}, {b}")
        worker = a if b.role is Role.ROUTER else b
        if worker.role is not Role.COMM:
            raise StarViolation(f"worker end {worker} is not a communication qubit")
        for q in (a, b):
            if q in self.busy or not self.is_zero(q):
                raise NotFresh(f"qubit {q} is not a fresh |0>")
        self.gate(sim.H, a)
        self.gate(sim.CNOT, a, b)
        return self._open_pair(a, b)

    def _open_pair(self, a, b, swapped=False) -> BellPair:
        pair = BellPair(a, b, self._serial, swapped)
        self._serial += 1
        self.ledger.created += 1
        self.ledger.open_pairs.append(pair)
        self.busy.update((a, b))
        return pair

    def consume(self, pair: BellPair) -> None:
        consume_pair(pair, self.ledger)
        self.busy.difference_update(pair.ends())

    def send(self, source: int, dest: int, bit: int, tag: Tag) -> None:
        send_classical(self.log, source, dest, bit, tag)

    def report(self, notes: str = "") -> CostReport:
        return ledger_report(self.ledger, self.log, notes)


def build_star(topology: StarTopology, outcomes=None) -> Network:
    return Network(topology, outcomes)


def report_delta(after: CostReport, before: CostReport, notes: str = "") -> CostReport:
    tags = set(after.classical_by_tag) | set(before.classical_by_tag)
    return CostReport(
        ebits=after.ebits - before.ebits,
        classical_bits=after.classical_bits - before.classical_bits,
        ebits_created=after.ebits_created - before.ebits_created,
        ebits_consumed=after.ebits_consumed - before.ebits_consumed,
        classical_by_tag={t: after.classical_by_tag.get(t, 0) - before.classical_by_tag.get(t, 0)
                          for t in sorted(tags)
                          if after.classical_by_tag.get(t, 0) != before.classical_by_tag.get(t, 0)},
        notes=notes,
    )


def nodes_of(addrs: Iterable[QubitAddress]) -> list[int]:
    return sorted({a.node for a in addrs})

