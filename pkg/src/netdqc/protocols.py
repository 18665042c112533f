"""LOCC protocols on a star network.

All corrections are driven by classical bits that travel through
:meth:`Network.send` and are applied as classically controlled gates, so the
log and the quantum state cannot disagree.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import sim
from .cost import CostReport
from .network import (
    ROUTER,
    BellPair,
    CapacityError,
    Network,
    NetworkError,
    QubitAddress,
    Role,
    Tag,
    report_delta,
)


class ProtocolError(NetworkError):
    pass


@dataclass
class CatGroup:
    source: QubitAddress
    members: list[QubitAddress]
    open: bool = True


@dataclass(frozen=True)
class TwoQubitDecomposition:
    """U = (V1 x V2) D (W1 x W2) with D diagonal."""

    V1: np.ndarray
    V2: np.ndarray
    W1: np.ndarray
    W2: np.ndarray
    D: sim.DiagonalGate

    def __post_init__(self):
        for name in ("V1", "V2", "W1", "W2"):
            m = np.asarray(getattr(self, name), dtype=np.complex128)
            if m.shape != (2, 2) or not np.allclose(m.conj().T @ m, np.eye(2), atol=1e-10):
                raise ProtocolError(f"{name} is not a 2x2 unitary")
            object.__setattr__(self, name, m)
        if self.D.arity != 2:
            raise ProtocolError("D must be a two-qubit diagonal gate")

    def matrix(self) -> np.ndarray:
        return np.kron(self.V1, self.V2) @ self.D.matrix() @ np.kron(self.W1, self.W2)


def _bit_name(net: Network, label: str) -> str:
    return f"{label}{len(net.log.entries)}"


def _fan_out_one(net: Network, source: QubitAddress, target: QubitAddress, control=None) -> None:
    """Entangle ``target`` on the router with ``source``'s node.

    ``control`` is the local gate that copies the source value onto the comm
    qubit; the default is a CNOT from ``source``.
    """
    comm = net.free_comm(source.node)
    pair = net.create_bell_pair(comm, target)
    if control is None:
        net.local(sim.CNOT, source, comm)
    else:
        control(comm)
    m = net.measure(comm)
    net.reset(comm, m)
    net.consume(pair)
    net.send(source.node, ROUTER, m, Tag.FAN_OUT)
    key = _bit_name(net, "fo")
    net.creg[key] = m
    net.apply(sim.classically_controlled(sim.X(net.index(target)), key))
    net.busy.add(target)


def cat_entangler(net: Network, source: QubitAddress,
                  router_targets: Sequence[QubitAddress]) -> CatGroup:
    """Fan ``source`` out onto router qubits: a0|0>|0..0> + a1|1>|1..1>."""
    if not router_targets:
        raise ProtocolError("cat_entangler needs at least one router target")
    if source.role is Role.ROUTER:
        raise ProtocolError("the source of a fan-out lives on a worker node")
    if source in net.open_cats:
        raise ProtocolError(f"{source} already belongs to an open cat group")
    for t in router_targets:
        if t.role is not Role.ROUTER:
            raise ProtocolError(f"fan-out target {t} is not a router qubit")
        if t in net.busy:
            raise CapacityError(f"router qubit {t} is in use")
    for t in router_targets:
        _fan_out_one(net, source, t)
    net.open_cats.add(source)
    return CatGroup(source, list(router_targets))


def cat_disentangler(net: Network, group: CatGroup) -> None:
    """Fan the group back in; one aggregated parity bit drives a Z at the source."""
    if not group.open:
        raise ProtocolError("cat group already closed")
    parity = 0
    for r in group.members:
        net.gate(sim.H, r)
        m = net.measure(r)
        net.reset(r, m)
        net.busy.discard(r)
        parity ^= m
    net.send(ROUTER, group.source.node, parity, Tag.FAN_IN)
    key = _bit_name(net, "fi")
    net.creg[key] = parity
    net.apply(sim.classically_controlled(sim.Z(net.index(group.source)), key))
    group.open = False
    net.open_cats.discard(group.source)


def remote_diagonal(net: Network, data_qubits: Sequence[QubitAddress],
                    gate: sim.DiagonalGate) -> CostReport:
    """Execute a diagonal gate on data qubits of several nodes via the router."""
    data_qubits = list(data_qubits)
    if gate.arity != len(data_qubits):
        raise ProtocolError(f"gate arity {gate.arity} != {len(data_qubits)} qubits")
    if len(set(data_qubits)) != len(data_qubits):
        raise ProtocolError("repeated data qubit")
    if any(q.role is not Role.DATA for q in data_qubits):
        raise ProtocolError("remote_diagonal acts on data qubits")
    if len({q.node for q in data_qubits}) < 2:
        raise ProtocolError("remote_diagonal needs qubits on at least two nodes")
    return lump_execute(net, data_qubits, [(gate, data_qubits)], notes="remote_diagonal")


def lump_execute(net: Network, fanned: Sequence[QubitAddress],
                 gates: Sequence[tuple[sim.DiagonalGate | sim.GateOp, Sequence[QubitAddress]]],
                 notes: str = "lump") -> CostReport:
    """One fan-out round, every gate on the router copies, one fan-in round.

    ``gates`` holds (gate, data qubits) pairs; each data qubit must be in
    ``fanned``. Gates must be diagonal in the computational basis.
    """
    fanned = list(fanned)
    if len(set(fanned)) != len(fanned):
        raise ProtocolError("repeated fanned qubit")
    resolved = []
    for g, qubits in gates:
        qubits = list(qubits)
        if isinstance(g, sim.GateOp):
            g = sim.as_diagonal(g)
        if not isinstance(g, sim.DiagonalGate):
            raise sim.SimulationError(f"{g!r} is not a diagonal gate")
        if g.arity != len(qubits):
            raise ProtocolError(f"gate arity {g.arity} != {len(qubits)} qubits")
        missing = [str(q) for q in qubits if q not in fanned]
        if missing:
            raise ProtocolError(f"gate touches qubits that were not fanned out: {missing}")
        resolved.append((g, qubits))
    targets = net.free_router(len(fanned))
    before = net.report()
    groups = {q: cat_entangler(net, q, [t]) for q, t in zip(fanned, targets)}
    for g, qubits in resolved:
        net.apply(sim.Diagonal(g, *(net.index(groups[q].members[0]) for q in qubits)))
    for q in fanned:
        cat_disentangler(net, groups[q])
    return report_delta(net.report(), before, notes)


def distributed_mcz(net: Network, data_by_node: Sequence[Sequence[QubitAddress]]) -> CostReport:
    """MCZ over data qubits spread on k nodes using one ebit per node.

    Layer 1: each node computes the AND of its qubits onto its comm qubit with
    a local MCZ conjugated by H, and fans it out to a router qubit. Layer 2:
    k-qubit MCZ on the router. Layer 3: X-basis measurement of each router
    qubit; outcome 1 triggers a local MCZ on that node's data qubits.
    """
    groups = [list(g) for g in data_by_node if len(g)]
    for g in groups:
        if len({q.node for q in g}) != 1 or any(q.role is not Role.DATA for q in g):
            raise ProtocolError("each group must hold data qubits of a single node")
    if len({g[0].node for g in groups}) != len(groups):
        raise ProtocolError("two groups on the same node")
    before = net.report()
    if len(groups) == 1:
        _local_mcz(net, groups[0])
        return report_delta(net.report(), before, "distributed_mcz")
    targets = net.free_router(len(groups))
    for g in groups:
        net.free_comm(g[0].node)

    for g, r in zip(groups, targets):
        def copy_and(comm, g=g):
            net.local(sim.H, comm)
            net.local(sim.MCZ, *g, comm)
            net.local(sim.H, comm)
        _fan_out_one(net, g[0], r, control=copy_and)

    net.gate(sim.MCZ, *targets)

    for g, r in zip(groups, targets):
        net.gate(sim.H, r)
        m = net.measure(r)
        net.reset(r, m)
        net.busy.discard(r)
        node = g[0].node
        net.send(ROUTER, node, m, Tag.FAN_IN)
        key = _bit_name(net, "fi")
        net.creg[key] = m
        inner = sim.Z(net.index(g[0])) if len(g) == 1 else sim.MCZ(*(net.index(q) for q in g))
        net.apply(sim.classically_controlled(inner, key))
    return report_delta(net.report(), before, "distributed_mcz")


def _local_mcz(net: Network, qubits: Sequence[QubitAddress]) -> None:
    if len(qubits) == 1:
        net.local(sim.Z, qubits[0])
    else:
        net.local(sim.MCZ, *qubits)


def remote_two_qubit(net: Network, qa: QubitAddress, qb: QubitAddress,
                     dec: TwoQubitDecomposition) -> CostReport:
    if qa.node == qb.node:
        raise ProtocolError("remote_two_qubit needs qubits on different nodes")
    net.local(sim.U, qa, matrix=dec.W1)
    net.local(sim.U, qb, matrix=dec.W2)
    delta = remote_diagonal(net, [qa, qb], dec.D)
    net.local(sim.U, qa, matrix=dec.V1)
    net.local(sim.U, qb, matrix=dec.V2)
    delta.notes = "remote_two_qubit"
    return delta


def _bsm(net: Network, q1: QubitAddress, q2: QubitAddress) -> tuple[int, int]:
    net.local(sim.CNOT, q1, q2)
    net.local(sim.H, q1)
    m1 = net.measure(q1)
    m2 = net.measure(q2)
    net.reset(q1, m1)
    net.reset(q2, m2)
    return m1, m2


def _pauli_correct(net: Network, target: QubitAddress, m1: int, m2: int,
                   source: int, tag: Tag) -> None:
    for bit, gate in ((m2, sim.X), (m1, sim.Z)):
        net.send(source, target.node, bit, tag)
        key = _bit_name(net, "pc")
        net.creg[key] = bit
        net.apply(sim.classically_controlled(gate(net.index(target)), key))


def _router_end(pair: BellPair) -> tuple[QubitAddress, QubitAddress]:
    """(router end, other end) of a link pair."""
    if pair.a.role is Role.ROUTER:
        return pair.a, pair.b
    if pair.b.role is Role.ROUTER:
        return pair.b, pair.a
    raise ProtocolError(f"pair {pair} does not touch the router")


def entanglement_swap(net: Network, pair_ab: BellPair, pair_bc: BellPair) -> BellPair:
    """Bell measurement on the router halves leaves the two workers sharing a pair."""
    for p in (pair_ab, pair_bc):
        if p not in net.ledger.open_pairs:
            raise ProtocolError(f"pair {p} is not open")
    r1, a = _router_end(pair_ab)
    r2, c = _router_end(pair_bc)
    m1, m2 = _bsm(net, r1, r2)
    net.consume(pair_ab)
    net.consume(pair_bc)
    _pauli_correct(net, c, m1, m2, ROUTER, Tag.BSM)
    return net._open_pair(a, c, swapped=True)


def teleport_state(net: Network, source: QubitAddress, pair: BellPair) -> QubitAddress:
    """Move ``source``'s state to the far end of ``pair``; returns that qubit."""
    if pair not in net.ledger.open_pairs:
        raise ProtocolError(f"pair {pair} is not open")
    if pair.a.node == source.node:
        near, far = pair.a, pair.b
    elif pair.b.node == source.node:
        near, far = pair.b, pair.a
    else:
        raise ProtocolError(f"pair {pair} has no end on node {source.node}")
    m1, m2 = _bsm(net, source, near)
    net.consume(pair)
    _pauli_correct(net, far, m1, m2, source.node, Tag.TELEPORT)
    return far
