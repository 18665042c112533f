import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from netdqc import protocols as P
from netdqc import sim
from netdqc.network import (
    ROUTER,
    BellPairLedger,
    CapacityError,
    ClassicalLog,
    Network,
    NetworkError,
    NotFresh,
    PartitionPlan,
    QubitAddress,
    Role,
    StarTopology,
    StarViolation,
    Tag,
    UnknownPair,
    build_star,
    consume_pair,
    ledger_report,
    send_classical,
)


def test_build_star_two_nodes():
    net = build_star(StarTopology(((2, 1), (2, 1)), 2))
    assert len(net.addresses) == 8
    state = net.state
    assert state.num_qubits == 8 and state.amplitudes[0] == 1


def test_build_star_three_nodes():
    assert len(build_star(StarTopology(((1, 1),) * 3, 3)).addresses) == 9


def test_small_router_rejects_collective():
    net = build_star(StarTopology(((1, 1),) * 3, 1))
    with pytest.raises(CapacityError):
        P.distributed_mcz(net, [net.data_qubits(i) for i in range(3)])


def test_build_star_over_cap():
    with pytest.raises(CapacityError):
        build_star(StarTopology(((10, 1), (10, 1)), sim.MAX_QUBITS))


@pytest.mark.parametrize("nodes, router", [(((1, 0),), 1), (((-1, 1),), 1), (((1, 1),), -1)])
def test_topology_validation(nodes, router):
    with pytest.raises(NetworkError):
        StarTopology(nodes, router)


def test_topology_dict_roundtrip():
    topo = StarTopology(((3, 1), (2, 2)), 4)
    text = json.dumps(topo.to_dict())
    assert StarTopology.from_dict(json.loads(text)) == topo
    with pytest.raises(NetworkError):
        StarTopology.from_dict({"nodes": [[1, 1]], "router": 1, "node_count": 2})
    with pytest.raises(NetworkError):
        StarTopology.from_dict({"nodes": [[1, 1, 1]], "router": 1})
    with pytest.raises(NetworkError):
        StarTopology.from_dict({"router": 1})


def test_address_roles():
    with pytest.raises(NetworkError):
        QubitAddress(0, 0, Role.ROUTER)
    with pytest.raises(NetworkError):
        QubitAddress(ROUTER, 0, Role.COMM)
    # role is part of identity
    assert QubitAddress(0, 0, Role.DATA) != QubitAddress(0, 0, Role.COMM)


# -- partition


@given(st.integers(1, 40), st.integers(1, 40))
def test_balanced_partition(n, k):
    if k > n:
        with pytest.raises(NetworkError):
            PartitionPlan.balanced(n, k)
        return
    plan = PartitionPlan.balanced(n, k)
    assert sum(plan.per_node_counts) == n
    assert max(plan.per_node_counts) == math.ceil(n / k)
    assert min(plan.per_node_counts) == n // k
    assert len(plan.logical_to_node()) == n


def test_unbalanced_partition_rejected():
    with pytest.raises(NetworkError):
        PartitionPlan(5, 2, (4, 1))


# -- Bell pairs


def test_create_bell_pair_phi_plus():
    net = build_star(StarTopology(((0, 1),), 1))
    pair = net.create_bell_pair(net.comm(0), net.router(0))
    assert net.ledger.created == 1 and net.ledger.open_pairs == [pair]
    assert np.allclose(net.state.amplitudes, np.array([1, 0, 0, 1]) / math.sqrt(2))


def test_worker_worker_pair_rejected():
    net = build_star(StarTopology(((0, 1), (0, 1)), 1))
    with pytest.raises(StarViolation):
        net.create_bell_pair(net.comm(0), net.comm(1))


def test_data_qubit_pair_rejected():
    net = build_star(StarTopology(((1, 1),), 1))
    with pytest.raises(StarViolation):
        net.create_bell_pair(net.data(0, 0), net.router(0))


def test_second_pair_not_fresh():
    net = build_star(StarTopology(((0, 1),), 1))
    net.create_bell_pair(net.comm(0), net.router(0))
    with pytest.raises(NotFresh):
        net.create_bell_pair(net.comm(0), net.router(0))


def test_excited_qubit_not_fresh():
    net = build_star(StarTopology(((0, 1),), 1))
    net.gate(sim.X, net.router(0))
    with pytest.raises(NotFresh):
        net.create_bell_pair(net.comm(0), net.router(0))


def test_local_gate_across_nodes():
    net = build_star(StarTopology(((1, 1), (1, 1)), 2))
    with pytest.raises(StarViolation):
        net.local(sim.CNOT, net.data(0, 0), net.data(1, 0))


# -- ledger arithmetic


def test_create_then_consume():
    net = build_star(StarTopology(((0, 1), (0, 1)), 2))
    p = net.create_bell_pair(net.comm(0), net.router(0))
    net.consume(p)
    assert (net.ledger.created, net.ledger.consumed, len(net.ledger.open_pairs)) == (1, 1, 0)
    with pytest.raises(UnknownPair):
        net.consume(p)


def test_two_creates_one_consume():
    net = build_star(StarTopology(((0, 1), (0, 1)), 2))
    p = net.create_bell_pair(net.comm(0), net.router(0))
    net.create_bell_pair(net.comm(1), net.router(1))
    net.consume(p)
    assert len(net.ledger.open_pairs) == 1
    net.ledger.check()


def test_consume_unknown_pair():
    other = build_star(StarTopology(((0, 1),), 1))
    pair = other.create_bell_pair(other.comm(0), other.router(0))
    with pytest.raises(UnknownPair):
        consume_pair(pair, BellPairLedger())


@given(st.lists(st.booleans(), max_size=30))
def test_ledger_conservation(ops):
    # True: create on a free slot, False: consume the oldest open pair
    slots = 4
    net = build_star(StarTopology(((0, 1),) * slots, slots))
    for create in ops:
        if create and len(net.ledger.open_pairs) < slots:
            node = next(i for i in range(slots) if net.comm(i) not in net.busy)
            r = next(net.router(j) for j in range(slots) if net.router(j) not in net.busy)
            net.create_bell_pair(net.comm(node), r)
        elif net.ledger.open_pairs:
            pair = net.ledger.open_pairs[0]
            net.consume(pair)
            # measure out both halves so they are fresh again
            for q in pair.ends():
                net.reset(q, net.measure(q))
        led = net.ledger
        assert led.consumed <= led.created
        assert led.created - led.consumed == len(led.open_pairs)


# -- classical log


def test_send_classical_examples():
    log = ClassicalLog()
    send_classical(log, 0, ROUTER, 1, Tag.FAN_OUT)
    assert len(log.entries) == 1
    send_classical(log, 0, ROUTER, 0, Tag.FAN_OUT)
    assert [e.bit for e in log.entries] == [1, 0]
    send_classical(log, ROUTER, 1, 0, Tag.FAN_IN)
    assert log.entries[-1].tag is Tag.FAN_IN and log.count(Tag.FAN_IN) == 1


def test_send_classical_errors():
    with pytest.raises(NetworkError):
        send_classical(ClassicalLog(), 1, 1, 0, Tag.BSM)
    with pytest.raises(NetworkError):
        send_classical(ClassicalLog(), 0, 1, 2, Tag.BSM)


def test_ledger_report_fresh():
    r = ledger_report(BellPairLedger(), ClassicalLog())
    assert (r.ebits, r.classical_bits, r.ebits_created, r.ebits_consumed) == (0, 0, 0, 0)
    assert r.classical_by_tag == {}


def test_ledger_report_after_mcz():
    plan = PartitionPlan.balanced(6, 3)
    net = Network(StarTopology.for_partition(plan))
    P.distributed_mcz(net, [net.data_qubits(i) for i in range(3)])
    r = net.report()
    assert r.ebits == r.ebits_consumed == 3
    assert r.classical_by_tag == {"FanOutCorrection": 3, "FanInCorrection": 3}


def test_ledger_report_after_grover():
    from netdqc.grover import GroverSpec, run_distributed_grover

    res = run_distributed_grover(GroverSpec(4, "0110", 2, PartitionPlan.balanced(4, 2)))
    assert res.cost.ebits == 8


# -- addressing


@given(st.lists(st.tuples(st.integers(0, 3), st.integers(1, 2)), min_size=1, max_size=4),
       st.integers(0, 4))
def test_address_bijection(nodes, router):
    net = Network(StarTopology(tuple(nodes), router))
    n = len(net.addresses)
    assert n == net.topology.total_qubits
    assert sorted(net.index(a) for a in net.addresses) == list(range(n))
    for i in range(n):
        assert net.index(net.address(i)) == i
    assert all((a.role is Role.ROUTER) == (a.node == ROUTER) for a in net.addresses)


def test_unknown_address():
    net = build_star(StarTopology(((1, 1),), 1))
    with pytest.raises(NetworkError):
        net.index(QubitAddress(3, 0, Role.DATA))
