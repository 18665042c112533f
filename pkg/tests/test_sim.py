import math
from functools import reduce

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from netdqc import sim

I2 = np.eye(2)
HM = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
XM = np.array([[0, 1], [1, 0]])
P0 = np.diag([1, 0])
P1 = np.diag([0, 1])


def kron_all(mats):
    return reduce(np.kron, mats)


def embed_1q(m, q, n):
    """Full 2^n matrix, qubit 0 is the leftmost Kronecker factor."""
    return kron_all([m if i == q else I2 for i in range(n)])


def cnot_matrix(c, t, n):
    a = kron_all([P0 if i == c else I2 for i in range(n)])
    b = kron_all([P1 if i == c else (XM if i == t else I2) for i in range(n)])
    return a + b


def mcz_matrix(targets, n):
    d = np.ones(2 ** n, dtype=complex)
    for idx in range(2 ** n):
        bits = format(idx, f"0{n}b")
        if all(bits[q] == "1" for q in targets):
            d[idx] = -1
    return np.diag(d)


def rand_state(n, seed):
    return sim.random_state(n, np.random.default_rng(seed))


# -- new_state


@pytest.mark.parametrize("n, idx, bits", [(1, 0, "0"), (2, 3, "11"), (3, 5, "101")])
def test_new_state_basis(n, idx, bits):
    s = sim.new_state(n, idx)
    assert s.amplitudes[idx] == 1
    assert np.count_nonzero(s.amplitudes) == 1
    assert np.array_equal(s.amplitudes, sim.from_bits(bits).amplitudes)


def test_new_state_out_of_range():
    with pytest.raises(sim.SimulationError):
        sim.new_state(2, 4)
    with pytest.raises(sim.SimulationError):
        sim.new_state(sim.MAX_QUBITS + 1, 0)


# -- apply_gate examples


def test_hadamard_on_zero():
    out = sim.apply_gate(sim.new_state(1, 0), sim.H(0))
    assert np.allclose(out.amplitudes, [1 / math.sqrt(2), 1 / math.sqrt(2)])


def test_mcz_examples():
    assert np.allclose(sim.apply_gate(sim.from_bits("111"), sim.MCZ(0, 1, 2)).amplitudes,
                       -sim.from_bits("111").amplitudes)
    assert np.allclose(sim.apply_gate(sim.from_bits("110"), sim.MCZ(0, 1, 2)).amplitudes,
                       sim.from_bits("110").amplitudes)


def test_diagonal_equals_cz():
    g = sim.DiagonalGate(2, (0, 0, 0, math.pi))
    out = sim.apply_gate(sim.from_bits("11"), sim.Diagonal(g, 0, 1))
    assert np.allclose(out.amplitudes, -sim.from_bits("11").amplitudes)


# -- big-endian gate semantics against explicit Kronecker matrices


@pytest.mark.parametrize("q", [0, 1, 2])
def test_single_qubit_gates_match_kron(q):
    n = 3
    psi = rand_state(n, q)
    for op, m in [(sim.H(q), HM), (sim.X(q), XM), (sim.Z(q), np.diag([1, -1])),
                  (sim.S(q), np.diag([1, 1j])),
                  (sim.Rz(q, 0.7), np.diag([np.exp(-0.35j), np.exp(0.35j)]))]:
        got = sim.apply_gate(psi, op).amplitudes
        assert np.allclose(got, embed_1q(m, q, n) @ psi.amplitudes), op.kind


@pytest.mark.parametrize("c, t", [(0, 1), (1, 0), (0, 3), (3, 1), (2, 3)])
def test_cnot_matches_kron(c, t):
    n = 4
    psi = rand_state(n, 10 * c + t)
    got = sim.apply_gate(psi, sim.CNOT(c, t)).amplitudes
    assert np.allclose(got, cnot_matrix(c, t, n) @ psi.amplitudes)


@pytest.mark.parametrize("targets", [(0, 2), (3, 1, 0), (1, 2, 3, 0)])
def test_mcz_matches_kron(targets):
    n = 4
    psi = rand_state(n, len(targets))
    got = sim.apply_gate(psi, sim.MCZ(*targets)).amplitudes
    assert np.allclose(got, mcz_matrix(targets, n) @ psi.amplitudes)


def test_diagonal_target_order():
    # phase index is read from targets in the given order, not ascending order
    phases = (0.0, 0.1, 0.2, 0.3)
    g = sim.DiagonalGate(2, phases)
    psi = sim.from_bits("010")  # qubit 1 set
    out = sim.apply_gate(psi, sim.Diagonal(g, 1, 0))  # index = (q1, q0) = (1, 0) -> 2
    assert np.isclose(out.amplitudes[2], np.exp(0.2j))
    out = sim.apply_gate(psi, sim.Diagonal(g, 0, 1))  # index = (q0, q1) = (0, 1) -> 1
    assert np.isclose(out.amplitudes[2], np.exp(0.1j))


def test_rzz_is_diagonal_exp():
    from scipy.linalg import expm

    theta = 0.9
    zz = np.kron(np.diag([1, -1]), np.diag([1, -1]))
    psi = rand_state(2, 3)
    got = sim.apply_gate(psi, sim.Rzz(0, 1, theta)).amplitudes
    assert np.allclose(got, expm(-0.5j * theta * zz) @ psi.amplitudes)


def test_classically_controlled():
    op = sim.classically_controlled(sim.X(0), "m")
    assert sim.apply_gate(sim.from_bits("0"), op, {"m": 1}).amplitudes[1] == 1
    assert sim.apply_gate(sim.from_bits("0"), op, {"m": 0}).amplitudes[0] == 1
    with pytest.raises(sim.ClassicalBitUnset):
        sim.apply_gate(sim.from_bits("0"), op, {})


@pytest.mark.parametrize("bad", [
    lambda: sim.GateOp("CNOT", (0, 0)),
    lambda: sim.MCZ(0),
    lambda: sim.GateOp("Toffoli", (0, 1, 2)),
    lambda: sim.Diagonal(sim.DiagonalGate(2, (0, 0, 0, 0)), 0),
    lambda: sim.U(0, np.array([[1, 1], [0, 1]])),
    lambda: sim.DiagonalGate(2, (0, 0, math.inf, 0)),
])
def test_invalid_gates(bad):
    with pytest.raises(sim.SimulationError):
        bad()


def test_target_out_of_range():
    with pytest.raises(sim.SimulationError):
        sim.apply_gate(sim.new_state(2), sim.X(2))


def test_as_diagonal_rejects_hadamard():
    with pytest.raises(sim.SimulationError):
        sim.as_diagonal(sim.H(0))


# -- measurement


def test_measure_plus_enumerate():
    plus = sim.apply_gate(sim.new_state(1), sim.H(0))
    outs = sim.measure(plus, 0, sim.EnumerateAll)
    assert [o.bit for o in outs] == [0, 1]
    assert all(math.isclose(o.probability, 0.5) for o in outs)
    assert np.allclose(outs[0].post_state.amplitudes, [1, 0])
    assert np.allclose(outs[1].post_state.amplitudes, [0, 1])


def test_measure_deterministic():
    outs = sim.measure(sim.new_state(1), 0, sim.EnumerateAll())
    assert len(outs) == 1 and outs[0].bit == 0 and outs[0].probability == 1.0


def test_measure_forced_hand_computed():
    # 0.6|00> + 0.8|11>, measuring qubit 1 as 1 has probability 0.8^2 = 0.64
    psi = sim.StateVector(2, [0.6, 0, 0, 0.8])
    (o,) = sim.measure(psi, 1, sim.Forced(1))
    assert math.isclose(o.probability, 0.64)
    assert np.allclose(o.post_state.amplitudes, [0, 0, 0, 1])
    with pytest.raises(sim.SimulationError):
        sim.measure(sim.new_state(2), 1, sim.Forced(1))


def test_measure_seeded_reproducible():
    plus = sim.apply_gate(sim.new_state(1), sim.H(0))
    a = [sim.measure(plus, 0, sim.Seeded(s))[0].bit for s in range(20)]
    b = [sim.measure(plus, 0, sim.Seeded(s))[0].bit for s in range(20)]
    assert a == b and 0 < sum(a) < 20


def test_fidelity_examples():
    psi = rand_state(3, 0)
    assert math.isclose(sim.fidelity_up_to_global_phase(psi, psi), 1.0)
    rotated = sim.StateVector(3, np.exp(0.4j) * psi.amplitudes)
    assert math.isclose(sim.fidelity_up_to_global_phase(psi, rotated), 1.0)
    assert sim.fidelity_up_to_global_phase(sim.from_bits("0"), sim.from_bits("1")) == 0.0
    with pytest.raises(sim.SimulationError):
        sim.fidelity_up_to_global_phase(sim.new_state(1), sim.new_state(2))


# -- properties

N_Q = 4
qubit = st.integers(0, N_Q - 1)
angle = st.floats(-2 * math.pi, 2 * math.pi, allow_nan=False)


@st.composite
def gate_ops(draw):
    kind = draw(st.sampled_from(["H", "X", "Z", "S", "Rz", "Rzz", "CNOT", "CZ", "MCZ", "Diagonal"]))
    if kind in ("H", "X", "Z", "S"):
        return sim.GateOp(kind, (draw(qubit),))
    if kind == "Rz":
        return sim.Rz(draw(qubit), draw(angle))
    qs = draw(st.permutations(range(N_Q)))
    if kind == "Rzz":
        return sim.Rzz(qs[0], qs[1], draw(angle))
    if kind in ("CNOT", "CZ"):
        return sim.GateOp(kind, tuple(qs[:2]))
    m = draw(st.integers(2, N_Q))
    if kind == "MCZ":
        return sim.MCZ(*qs[:m])
    phases = draw(st.lists(angle, min_size=2 ** m, max_size=2 ** m))
    return sim.Diagonal(sim.DiagonalGate(m, phases), *qs[:m])


def inverse(op):
    if op.kind in ("H", "X", "Z", "CNOT", "CZ", "MCZ"):
        return op
    if op.kind == "S":
        return sim.Diagonal(sim.DiagonalGate(1, (0, -math.pi / 2)), *op.targets)
    if op.kind in ("Rz", "Rzz"):
        return sim.GateOp(op.kind, op.targets, theta=-op.theta)
    return sim.Diagonal(sim.DiagonalGate(op.diagonal.arity, [-p for p in op.diagonal.phases]),
                        *op.targets)


@given(gate_ops(), st.integers(0, 2 ** 32 - 1))
def test_norm_preserved_and_inverse(op, seed):
    psi = rand_state(N_Q, seed)
    out = sim.apply_gate(psi, op)
    assert abs(out.norm() - 1) < 1e-9
    back = sim.apply_gate(out, inverse(op))
    assert sim.fidelity_up_to_global_phase(back, psi) > 1 - 1e-10


@given(st.permutations(range(N_Q)), st.integers(2, N_Q), st.integers(0, 2 ** 32 - 1))
def test_mcz_symmetric(perm, m, seed):
    psi = rand_state(N_Q, seed)
    targets = perm[:m]
    a = sim.apply_gate(psi, sim.MCZ(*targets))
    b = sim.apply_gate(psi, sim.MCZ(*sorted(targets)))
    assert np.allclose(a.amplitudes, b.amplitudes, atol=1e-12)


@given(st.lists(angle, min_size=8, max_size=8), st.lists(angle, min_size=8, max_size=8),
       st.integers(0, 2 ** 32 - 1))
def test_diagonal_composition(theta, phi, seed):
    psi = rand_state(N_Q, seed)
    gt, gp = sim.DiagonalGate(3, theta), sim.DiagonalGate(3, phi)
    two = sim.apply_circuit(psi, [sim.Diagonal(gt, 3, 0, 2), sim.Diagonal(gp, 3, 0, 2)])
    one = sim.apply_gate(psi, sim.Diagonal(gt.compose(gp), 3, 0, 2))
    assert np.allclose(two.amplitudes, one.amplitudes, atol=1e-12)


@given(qubit, st.integers(0, 2 ** 32 - 1))
def test_enumerate_probabilities_sum(q, seed):
    outs = sim.measure(rand_state(N_Q, seed), q, sim.EnumerateAll)
    assert abs(sum(o.probability for o in outs) - 1) < 1e-9
    for o in outs:
        assert abs(o.post_state.norm() - 1) < 1e-9


# -- compact register


@settings(max_examples=50)
@given(st.lists(st.sampled_from("01+"), min_size=1, max_size=6), st.integers(0, 2 ** 32 - 1))
def test_register_roundtrip(kinds, seed):
    n = len(kinds)
    psi = sim.new_state(n)
    for q, k in enumerate(kinds):
        if k == "1":
            psi = sim.apply_gate(psi, sim.X(q))
        elif k == "+":
            psi = sim.apply_gate(psi, sim.H(q))
    reg = sim.Register.from_state(psi)
    assert len(reg.active) == kinds.count("+")
    assert np.allclose(reg.to_state().amplitudes, psi.amplitudes)


@given(st.lists(gate_ops(), max_size=8), st.integers(0, 2 ** 32 - 1))
def test_register_matches_dense(ops, seed):
    psi = sim.embed(rand_state(2, seed), [1, 3], N_Q)
    reg = sim.Register.from_state(psi)
    for op in ops:
        reg.apply(op)
    dense = sim.apply_circuit(psi, ops)
    assert np.allclose(reg.to_state().amplitudes, dense.amplitudes, atol=1e-12)
    assert math.isclose(reg.fidelity(dense), 1.0, abs_tol=1e-10)


def test_register_collapse_drops_axis():
    reg = sim.Register.from_state(sim.apply_gate(sim.new_state(2), sim.H(0)))
    assert reg.active == [0]
    reg.collapse(0, 1, 0.5)
    assert reg.active == [] and reg.known[0] == 1
    assert np.allclose(reg.to_state().amplitudes, [0, 0, 1, 0])


def test_probabilities_marginal_order():
    psi = sim.from_bits("0110")
    p = sim.probabilities(psi, [2, 0])
    assert p[int("10", 2)] == 1.0
