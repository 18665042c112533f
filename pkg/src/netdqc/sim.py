"""Dense state-vector simulator.

Qubit ordering is big-endian: global qubit 0 is the most significant bit of
the basis index, so ``amplitudes.reshape((2,) * n)`` puts qubit ``q`` on
tensor axis ``q``. Every module in the package relies on this convention.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

MAX_QUBITS = 24
NORM_TOL = 1e-9
ZERO_PROB = 1e-12

_SQRT1_2 = 1.0 / math.sqrt(2.0)


class SimulationError(ValueError):
    pass


class ClassicalBitUnset(SimulationError):
    pass


@dataclass
class StateVector:
    num_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=np.complex128)
        if self.amplitudes.shape != (1 << self.num_qubits,):
            raise SimulationError(
                f"expected {1 << self.num_qubits} amplitudes, got {self.amplitudes.shape}"
            )

    @property
    def tensor(self) -> np.ndarray:
        """Writable view with one axis per qubit."""
        return self.amplitudes.reshape((2,) * self.num_qubits)

    def norm(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def copy(self) -> "StateVector":
        return StateVector(self.num_qubits, self.amplitudes.copy())


def new_state(num_qubits: int, basis_index: int = 0) -> StateVector:
    if num_qubits < 0 or num_qubits > MAX_QUBITS:
        raise SimulationError(f"num_qubits must be in [0, {MAX_QUBITS}], got {num_qubits}")
    if not 0 <= basis_index < (1 << num_qubits):
        raise SimulationError(f"basis index {basis_index} out of range for {num_qubits} qubits")
    amps = np.zeros(1 << num_qubits, dtype=np.complex128)
    amps[basis_index] = 1.0
    return StateVector(num_qubits, amps)


def from_bits(bits: str) -> StateVector:
    """``from_bits("101")`` is |101>, qubit 0 leftmost."""
    return new_state(len(bits), int(bits, 2) if bits else 0)


def random_state(num_qubits: int, rng: np.random.Generator) -> StateVector:
    """Haar-random pure state."""
    amps = rng.normal(size=1 << num_qubits) + 1j * rng.normal(size=1 << num_qubits)
    amps /= np.linalg.norm(amps)
    return StateVector(num_qubits, amps)


def embed(sub: StateVector, positions: Sequence[int], num_qubits: int) -> StateVector:
    """Place ``sub`` on the given global qubits; every other qubit is |0>."""
    if len(positions) != sub.num_qubits or len(set(positions)) != len(positions):
        raise SimulationError("positions must be distinct and match the sub-state size")
    out = new_state(num_qubits, 0)
    t = out.tensor
    t[...] = 0.0
    index = [0] * num_qubits
    for p in positions:
        index[p] = slice(None)
    # advanced-free indexing keeps the remaining axes in ascending position order
    order = np.argsort(positions)
    t[tuple(index)] = np.transpose(sub.tensor, order)
    return out


# -- gates ---------------------------------------------------------------


@dataclass(frozen=True)
class DiagonalGate:
    """diag(exp(i * phases)) on ``arity`` qubits; phases indexed big-endian."""

    arity: int
    phases: tuple[float, ...]

    def __post_init__(self):
        phases = tuple(float(p) for p in np.asarray(self.phases, dtype=float).ravel())
        object.__setattr__(self, "phases", phases)
        if self.arity < 1:
            raise SimulationError("diagonal gate arity must be >= 1")
        if len(phases) != 1 << self.arity:
            raise SimulationError(f"expected {1 << self.arity} phases, got {len(phases)}")
        if not all(math.isfinite(p) for p in phases):
            raise SimulationError("phases must be finite")

    def matrix(self) -> np.ndarray:
        return np.diag(np.exp(1j * np.array(self.phases)))

    def compose(self, other: "DiagonalGate") -> "DiagonalGate":
        if other.arity != self.arity:
            raise SimulationError("cannot compose diagonal gates of different arity")
        return DiagonalGate(self.arity, tuple(a + b for a, b in zip(self.phases, other.phases)))


def rz_diagonal(theta: float) -> DiagonalGate:
    return DiagonalGate(1, (-theta / 2, theta / 2))


def rzz_diagonal(theta: float) -> DiagonalGate:
    return DiagonalGate(2, (-theta / 2, theta / 2, theta / 2, -theta / 2))


def crz_diagonal(theta: float) -> DiagonalGate:
    return DiagonalGate(2, (0.0, 0.0, -theta / 2, theta / 2))


def mcz_diagonal(arity: int) -> DiagonalGate:
    phases = [0.0] * (1 << arity)
    phases[-1] = math.pi
    return DiagonalGate(arity, tuple(phases))


_ARITY = {"H": 1, "X": 1, "Z": 1, "S": 1, "Rz": 1, "U": 1, "Rzz": 2, "CNOT": 2, "CZ": 2}


@dataclass(frozen=True)
class GateOp:
    """A gate on global qubit indices.

    ``kind`` is one of H, X, Z, S, Rz, U (explicit 2x2 ``matrix``), Rzz, CNOT
    (control first), CZ, MCZ, Diagonal or ClassicallyControlled. The last wraps
    ``inner`` and fires iff classical bit ``bit`` is 1.
    """

    kind: str
    targets: tuple[int, ...] = ()
    theta: float = 0.0
    diagonal: DiagonalGate | None = None
    matrix: np.ndarray | None = field(default=None, compare=False)
    inner: "GateOp | None" = None
    bit: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(int(t) for t in self.targets))
        if self.kind == "ClassicallyControlled":
            if self.inner is None or self.bit is None:
                raise SimulationError("classically controlled gate needs inner gate and bit")
            return
        if len(set(self.targets)) != len(self.targets):
            raise SimulationError(f"repeated targets {self.targets}")
        if self.kind in _ARITY:
            if len(self.targets) != _ARITY[self.kind]:
                raise SimulationError(f"{self.kind} takes {_ARITY[self.kind]} targets")
        elif self.kind == "MCZ":
            if len(self.targets) < 2:
                raise SimulationError("MCZ needs at least 2 targets")
        elif self.kind == "Diagonal":
            if self.diagonal is None or self.diagonal.arity != len(self.targets):
                raise SimulationError("Diagonal gate arity must match target count")
        else:
            raise SimulationError(f"unknown gate kind {self.kind!r}")
        if self.kind == "U":
            m = np.asarray(self.matrix, dtype=np.complex128)
            if m.shape != (2, 2) or not np.allclose(m.conj().T @ m, np.eye(2), atol=1e-10):
                raise SimulationError("U gate needs a 2x2 unitary matrix")
            object.__setattr__(self, "matrix", m)


def H(q):
    return GateOp("H", (q,))


def X(q):
    return GateOp("X", (q,))


def Z(q):
    return GateOp("Z", (q,))


def S(q):
    return GateOp("S", (q,))


def Rz(q, theta):
    return GateOp("Rz", (q,), theta=theta)


def U(q, matrix):
    return GateOp("U", (q,), matrix=matrix)


def Rzz(a, b, theta):
    return GateOp("Rzz", (a, b), theta=theta)


def CNOT(control, target):
    return GateOp("CNOT", (control, target))


def CZ(a, b):
    return GateOp("CZ", (a, b))


def MCZ(*targets):
    return GateOp("MCZ", tuple(targets))


def Diagonal(gate: DiagonalGate, *targets):
    return GateOp("Diagonal", tuple(targets), diagonal=gate)


def classically_controlled(inner: GateOp, bit: str) -> GateOp:
    return GateOp("ClassicallyControlled", inner.targets, inner=inner, bit=bit)


def as_diagonal(op: GateOp) -> DiagonalGate:
    """Phase table of a computational-basis-diagonal gate; raises otherwise."""
    if op.kind == "Diagonal":
        return op.diagonal
    if op.kind == "Z":
        return DiagonalGate(1, (0.0, math.pi))
    if op.kind == "S":
        return DiagonalGate(1, (0.0, math.pi / 2))
    if op.kind == "Rz":
        return rz_diagonal(op.theta)
    if op.kind == "Rzz":
        return rzz_diagonal(op.theta)
    if op.kind in ("CZ", "MCZ"):
        return mcz_diagonal(len(op.targets))
    raise SimulationError(f"{op.kind} is not diagonal in the computational basis")


def _axis(n: int, q: int, value) -> tuple:
    idx = [slice(None)] * n
    idx[q] = value
    return tuple(idx)


def _apply_1q(t: np.ndarray, q: int, m: np.ndarray) -> None:
    n = t.ndim
    i0, i1 = _axis(n, q, 0), _axis(n, q, 1)
    a = t[i0].copy()
    b = t[i1]
    t[i0] = m[0, 0] * a + m[0, 1] * b
    t[i1] = m[1, 0] * a + m[1, 1] * b


def _apply_x(t: np.ndarray, q: int) -> None:
    n = t.ndim
    i0, i1 = _axis(n, q, 0), _axis(n, q, 1)
    a = t[i0].copy()
    t[i0] = t[i1]
    t[i1] = a


def _apply_h(t: np.ndarray, q: int) -> None:
    n = t.ndim
    i0, i1 = _axis(n, q, 0), _axis(n, q, 1)
    a = t[i0].copy()
    b = t[i1]
    t[i0] = (a + b) * _SQRT1_2
    t[i1] = (a - b) * _SQRT1_2


def _apply_diagonal(t: np.ndarray, targets: Sequence[int], gate: DiagonalGate) -> None:
    m = len(targets)
    table = np.exp(1j * np.asarray(gate.phases)).reshape((2,) * m)
    # reorder table axes into ascending target order, then broadcast
    order = np.argsort(targets)
    table = np.transpose(table, order)
    shape = [1] * t.ndim
    for q in targets:
        shape[q] = 2
    t *= table.reshape(shape)


def _apply_mcz(t: np.ndarray, targets: Sequence[int]) -> None:
    idx = [slice(None)] * t.ndim
    for q in targets:
        idx[q] = 1
    t[tuple(idx)] *= -1


def apply_inplace(state: StateVector, op: GateOp, cbits: Mapping[str, int] | None = None) -> None:
    """Mutating variant of :func:`apply_gate`."""
    n = state.num_qubits
    for q in op.targets:
        if not 0 <= q < n:
            raise SimulationError(f"target {q} out of range for {n} qubits")
    t = state.tensor
    kind = op.kind
    if kind == "ClassicallyControlled":
        if cbits is None or op.bit not in cbits:
            raise ClassicalBitUnset(f"classical bit {op.bit!r} is unset")
        if cbits[op.bit]:
            apply_inplace(state, op.inner, cbits)
    elif kind == "H":
        _apply_h(t, op.targets[0])
    elif kind == "X":
        _apply_x(t, op.targets[0])
    elif kind == "U":
        _apply_1q(t, op.targets[0], op.matrix)
    elif kind == "CNOT":
        c, tg = op.targets
        sub = t[_axis(n, c, 1)]
        _apply_x(sub, tg - (1 if tg > c else 0))
    elif kind in ("CZ", "MCZ"):
        _apply_mcz(t, op.targets)
    elif kind == "Z":
        t[_axis(n, op.targets[0], 1)] *= -1
    else:
        _apply_diagonal(t, op.targets, as_diagonal(op))


def apply_gate(state: StateVector, op: GateOp, cbits: Mapping[str, int] | None = None) -> StateVector:
    out = state.copy()
    apply_inplace(out, op, cbits)
    return out


def apply_circuit(state: StateVector, ops: Sequence[GateOp]) -> StateVector:
    out = state.copy()
    for op in ops:
        apply_inplace(out, op)
    return out


# -- measurement ---------------------------------------------------------


@dataclass
class MeasurementOutcome:
    bit: int
    probability: float
    post_state: StateVector


class Seeded:
    """Sample outcomes from a deterministic PCG64 stream."""

    def __init__(self, seed: int | np.random.Generator):
        self.rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)

    def __repr__(self):
        return "Seeded()"


@dataclass(frozen=True)
class Forced:
    bit: int


class EnumerateAll:
    pass


def prob_one(state: StateVector, qubit: int) -> float:
    half = state.tensor[_axis(state.num_qubits, qubit, 1)]
    return float(np.vdot(half, half).real)


def project_inplace(state: StateVector, qubit: int, bit: int, probability: float) -> None:
    t = state.tensor
    t[_axis(state.num_qubits, qubit, 1 - bit)] = 0.0
    state.amplitudes /= math.sqrt(probability)


def _branch(state: StateVector, qubit: int, bit: int, p: float) -> MeasurementOutcome:
    post = state.copy()
    project_inplace(post, qubit, bit, p)
    return MeasurementOutcome(bit, p, post)


def measure(state: StateVector, qubit: int, policy=EnumerateAll) -> list[MeasurementOutcome]:
    if not 0 <= qubit < state.num_qubits:
        raise SimulationError(f"qubit {qubit} out of range")
    p1 = min(max(prob_one(state, qubit), 0.0), 1.0)
    probs = (1.0 - p1, p1)
    if isinstance(policy, Forced):
        if probs[policy.bit] < ZERO_PROB:
            raise SimulationError(f"forced outcome {policy.bit} has zero probability")
        return [_branch(state, qubit, policy.bit, probs[policy.bit])]
    if isinstance(policy, Seeded):
        bit = int(policy.rng.random() < p1)
        return [_branch(state, qubit, bit, probs[bit])]
    if policy is EnumerateAll or isinstance(policy, EnumerateAll):
        return [_branch(state, qubit, b, probs[b]) for b in (0, 1) if probs[b] >= ZERO_PROB]
    raise SimulationError(f"unknown measurement policy {policy!r}")


def fidelity_up_to_global_phase(a: StateVector, b: StateVector) -> float:
    if a.num_qubits != b.num_qubits:
        raise SimulationError("dimension mismatch")
    return float(abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2)


def probabilities(state: StateVector, qubits: Sequence[int] | None = None) -> np.ndarray:
    """Marginal distribution over ``qubits`` (in the given order, big-endian)."""
    p = np.abs(state.tensor) ** 2
    if qubits is None:
        return p.ravel()
    qubits = list(qubits)
    rest = tuple(q for q in range(state.num_qubits) if q not in qubits)
    p = p.sum(axis=rest)
    kept = sorted(qubits)
    p = np.transpose(p, [kept.index(q) for q in qubits])
    return p.ravel()


class Register:
    """Dense amplitudes over the active qubits; every other qubit sits in a
    known computational basis state and costs no memory.

    Measured qubits leave the tensor and resetting them is a bit flip, so a
    network whose ancillas are idle most of the time simulates at the size of
    its data register. Axis ``i`` of ``tensor`` is global qubit ``active[i]``.
    """

    def __init__(self, num_qubits: int):
        if num_qubits > MAX_QUBITS:
            raise SimulationError(f"{num_qubits} qubits exceeds the cap of {MAX_QUBITS}")
        self.num_qubits = num_qubits
        self.tensor = np.ones((), dtype=np.complex128)
        self.active: list[int] = []
        self.known: dict[int, int] = {q: 0 for q in range(num_qubits)}

    @classmethod
    def from_state(cls, state: StateVector) -> "Register":
        reg = cls(state.num_qubits)
        t = state.tensor.copy()
        active = list(range(state.num_qubits))
        known = {}
        for q in range(state.num_qubits):
            a = active.index(q)
            for bit in (0, 1):
                if not np.any(np.take(t, 1 - bit, axis=a)):
                    t = np.take(t, bit, axis=a)
                    active.pop(a)
                    known[q] = bit
                    break
        reg.tensor, reg.active, reg.known = np.array(t, dtype=np.complex128), active, known
        return reg

    def copy(self) -> "Register":
        out = Register.__new__(Register)
        out.num_qubits = self.num_qubits
        out.tensor = self.tensor.copy()
        out.active = list(self.active)
        out.known = dict(self.known)
        return out

    def _full_index(self) -> tuple:
        return tuple(self.known[q] if q in self.known else slice(None)
                     for q in range(self.num_qubits))

    def _sorted_tensor(self) -> np.ndarray:
        return np.transpose(self.tensor, np.argsort(self.active)) if self.active else self.tensor

    def to_state(self) -> StateVector:
        out = np.zeros((2,) * self.num_qubits, dtype=np.complex128)
        out[self._full_index()] = self._sorted_tensor()
        return StateVector(self.num_qubits, out.reshape(-1))

    def fidelity(self, expected: StateVector) -> float:
        """|<expected|self>|^2 without materialising the full vector."""
        e = expected.tensor[self._full_index()]
        return float(abs(np.vdot(e, self._sorted_tensor())) ** 2)

    def _activate(self, q: int) -> int:
        if q not in self.known:
            return self.active.index(q)
        bit = self.known.pop(q)
        grown = np.zeros(self.tensor.shape + (2,), dtype=np.complex128)
        grown[..., bit] = self.tensor
        self.tensor = grown
        self.active.append(q)
        return len(self.active) - 1

    def apply(self, op: GateOp, cbits: Mapping[str, int] | None = None) -> None:
        for q in op.targets:
            if not 0 <= q < self.num_qubits:
                raise SimulationError(f"target {q} out of range for {self.num_qubits} qubits")
        if op.kind == "ClassicallyControlled":
            if cbits is None or op.bit not in cbits:
                raise ClassicalBitUnset(f"classical bit {op.bit!r} is unset")
            if cbits[op.bit]:
                self.apply(op.inner, cbits)
            return
        if op.kind == "X" and op.targets[0] in self.known:
            self.known[op.targets[0]] ^= 1
            return
        local = [self._activate(q) for q in op.targets]
        mapped = GateOp(op.kind, tuple(local), op.theta, op.diagonal, op.matrix)
        apply_inplace(StateVector(len(self.active), self.tensor.reshape(-1)), mapped)

    def prob_one(self, q: int) -> float:
        if q in self.known:
            return float(self.known[q])
        half = np.take(self.tensor, 1, axis=self.active.index(q))
        return float(np.vdot(half, half).real)

    def collapse(self, q: int, bit: int, probability: float) -> None:
        """Project qubit ``q`` onto ``bit`` and take it out of the tensor."""
        if q in self.known:
            if self.known[q] != bit:
                raise SimulationError(f"qubit {q} is |{self.known[q]}>, cannot collapse to {bit}")
            return
        a = self.active.index(q)
        self.tensor = np.take(self.tensor, bit, axis=a) / math.sqrt(probability)
        self.active.pop(a)
        self.known[q] = bit
