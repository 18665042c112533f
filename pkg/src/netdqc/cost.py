"""Closed-form ebit and CNOT-depth models for collective gates on a star network."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence


@dataclass
class CostReport:
    ebits: int = 0
    classical_bits: int = 0
    cx_depth: int = 0
    notes: str = ""
    ebits_created: int = 0
    ebits_consumed: int = 0
    classical_by_tag: dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        for name in ("ebits", "classical_bits", "cx_depth", "ebits_created", "ebits_consumed"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")

    def to_dict(self) -> dict:
        return {
            "ebits": self.ebits,
            "ebits_created": self.ebits_created,
            "ebits_consumed": self.ebits_consumed,
            "classical_bits": self.classical_bits,
            "classical_by_tag": dict(self.classical_by_tag),
            "cx_depth": self.cx_depth,
            "notes": self.notes,
        }


def monolithic_mcz_depth(n: int) -> int:
    """CNOT depth of an ancilla-free N-qubit MCZ, 6N - 12."""
    if n < 3:
        raise ValueError(f"depth estimate needs N >= 3, got {n}")
    return 6 * n - 12


def distributed_mcz_depth(n: int, k: int) -> int:
    # m = ceil(N/k). Layers in sequence, each at the 6q - 12 estimate:
    #   node MCZ incl. comm qubit, q = m + 1  ->  6m - 6
    #   router MCZ,                q = k      ->  6k - 12
    #   trailing node MCZ,         q = m      ->  6m - 12
    # total 12m + 6k - 30.
    if k < 2 or n < k:
        raise ValueError(f"need 2 <= k <= N, got N={n}, k={k}")
    return 12 * -(-n // k) + 6 * k - 30


def optimal_k(n: int) -> int:
    if n < 3:
        raise ValueError(f"need N >= 3, got {n}")
    root = math.sqrt(2 * n)
    candidates = sorted({c for c in (math.floor(root), math.ceil(root)) if 2 <= c <= n})
    if not candidates:
        candidates = [min(max(2, round(root)), n)]
    return min(candidates, key=lambda k: (distributed_mcz_depth(n, k), k))


def speedup(n: int) -> float:
    d = distributed_mcz_depth(n, optimal_k(n))
    return math.inf if d == 0 else monolithic_mcz_depth(n) / d


class Strategy(enum.Enum):
    TELEDATA_COLLECTIVE = "TeledataCollective"
    TELEGATE_COLLECTIVE = "TelegateCollective"
    STAR_COLLECTIVE = "StarCollective"
    DENSE_MESH = "DenseMesh"
    DENSE_STAR = "DenseStar"
    DIAGONAL_BOUNDS = "DiagonalBounds"
    GROVER_LAYER = "GroverLayer"


_PARAMS = {
    Strategy.TELEDATA_COLLECTIVE: ("n",),
    Strategy.TELEGATE_COLLECTIVE: ("n",),
    Strategy.STAR_COLLECTIVE: ("k",),
    Strategy.DENSE_MESH: ("k", "m"),
    Strategy.DENSE_STAR: ("k", "m"),
    Strategy.DIAGONAL_BOUNDS: ("k", "n"),
    Strategy.GROVER_LAYER: ("k",),
}


def ebit_cost(strategy: Strategy | str, **params: int):
    """Ebits needed by a collective-operation strategy.

    ``DiagonalBounds`` returns the (min, max) pair for a diagonal gate over
    ``n`` qubits spread across ``k`` nodes; every other strategy returns a
    count. Parameter names: n (qubits), k (nodes), m (interacting qubits per
    node).
    """
    strategy = Strategy(strategy)
    expected = _PARAMS[strategy]
    if set(params) != set(expected):
        raise ValueError(f"{strategy.value} takes parameters {expected}, got {sorted(params)}")
    if any(not isinstance(v, int) or v < 0 for v in params.values()):
        raise ValueError("parameters must be non-negative integers")
    n, k, m = params.get("n"), params.get("k"), params.get("m")
    if strategy is Strategy.TELEDATA_COLLECTIVE:
        return 4 * n
    if strategy is Strategy.TELEGATE_COLLECTIVE:
        return 2 * n
    if strategy is Strategy.STAR_COLLECTIVE:
        return k
    if strategy is Strategy.DENSE_MESH:
        return math.comb(k, 2) * m * m
    if strategy is Strategy.DENSE_STAR:
        return k * m
    if strategy is Strategy.DIAGONAL_BOUNDS:
        if k > n:
            raise ValueError("a diagonal gate over n qubits spans at most n nodes")
        return (k, n)
    return 2 * k


@dataclass(frozen=True)
class SweepRow:
    n: int
    k: int
    monolithic_depth: int
    distributed_depth: int
    ratio: float
    optimal_k: int
    speedup: float

    COLUMNS = ("N", "k", "monolithic_depth", "distributed_depth", "ratio", "optimal_k", "speedup")

    def as_tuple(self) -> tuple:
        return (self.n, self.k, self.monolithic_depth, self.distributed_depth,
                self.ratio, self.optimal_k, self.speedup)


def depth_sweep(n_list: Iterable[int], k_range: Sequence[int] | range) -> list[SweepRow]:
    """Depth ratio distributed/monolithic for every N and every valid k in range."""
    rows = []
    for n in n_list:
        mono = monolithic_mcz_depth(n)
        best = optimal_k(n)
        s = speedup(n)
        for k in k_range:
            if k < 2 or k > n:
                continue
            dist = distributed_mcz_depth(n, k)
            rows.append(SweepRow(n, k, mono, dist, dist / mono, best, s))
    return rows


def ratio_minima(rows: Sequence[SweepRow], n: int) -> list[int]:
    """All k attaining the minimum depth ratio for one N."""
    curve = [r for r in rows if r.n == n]
    low = min(r.ratio for r in curve)
    return [r.k for r in curve if r.ratio == low]
