"""Weighted nondeterministic finite automata and their position-unrolled trellises.

An automaton encodes the set of length-L labelings consistent with one weak
annotation; each transition may carry a log-weight (weight 1 transitions carry
0.0). Impossible mass is represented by true ``-inf``, never by a large
negative sentinel. Position-dependent weights (e.g. per-instance confidence
scores) live in an optional ``(position, symbol)`` table on the automaton so
the state count stays independent of the group length.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ShapeMismatch, SymbolOutOfRange

NEG_INF = float("-inf")


@dataclass(frozen=True)
class Transition:
    src: int
    symbol: int
    dst: int
    log_weight: float = 0.0


@dataclass(frozen=True)
class Nfa:
    """Weighted NFA over the class alphabet ``{0, ..., num_symbols-1}``."""

    num_states: int
    num_symbols: int
    initial: int
    accepting: frozenset[int]
    transitions: tuple[Transition, ...]
    # Optional (L, K) table of extra log-weights applied when consuming
    # symbol y at position j. Ties the automaton to a fixed group length.
    position_weights: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "accepting", frozenset(self.accepting))
        object.__setattr__(self, "transitions", tuple(self.transitions))
        if self.position_weights is not None:
            table = np.asarray(self.position_weights, dtype=np.float64)
            table.setflags(write=False)
            object.__setattr__(self, "position_weights", table)


@dataclass(frozen=True)
class Violation:
    code: str
    detail: str

    def __str__(self):
        return f"{self.code}: {self.detail}"


def validate(nfa: Nfa) -> list[Violation]:
    """Check automaton invariants; an empty list means the automaton is valid."""
    out: list[Violation] = []
    if nfa.num_states < 1:
        out.append(Violation("NoStates", f"num_states={nfa.num_states}"))
    if nfa.num_symbols < 2:
        out.append(Violation("AlphabetTooSmall", f"num_symbols={nfa.num_symbols}"))
    if not 0 <= nfa.initial < nfa.num_states:
        out.append(Violation("InitialOutOfRange", f"initial={nfa.initial}"))
    if not nfa.accepting:
        out.append(Violation("EmptyAcceptingSet", "accepting set is empty"))
    for q in nfa.accepting:
        if not 0 <= q < nfa.num_states:
            out.append(Violation("AcceptingOutOfRange", f"state {q}"))
    for i, t in enumerate(nfa.transitions):
        if not (0 <= t.src < nfa.num_states and 0 <= t.dst < nfa.num_states):
            out.append(Violation("StateOutOfRange", f"transition {i}: {t.src}->{t.dst}"))
        if not 0 <= t.symbol < nfa.num_symbols:
            out.append(Violation("SymbolOutOfRange", f"transition {i}: symbol {t.symbol}"))
        if math.isnan(t.log_weight) or t.log_weight > 0.0:
            out.append(Violation("PositiveLogWeight", f"transition {i}: {t.log_weight}"))
    if nfa.position_weights is not None:
        table = nfa.position_weights
        if table.ndim != 2 or table.shape[1] != nfa.num_symbols:
            out.append(Violation("WeightTableShape", f"shape {table.shape}"))
        elif bool(np.any(np.nan_to_num(table, nan=1.0, neginf=0.0) > 0.0)):
            out.append(Violation("PositiveLogWeight", "position weight table"))
    return out


def _log_add(a: float, b: float) -> float:
    if a == NEG_INF:
        return b
    if b == NEG_INF:
        return a
    if a < b:
        a, b = b, a
    return a + math.log1p(math.exp(b - a))


def accepts(nfa: Nfa, labeling) -> float | None:
    """Total log-weight of all accepting runs over ``labeling``.

    Returns None when no run with positive weight reaches an accepting
    state (weight-0 runs count as rejected).
    """
    labeling = list(labeling)
    table = nfa.position_weights
    if table is not None and table.shape[0] != len(labeling):
        raise ShapeMismatch(
            f"labeling length {len(labeling)} != weight table length {table.shape[0]}"
        )
    cur = [NEG_INF] * nfa.num_states
    cur[nfa.initial] = 0.0
    for j, y in enumerate(labeling):
        if not 0 <= y < nfa.num_symbols:
            raise SymbolOutOfRange(f"label {y} at position {j} (K={nfa.num_symbols})")
        nxt = [NEG_INF] * nfa.num_states
        bonus = float(table[j, y]) if table is not None else 0.0
        for t in nfa.transitions:
            if t.symbol != y or cur[t.src] == NEG_INF:
                continue
            nxt[t.dst] = _log_add(nxt[t.dst], cur[t.src] + t.log_weight + bonus)
        cur = nxt
    total = NEG_INF
    for q in nfa.accepting:
        total = _log_add(total, cur[q])
    return None if total == NEG_INF else total


@dataclass(frozen=True)
class Trellis:
    """Pruned product of an automaton with an L-step prediction chain.

    Nodes are (state, arriving symbol) pairs; every kept node lies on some
    initial-to-accepting path of exactly ``length`` transitions. The flat
    arrays are the kernel-facing encoding: nodes are numbered globally in
    position-major order, and edges entering position j occupy the slice
    ``edge_offsets[j]:edge_offsets[j+1]`` sorted by (dst, src).
    """

    length: int
    num_symbols: int
    node_state: np.ndarray  # int32[total nodes]
    node_symbol: np.ndarray  # int32[total nodes]
    node_offsets: np.ndarray  # int64[length+1]
    start_weights: np.ndarray  # float64[nodes at position 0]
    edge_src: np.ndarray  # int32[total edges]
    edge_dst: np.ndarray  # int32[total edges]
    edge_weight: np.ndarray  # float64[total edges]
    edge_offsets: np.ndarray  # int64[length+1]

    def __post_init__(self):
        for name in (
            "node_state", "node_symbol", "node_offsets", "start_weights",
            "edge_src", "edge_dst", "edge_weight", "edge_offsets",
        ):
            getattr(self, name).setflags(write=False)

    @property
    def num_nodes(self) -> int:
        return int(self.node_offsets[-1])

    @property
    def is_empty(self) -> bool:
        return self.num_nodes == 0

    def nodes_at(self, position: int) -> list[tuple[int, int]]:
        lo, hi = int(self.node_offsets[position]), int(self.node_offsets[position + 1])
        return [
            (int(self.node_state[i]), int(self.node_symbol[i])) for i in range(lo, hi)
        ]


def _empty_trellis(length: int, num_symbols: int) -> Trellis:
    zero = np.zeros(0, dtype=np.int32)
    return Trellis(
        length=length,
        num_symbols=num_symbols,
        node_state=zero,
        node_symbol=zero,
        node_offsets=np.zeros(length + 1, dtype=np.int64),
        start_weights=np.zeros(0, dtype=np.float64),
        edge_src=zero,
        edge_dst=zero,
        edge_weight=np.zeros(0, dtype=np.float64),
        edge_offsets=np.zeros(length + 1, dtype=np.int64),
    )


def build_trellis(nfa: Nfa, length: int) -> Trellis:
    """Expand the automaton into its pruned length-``length`` trellis."""
    if length < 1:
        raise ValueError(f"length must be >= 1, got {length}")
    table = nfa.position_weights
    if table is not None and table.shape[0] != length:
        raise ShapeMismatch(
            f"trellis length {length} != weight table length {table.shape[0]}"
        )

    by_src: dict[int, list[Transition]] = {}
    by_dst: dict[int, list[Transition]] = {}
    for t in nfa.transitions:
        by_src.setdefault(t.src, []).append(t)
        by_dst.setdefault(t.dst, []).append(t)

    # States reachable from the initial state after exactly t symbols.
    reach = [set() for _ in range(length + 1)]
    reach[0].add(nfa.initial)
    for step in range(length):
        for q in reach[step]:
            for t in by_src.get(q, ()):
                reach[step + 1].add(t.dst)
    # States that can still reach acceptance in exactly length-t symbols.
    coreach = [set() for _ in range(length + 1)]
    coreach[length] = set(nfa.accepting)
    for step in range(length - 1, -1, -1):
        for q in range(nfa.num_states):
            for t in by_src.get(q, ()):
                if t.dst in coreach[step + 1]:
                    coreach[step].add(q)
                    break

    live = [reach[t] & coreach[t] for t in range(length + 1)]
    if not live[length]:
        return _empty_trellis(length, nfa.num_symbols)

    # Node (q, y) at position j: state q entered via symbol y at step j+1.
    node_index: list[dict[tuple[int, int], int]] = []
    node_state: list[int] = []
    node_symbol: list[int] = []
    node_offsets = [0]
    for j in range(length):
        idx: dict[tuple[int, int], int] = {}
        for q in sorted(live[j + 1]):
            for y in range(nfa.num_symbols):
                if any(t.symbol == y and t.src in live[j] for t in by_dst.get(q, ())):
                    idx[(q, y)] = len(node_state)
                    node_state.append(q)
                    node_symbol.append(y)
        node_index.append(idx)
        node_offsets.append(len(node_state))

    def edge_w(t: Transition, position: int) -> float:
        if table is None:
            return t.log_weight
        return t.log_weight + float(table[position, t.symbol])

    start_weights = []
    for (q, y), _ in sorted(node_index[0].items(), key=lambda kv: kv[1]):
        w = NEG_INF
        for t in by_dst.get(q, ()):
            if t.src == nfa.initial and t.symbol == y:
                w = _log_add(w, edge_w(t, 0))
        start_weights.append(w)

    edge_src: list[int] = []
    edge_dst: list[int] = []
    edge_weight: list[float] = []
    edge_offsets = [0, 0]
    for j in range(1, length):
        block: list[tuple[int, int, float]] = []
        for (q, y), dst in node_index[j].items():
            for t in by_dst.get(q, ()):
                if t.symbol != y:
                    continue
                for (p, y_prev), src in node_index[j - 1].items():
                    if p == t.src:
                        block.append((dst, src, edge_w(t, j)))
        block.sort(key=lambda e: (e[0], e[1]))
        for dst, src, w in block:
            edge_src.append(src)
            edge_dst.append(dst)
            edge_weight.append(w)
        edge_offsets.append(len(edge_src))

    return Trellis(
        length=length,
        num_symbols=nfa.num_symbols,
        node_state=np.asarray(node_state, dtype=np.int32),
        node_symbol=np.asarray(node_symbol, dtype=np.int32),
        node_offsets=np.asarray(node_offsets, dtype=np.int64),
        start_weights=np.asarray(start_weights, dtype=np.float64),
        edge_src=np.asarray(edge_src, dtype=np.int32),
        edge_dst=np.asarray(edge_dst, dtype=np.int32),
        edge_weight=np.asarray(edge_weight, dtype=np.float64),
        edge_offsets=np.asarray(edge_offsets, dtype=np.int64),
    )
