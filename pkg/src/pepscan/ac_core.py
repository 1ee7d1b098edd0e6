"""Aho-Corasick automaton with two matching backends.

The sparse backend keeps each state's outgoing edges as an insertion-ordered
list of ``(symbol, next_state)`` records and scans it linearly, chasing
failure links on a miss. Its per-character work grows with the fan-out of
the states it visits.

The dense backend precompiles failure links into a total transition table,
so every input byte costs exactly one table lookup no matter how many
patterns were compiled in.

Both report ``MatchEvent(pattern_id, end_offset)`` tuples sorted by
``(end_offset, pattern_id)``.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence, Union

from .errors import EmptyPattern, InvalidSymbol

BytesLike = Union[bytes, bytearray, str]

ROOT = 0
_BAD = 255


def as_bytes(text: BytesLike) -> bytes:
    if isinstance(text, str):
        try:
            return text.encode("ascii")
        except UnicodeEncodeError as exc:
            raise InvalidSymbol(exc.start, ord(text[exc.start]) & 0xFF) from None
    return bytes(text)


@dataclass(frozen=True)
class Alphabet:
    """Allowed pattern bytes plus one sentinel byte that resets matching."""

    allowed_symbols: frozenset = frozenset(range(ord("A"), ord("Z") + 1))
    sentinel: int = ord("#")

    def __post_init__(self):
        object.__setattr__(self, "allowed_symbols", frozenset(self.allowed_symbols))
        if not self.allowed_symbols:
            raise ValueError("alphabet must allow at least one symbol")
        if any(not 0 <= b < 256 for b in self.allowed_symbols):
            raise ValueError("alphabet symbols must be byte values")
        if not 0 <= self.sentinel < 256:
            raise ValueError("sentinel must be a byte value")
        if self.sentinel in self.allowed_symbols:
            raise ValueError(f"sentinel {chr(self.sentinel)!r} is inside the alphabet")
        if len(self.allowed_symbols) >= _BAD:
            raise ValueError("alphabet too large for a byte-indexed table")

    @classmethod
    def from_string(cls, symbols: str, sentinel: str = "#") -> "Alphabet":
        return cls(frozenset(symbols.encode("ascii")), ord(sentinel))

    @cached_property
    def symbols(self) -> tuple:
        """Dense-table column order: sorted allowed symbols, sentinel last."""
        return tuple(sorted(self.allowed_symbols)) + (self.sentinel,)

    @property
    def sentinel_column(self) -> int:
        return len(self.symbols) - 1

    @cached_property
    def _column_map(self) -> bytes:
        table = bytearray([_BAD]) * 256
        for col, sym in enumerate(self.symbols):
            table[sym] = col
        return bytes(table)

    def column(self, byte: int) -> int:
        return self._column_map[byte]

    def columns(self, text: bytes) -> bytes:
        """Translate ``text`` to column indices, rejecting unknown bytes."""
        cols = text.translate(self._column_map)
        bad = cols.find(_BAD)
        if bad >= 0:
            raise InvalidSymbol(bad, text[bad])
        return cols

    def check_text(self, text: bytes) -> None:
        self.columns(text)


DEFAULT_ALPHABET = Alphabet()


@dataclass(frozen=True)
class PatternSet:
    patterns: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "patterns", tuple(as_bytes(p) for p in self.patterns))

    def __len__(self) -> int:
        return len(self.patterns)

    def __getitem__(self, pid: int) -> bytes:
        return self.patterns[pid]

    def __iter__(self):
        return iter(self.patterns)

    @property
    def ids(self) -> range:
        return range(len(self.patterns))

    def validate(self, alphabet: Alphabet = DEFAULT_ALPHABET) -> None:
        allowed = alphabet.allowed_symbols
        for pid, pat in enumerate(self.patterns):
            if not pat:
                raise EmptyPattern(pid)
            for b in pat:
                if b not in allowed:
                    raise InvalidSymbol(pid, b, kind="pattern")


def parse_patterns(text: str) -> PatternSet:
    """Pattern-file syntax: one per line, blanks and ``#`` comments skipped."""
    pats = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        pats.append(line)
    return PatternSet(tuple(pats))


def read_patterns(path: Union[str, Path]) -> PatternSet:
    return parse_patterns(Path(path).read_text(encoding="utf-8"))


@dataclass
class SparseNode:
    edges: list = field(default_factory=list)  # [(symbol, next_state)], insertion order
    fail: int = ROOT
    outputs: list = field(default_factory=list)

    def goto(self, symbol: int):
        for sym, nxt in self.edges:
            if sym == symbol:
                return nxt
        return None


@dataclass
class DenseTable:
    delta: list  # delta[state][column] -> state
    outputs: list  # merged, sorted pattern ids per state


@dataclass
class Automaton:
    nodes: list
    patterns: PatternSet
    alphabet: Alphabet = DEFAULT_ALPHABET
    failure_built: bool = False
    dense: DenseTable | None = None

    root = ROOT

    @property
    def state_count(self) -> int:
        return len(self.nodes)

    @property
    def pattern_count(self) -> int:
        return len(self.patterns)


class MatchEvent(NamedTuple):
    pattern_id: int
    end_offset: int


def event_key(ev: MatchEvent):
    return (ev.end_offset, ev.pattern_id)


@dataclass
class WorkProfile:
    """Counters describing how much work a scan did."""

    chars: int = 0
    lookups: int = 0
    edge_comparisons: int = 0
    fail_traversals: int = 0

    def per_char(self, field_name: str) -> float:
        return getattr(self, field_name) / self.chars if self.chars else 0.0


def build_goto(patterns: PatternSet | Iterable[BytesLike],
               alphabet: Alphabet = DEFAULT_ALPHABET) -> Automaton:
    if not isinstance(patterns, PatternSet):
        patterns = PatternSet(tuple(patterns))
    patterns.validate(alphabet)
    nodes = [SparseNode()]
    for pid, pat in enumerate(patterns):
        s = ROOT
        for b in pat:
            nxt = nodes[s].goto(b)
            if nxt is None:
                nxt = len(nodes)
                nodes.append(SparseNode())
                nodes[s].edges.append((b, nxt))
            s = nxt
        nodes[s].outputs.append(pid)
    return Automaton(nodes=nodes, patterns=patterns, alphabet=alphabet)


def bfs_order(a: Automaton) -> list:
    order = [ROOT]
    queue = deque([ROOT])
    while queue:
        r = queue.popleft()
        for _, s in a.nodes[r].edges:
            order.append(s)
            queue.append(s)
    return order


def build_failure(a: Automaton) -> Automaton:
    """Fill failure links and merge output sets, breadth first. In place."""
    nodes = a.nodes
    nodes[ROOT].fail = ROOT
    for r in bfs_order(a):
        for sym, s in nodes[r].edges:
            if r == ROOT:
                nodes[s].fail = ROOT
            else:
                f = nodes[r].fail
                while True:
                    nxt = nodes[f].goto(sym)
                    if nxt is not None:
                        nodes[s].fail = nxt
                        break
                    if f == ROOT:
                        nodes[s].fail = ROOT
                        break
                    f = nodes[f].fail
            inherited = nodes[nodes[s].fail].outputs
            if inherited:
                nodes[s].outputs = sorted(nodes[s].outputs + inherited)
    a.failure_built = True
    return a


def compile_dense(a: Automaton) -> Automaton:
    """Compile failure links away into a total table. In place."""
    if not a.failure_built:
        raise ValueError("build_failure must run before compile_dense")
    ncols = len(a.alphabet.symbols)
    col = a.alphabet.column
    delta = [None] * a.state_count
    for s in bfs_order(a):
        node = a.nodes[s]
        row = [ROOT] * ncols if s == ROOT else list(delta[node.fail])
        for sym, nxt in node.edges:
            row[col(sym)] = nxt
        row[-1] = ROOT  # sentinel column
        delta[s] = row
    a.dense = DenseTable(delta=delta, outputs=[tuple(n.outputs) for n in a.nodes])
    return a


def build_automaton(patterns, alphabet: Alphabet = DEFAULT_ALPHABET) -> Automaton:
    return compile_dense(build_failure(build_goto(patterns, alphabet)))


def match_sparse(a: Automaton, text: BytesLike) -> tuple[list, WorkProfile]:
    if not a.failure_built:
        raise ValueError("automaton has no failure links")
    text = as_bytes(text)
    a.alphabet.check_text(text)
    edges = [n.edges for n in a.nodes]
    fail = [n.fail for n in a.nodes]
    outs = [n.outputs for n in a.nodes]
    events: list = []
    comparisons = 0
    fails = 0
    s = ROOT
    for i, c in enumerate(text):
        while True:
            for sym, nxt in edges[s]:
                comparisons += 1
                if sym == c:
                    s = nxt
                    break
            else:
                if s == ROOT:
                    break
                s = fail[s]
                fails += 1
                continue
            break
        if outs[s]:
            events.extend([MatchEvent(p, i) for p in outs[s]])
    work = WorkProfile(chars=len(text), edge_comparisons=comparisons, fail_traversals=fails)
    return events, work


def match_dense(a: Automaton, text: BytesLike) -> tuple[list, WorkProfile]:
    if a.dense is None:
        raise ValueError("automaton has no dense table")
    text = as_bytes(text)
    cols = a.alphabet.columns(text)
    delta = a.dense.delta
    outs = a.dense.outputs
    events: list = []
    s = ROOT
    for i, c in enumerate(cols):
        s = delta[s][c]
        if outs[s]:
            events.extend([MatchEvent(p, i) for p in outs[s]])
    return events, WorkProfile(chars=len(text), lookups=len(cols))


def match_naive(patterns: PatternSet | Sequence[BytesLike], text: BytesLike,
                alphabet: Alphabet = DEFAULT_ALPHABET) -> list:
    """Brute-force reference: every occurrence of every pattern."""
    if not isinstance(patterns, PatternSet):
        patterns = PatternSet(tuple(patterns))
    patterns.validate(alphabet)
    text = as_bytes(text)
    alphabet.check_text(text)
    found = []
    for pid, pat in enumerate(patterns):
        last = len(pat) - 1
        start = text.find(pat)
        while start >= 0:
            found.append((start + last, pid))
            start = text.find(pat, start + 1)
    found.sort()
    return [MatchEvent(pid, end) for end, pid in found]
