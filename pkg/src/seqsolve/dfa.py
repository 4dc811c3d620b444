"""Complete deterministic finite automata over the alphabet {a, b, c, d}.

Every Dfa is kept canonical: complete (a transition for every letter,
with an explicit dead state when needed), restricted to reachable
states, minimized, and relabeled by breadth-first search in letter
order. Canonical form makes structural equality coincide with language
equality, so automata can serve as memoization keys, and it keeps the
set of automata generated by repeated intersections and start/accept
surgery finite, which the solver's termination argument relies on.

Build automata with the regex-style constructors (lit, union, concat,
star, plus, power) or from explicit parts with make_dfa.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

ALPHABET = "abcd"
_IDX = {c: i for i, c in enumerate(ALPHABET)}


@dataclass(frozen=True)
class Dfa:
    delta: tuple[tuple[int, int, int, int], ...]
    start: int
    accepting: frozenset[int]

    @property
    def n(self) -> int:
        return len(self.delta)

    def step(self, state: int, letter: str) -> int:
        return self.delta[state][_IDX[letter]]

    def accepts(self, word: str) -> bool:
        s = self.start
        for ch in word:
            s = self.delta[s][_IDX[ch]]
        return s in self.accepting

    def is_empty(self) -> bool:
        return not self.accepting  # canonical: all states reachable

    def is_universal(self) -> bool:
        return len(self.accepting) == self.n

    def shortest_word(self) -> str | None:
        """Length-lexicographically least accepted word, None if empty."""
        if self.start in self.accepting:
            return ""
        seen = {self.start}
        frontier = [(self.start, "")]
        while frontier:
            nxt = []
            for state, word in frontier:
                for i, ch in enumerate(ALPHABET):
                    t = self.delta[state][i]
                    if t in seen:
                        continue
                    if t in self.accepting:
                        return word + ch
                    seen.add(t)
                    nxt.append((t, word + ch))
            frontier = nxt
        return None

    def min_length(self) -> int | None:
        w = self.shortest_word()
        return None if w is None else len(w)

    def complement(self) -> Dfa:
        return _complement(self)

    def intersect(self, other: Dfa) -> Dfa:
        return _intersect(self, other)

    def union(self, other: Dfa) -> Dfa:
        return _union(self, other)

    def with_start(self, q: int) -> Dfa:
        """The language read from state q to acceptance."""
        return _with_start(self, q)

    def accept_at(self, q: int) -> Dfa:
        """The language read from the start to exactly state q."""
        return _accept_at(self, q)

    def derivative(self, letter: str) -> Dfa:
        return self.with_start(self.step(self.start, letter))

    def is_singleton(self) -> bool:
        """Does the language consist of exactly one word?"""
        return _is_singleton(self)

    def contains(self, other: Dfa) -> bool:
        return other.intersect(self.complement()).is_empty()


# The solver calls these on the same automata over and over while
# searching, so memoize; automata are immutable.


@lru_cache(maxsize=None)
def _complement(d: Dfa) -> Dfa:
    return _canon(d.delta, d.start, frozenset(range(d.n)) - d.accepting)


@lru_cache(maxsize=None)
def _intersect(a: Dfa, b: Dfa) -> Dfa:
    return _product(a, b, lambda x, y: x and y)


@lru_cache(maxsize=None)
def _union(a: Dfa, b: Dfa) -> Dfa:
    return _product(a, b, lambda x, y: x or y)


@lru_cache(maxsize=None)
def _with_start(d: Dfa, q: int) -> Dfa:
    return _canon(d.delta, q, d.accepting)


@lru_cache(maxsize=None)
def _accept_at(d: Dfa, q: int) -> Dfa:
    return _canon(d.delta, d.start, frozenset([q]))


@lru_cache(maxsize=None)
def _is_singleton(d: Dfa) -> bool:
    w = d.shortest_word()
    if w is None:
        return False
    return d.intersect(lit(w).complement()).is_empty()


def _canon(delta, start, accepting) -> Dfa:
    """Restrict to reachable states, minimize, relabel canonically."""
    n = len(delta)
    # reachable
    order = [start]
    seen = {start}
    for s in order:
        for t in delta[s]:
            if t not in seen:
                seen.add(t)
                order.append(t)
    # Moore partition refinement
    cls = {s: (s in accepting) for s in order}
    while True:
        sig = {s: (cls[s], tuple(cls[t] for t in delta[s])) for s in order}
        ids: dict[tuple, int] = {}
        new = {}
        for s in order:
            new[s] = ids.setdefault(sig[s], len(ids))
        if len(set(new.values())) == len(set(cls.values())):
            cls = new
            break
        cls = new
    # quotient, then BFS relabel from the start class
    rep: dict[int, int] = {}
    for s in order:
        rep.setdefault(cls[s], s)
    label = {cls[start]: 0}
    bfs = [cls[start]]
    for c in bfs:
        s = rep[c]
        for t in delta[s]:
            ct = cls[t]
            if ct not in label:
                label[ct] = len(label)
                bfs.append(ct)
    m = len(label)
    out = [None] * m
    acc = set()
    for c in bfs:
        s = rep[c]
        out[label[c]] = tuple(label[cls[t]] for t in delta[s])
        if s in accepting:
            acc.add(label[c])
    return Dfa(tuple(out), 0, frozenset(acc))


def make_dfa(delta, start, accepting) -> Dfa:
    """Canonical DFA from explicit transition rows (one 4-tuple of
    successor states per state, in alphabet order)."""
    return _canon(tuple(tuple(row) for row in delta), start, frozenset(accepting))


def _product(a: Dfa, b: Dfa, combine) -> Dfa:
    ids = {(a.start, b.start): 0}
    order = [(a.start, b.start)]
    rows = []
    for (s, t) in order:
        row = []
        for i in range(4):
            nxt = (a.delta[s][i], b.delta[t][i])
            if nxt not in ids:
                ids[nxt] = len(ids)
                order.append(nxt)
            row.append(ids[nxt])
        rows.append(tuple(row))
    acc = frozenset(
        ids[(s, t)] for (s, t) in order if combine(s in a.accepting, t in b.accepting)
    )
    return _canon(tuple(rows), 0, acc)


# ---------------------------------------------------------------------------
# regex-style constructors, via a small epsilon-NFA


class _Nfa:
    def __init__(self):
        self.n = 0
        self.eps: list[tuple[int, int]] = []
        self.edges: list[tuple[int, int, int]] = []  # (src, letter index, dst)

    def state(self) -> int:
        self.n += 1
        return self.n - 1

    def closure(self, states: frozenset[int]) -> frozenset[int]:
        out = set(states)
        changed = True
        while changed:
            changed = False
            for s, t in self.eps:
                if s in out and t not in out:
                    out.add(t)
                    changed = True
        return frozenset(out)

    def determinize(self, start: int, accept: int) -> Dfa:
        init = self.closure(frozenset([start]))
        ids = {init: 0}
        order = [init]
        rows = []
        for cur in order:
            row = []
            for i in range(4):
                step = frozenset(d for (s, l, d) in self.edges if s in cur and l == i)
                step = self.closure(step)
                if step not in ids:
                    ids[step] = len(ids)
                    order.append(step)
                row.append(ids[step])
            rows.append(tuple(row))
        acc = frozenset(ids[s] for s in order if accept in s)
        return _canon(tuple(rows), 0, acc)


def _from_parts(build) -> Dfa:
    nfa = _Nfa()
    start, accept = nfa.state(), nfa.state()
    build(nfa, start, accept)
    return nfa.determinize(start, accept)


def _add_dfa(nfa: _Nfa, d: Dfa, src: int, dst: int) -> None:
    base = nfa.n
    for _ in range(d.n):
        nfa.state()
    nfa.eps.append((src, base + d.start))
    for s in range(d.n):
        for i in range(4):
            nfa.edges.append((base + s, i, base + d.delta[s][i]))
        if s in d.accepting:
            nfa.eps.append((base + s, dst))


def lit(word: str) -> Dfa:
    """The language containing exactly the given word."""

    def build(nfa, src, dst):
        cur = src
        for ch in word:
            nxt = nfa.state()
            nfa.edges.append((cur, _IDX[ch], nxt))
            cur = nxt
        nfa.eps.append((cur, dst))

    return _from_parts(build)


def union(*parts: Dfa) -> Dfa:
    def build(nfa, src, dst):
        for p in parts:
            _add_dfa(nfa, p, src, dst)

    return _from_parts(build)


def concat(*parts: Dfa) -> Dfa:
    def build(nfa, src, dst):
        cur = src
        for p in parts:
            nxt = nfa.state()
            _add_dfa(nfa, p, cur, nxt)
            cur = nxt
        nfa.eps.append((cur, dst))

    return _from_parts(build)


def star(d: Dfa) -> Dfa:
    def build(nfa, src, dst):
        mid = nfa.state()
        nfa.eps.append((src, mid))
        _add_dfa(nfa, d, mid, mid)
        nfa.eps.append((mid, dst))

    return _from_parts(build)


def plus(d: Dfa) -> Dfa:
    return concat(d, star(d))


def power(d: Dfa, k: int) -> Dfa:
    def build(nfa, src, dst):
        cur = src
        for _ in range(max(k, 0)):
            nxt = nfa.state()
            _add_dfa(nfa, d, cur, nxt)
            cur = nxt
        nfa.eps.append((cur, dst))

    return _from_parts(build)


@lru_cache(maxsize=None)
def empty_dfa() -> Dfa:
    return make_dfa([(0, 0, 0, 0)], 0, [])


@lru_cache(maxsize=None)
def epsilon_dfa() -> Dfa:
    return lit("")


@lru_cache(maxsize=None)
def universal_dfa() -> Dfa:
    return make_dfa([(0, 0, 0, 0)], 0, [0])
