"""Nondeterministic Büchi automata with boolean edge guards.

The exchange format is line oriented::

    # comment
    states: q0 q1
    initial: q0
    accepting: q1
    alphabet: a b
    q0 -- a & !b --> q1
    q1 -- true --> q1

State identity is the position in the ``states:`` list; names are kept only
for display.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable, Iterable

from .errors import FormatError, LtlSyntaxError, UnknownAtom
from .ltl import (And, Atom, FalseConst, Formula, LassoWord, Not, Or, TRUE,
                  TrueConst, atoms, parse_ltl, subformulas, to_str)

__all__ = [
    "Nba", "guard_sat", "compile_guard", "conjunction", "nba_successors",
    "nba_accepts_lasso", "parse_nba", "emit_nba", "strongly_connected",
]

Label = frozenset  # set of atom names true at one position
_BOOLEAN = (TrueConst, FalseConst, Atom, Not, And, Or)


def _check_boolean(guard: Formula) -> None:
    for g in subformulas(guard):
        if not isinstance(g, _BOOLEAN):
            raise ValueError(f"temporal operator in guard: {to_str(guard)}")


def guard_sat(guard: Formula, labels: Iterable[str], alphabet=None) -> bool:
    """Boolean satisfaction of ``guard`` when exactly ``labels`` are true."""
    if alphabet is not None:
        unknown = atoms(guard) - frozenset(alphabet)
        if unknown:
            raise UnknownAtom(f"guard uses atoms outside alphabet: {sorted(unknown)}")
    return compile_guard(guard)(frozenset(labels))


def _literals(guard: Formula):
    """(positive, negative) atom sets if ``guard`` is a conjunction of
    literals, else None."""
    pos, neg = set(), set()
    stack = [guard]
    while stack:
        g = stack.pop()
        if isinstance(g, And):
            stack += [g.left, g.right]
        elif isinstance(g, Atom):
            pos.add(g.name)
        elif isinstance(g, Not) and isinstance(g.arg, Atom):
            neg.add(g.arg.name)
        elif isinstance(g, TrueConst):
            continue
        else:
            return None
    return frozenset(pos), frozenset(neg)


def compile_guard(guard: Formula) -> Callable[[frozenset], bool]:
    lits = _literals(guard)
    if lits is not None:
        pos, neg = lits
        if pos & neg:
            return lambda labels: False
        return lambda labels: pos <= labels and neg.isdisjoint(labels)

    def ev(g, labels):
        if isinstance(g, TrueConst):
            return True
        if isinstance(g, FalseConst):
            return False
        if isinstance(g, Atom):
            return g.name in labels
        if isinstance(g, Not):
            return not ev(g.arg, labels)
        if isinstance(g, And):
            return ev(g.left, labels) and ev(g.right, labels)
        if isinstance(g, Or):
            return ev(g.left, labels) or ev(g.right, labels)
        raise ValueError(f"temporal operator in guard: {to_str(g)}")

    return lambda labels: ev(guard, labels)


def conjunction(literals: Iterable[Formula]) -> Formula:
    """Left-nested conjunction; ``true`` for an empty iterable."""
    out = None
    for lit in literals:
        out = lit if out is None else And(out, lit)
    return TRUE if out is None else out


@dataclass(frozen=True)
class Nba:
    states: tuple[str, ...]
    initial: tuple[int, ...]
    accepting: frozenset[int]
    edges: tuple[tuple[int, Formula, int], ...]
    alphabet: frozenset[str]
    _out: tuple = field(init=False, repr=False, compare=False)
    _guards: tuple = field(init=False, repr=False, compare=False)
    _tables: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        n = len(self.states)
        if not self.initial:
            raise ValueError("automaton needs at least one initial state")
        for q in (*self.initial, *self.accepting):
            if not 0 <= q < n:
                raise ValueError(f"state index {q} out of range")
        out = [[] for _ in range(n)]
        for k, (src, guard, dst) in enumerate(self.edges):
            if not (0 <= src < n and 0 <= dst < n):
                raise ValueError(f"edge {k} has an endpoint out of range")
            _check_boolean(guard)
            unknown = atoms(guard) - self.alphabet
            if unknown:
                raise ValueError(f"edge {k} uses atoms outside alphabet: {sorted(unknown)}")
            out[src].append(k)
        object.__setattr__(self, "_out", tuple(tuple(o) for o in out))
        object.__setattr__(self, "_guards",
                           tuple(compile_guard(g) for _, g, _ in self.edges))
        object.__setattr__(self, "_tables", {})

    def __len__(self):
        return len(self.states)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def out_edges(self, q: int) -> tuple[int, ...]:
        return self._out[q]

    def _entry(self, labels):
        key = frozenset(labels) & self.alphabet
        entry = self._tables.get(key)
        if entry is None:
            succ = []
            for q in range(len(self.states)):
                seen = []
                for k in self._out[q]:
                    dst = self.edges[k][2]
                    if dst not in seen and self._guards[k](key):
                        seen.append(dst)
                succ.append(tuple(seen))
            pred = [[] for _ in self.states]
            for q, targets in enumerate(succ):
                for dst in targets:
                    pred[dst].append(q)
            entry = (tuple(succ), tuple(tuple(p) for p in pred))
            self._tables[key] = entry
        return entry

    def successors(self, q: int, labels) -> tuple[int, ...]:
        """Targets of enabled edges out of ``q``, in edge order, deduplicated."""
        return self._entry(labels)[0][q]

    def successor_table(self, labels) -> tuple[tuple[int, ...], ...]:
        return self._entry(labels)[0]

    def predecessor_table(self, labels) -> tuple[tuple[int, ...], ...]:
        """``table[q]`` lists states with an enabled edge into ``q``, ascending."""
        return self._entry(labels)[1]

    def __getstate__(self):
        return {k: getattr(self, k) for k in
                ("states", "initial", "accepting", "edges", "alphabet")}

    def __setstate__(self, state):
        for k, v in state.items():
            object.__setattr__(self, k, v)
        self.__post_init__()


def nba_successors(nba: Nba, q: int, labels) -> set[int]:
    return set(nba.successors(q, labels))


def strongly_connected(nodes: Iterable[int], succ: Callable[[int], Iterable[int]]):
    """Tarjan's algorithm, iterative. Yields components as lists."""
    index: dict[int, int] = {}
    low: dict[int, int] = {}
    on_stack: set[int] = set()
    stack: list[int] = []
    counter = 0
    for root in nodes:
        if root in index:
            continue
        work = [(root, iter(succ(root)))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(succ(w))))
                    advanced = True
                    break
                if w in on_stack and index[w] < low[v]:
                    low[v] = index[w]
            if advanced:
                continue
            work.pop()
            if work:
                u = work[-1][0]
                if low[v] < low[u]:
                    low[u] = low[v]
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                yield comp


def lasso_product(n_states, initial, successors, word: LassoWord):
    """Reachable part of (lasso position x automaton state).

    ``successors(q, letter)`` gives automaton moves. Nodes are encoded as
    ``position * n_states + q``. Returns (reachable node list, succ function).
    """
    length = len(word)
    letters = [word.letter(i) for i in range(length)]
    nxt = [word.successor(i) for i in range(length)]

    def succ(node):
        i, q = divmod(node, n_states)
        base = nxt[i] * n_states
        return [base + r for r in successors(q, letters[i])]

    seen = set(initial)
    order = list(seen)
    frontier = list(order)
    while frontier:
        v = frontier.pop()
        for w in succ(v):
            if w not in seen:
                seen.add(w)
                order.append(w)
                frontier.append(w)
    return order, succ


def _has_cycle(comp, succ) -> bool:
    if len(comp) > 1:
        return True
    v = comp[0]
    return v in succ(v)


def nba_accepts_lasso(nba: Nba, word: LassoWord) -> bool:
    """Some run over ``word`` visits an accepting state infinitely often."""
    current = set(nba.initial)
    for letter in word.prefix:
        current = {r for q in current for r in nba.successors(q, letter)}
    return not current.isdisjoint(_cycle_winners(nba, word.cycle))


def _cycle_winners(nba: Nba, cycle) -> frozenset[int]:
    """States from which ``cycle^omega`` has an accepting run.

    Depends only on the automaton and the cycle, so it is memoized on the
    automaton.
    """
    key = ("cycle", tuple(frozenset(c) & nba.alphabet for c in cycle))
    hit = nba._tables.get(key)
    if hit is not None:
        return hit
    n, c = len(nba.states), len(cycle)

    def succ(node):
        j, q = divmod(node, n)
        base = ((j + 1) % c) * n
        return [base + r for r in nba.successors(q, cycle[j])]

    live = set()
    for comp in strongly_connected(range(n * c), succ):
        if any(v % n in nba.accepting for v in comp) and _has_cycle(comp, succ):
            live.update(comp)
    preds: dict[int, list[int]] = {}
    for v in range(n * c):
        for w in succ(v):
            preds.setdefault(w, []).append(v)
    stack = list(live)
    while stack:
        w = stack.pop()
        for v in preds.get(w, ()):
            if v not in live:
                live.add(v)
                stack.append(v)
    winners = frozenset(v for v in live if v < n)
    if len(nba._tables) < 100_000:
        nba._tables[key] = winners
    return winners


# ---------------------------------------------------------------- text I/O

_HEADERS = ("states", "initial", "accepting", "alphabet")
_EDGE = re.compile(r"^(\S+)\s+--\s*(.*?)\s*-->\s*(\S+)$")


def parse_nba(text: str) -> Nba:
    header: dict[str, tuple[list[str], int]] = {}
    raw_edges = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        m = _EDGE.match(line)
        if m:
            raw_edges.append((lineno, m.group(1), m.group(2), m.group(3)))
            continue
        key, sep, rest = line.partition(":")
        key = key.strip()
        if not sep or key not in _HEADERS:
            raise FormatError(f"cannot parse {line!r}", lineno)
        if key in header:
            raise FormatError(f"duplicate '{key}:' header", lineno)
        header[key] = (rest.split(), lineno)
    for key in ("states", "initial"):
        if key not in header:
            raise FormatError(f"missing '{key}:' header")

    names, line_states = header["states"]
    if len(set(names)) != len(names):
        raise FormatError("duplicate state name", line_states)
    index = {name: i for i, name in enumerate(names)}

    def lookup(name, lineno):
        if name not in index:
            raise FormatError(f"unknown state {name!r}", lineno)
        return index[name]

    initial = tuple(lookup(s, header["initial"][1]) for s in header["initial"][0])
    if not initial:
        raise FormatError("no initial state", header["initial"][1])
    acc_names, acc_line = header.get("accepting", ([], None))
    accepting = frozenset(lookup(s, acc_line) for s in acc_names)
    alphabet = frozenset(header.get("alphabet", ([], None))[0])

    edges = []
    for lineno, src, guard_text, dst in raw_edges:
        try:
            guard = parse_ltl(guard_text)
            _check_boolean(guard)
        except (LtlSyntaxError, ValueError) as exc:
            raise FormatError(f"bad guard {guard_text!r}: {exc}", lineno) from None
        unknown = atoms(guard) - alphabet
        if unknown:
            raise FormatError(f"guard uses atoms outside alphabet: {sorted(unknown)}", lineno)
        edges.append((lookup(src, lineno), guard, lookup(dst, lineno)))
    return Nba(tuple(names), initial, accepting, tuple(edges), alphabet)


def emit_nba(nba: Nba) -> str:
    names = nba.states
    lines = [
        "states: " + " ".join(names),
        "initial: " + " ".join(names[q] for q in nba.initial),
        "accepting: " + " ".join(names[q] for q in sorted(nba.accepting)),
        "alphabet: " + " ".join(sorted(nba.alphabet)),
    ]
    lines = [line.rstrip() for line in lines]
    lines += [f"{names[s]} -- {to_str(g)} --> {names[d]}" for s, g, d in nba.edges]
    return "\n".join(lines) + "\n"
