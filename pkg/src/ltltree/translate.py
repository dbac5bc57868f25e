"""LTL to Büchi automaton translation.

Tableau expansion (Gerth-Peled-Vardi-Wolper) into a generalized Büchi
automaton, followed by a counting degeneralization. Tableau nodes become
automaton states; the literals a node commits to guard its *outgoing*
edges, so no extra initial state is needed.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .automaton import (Nba, conjunction, lasso_product, strongly_connected,
                        _has_cycle, compile_guard)
from .errors import CapacityExceeded
from .ltl import (FALSE, TRUE, And, Atom, FalseConst, Formula, LassoWord, Next,
                  Not, Or, Release, TrueConst, Until, atoms, is_nnf, to_nnf)

__all__ = ["ltl_to_nba", "ltl_to_gba", "degeneralize", "GeneralizedBuchi",
           "gba_accepts_lasso", "simplify", "DEFAULT_MAX_STATES"]

DEFAULT_MAX_STATES = 10**6


def simplify(f: Formula) -> Formula:
    """Constant folding on an NNF formula."""
    if isinstance(f, (TrueConst, FalseConst, Atom, Not)):
        return f
    if isinstance(f, Next):
        arg = simplify(f.arg)
        return arg if isinstance(arg, (TrueConst, FalseConst)) else Next(arg)
    left, right = simplify(f.left), simplify(f.right)
    if isinstance(f, And):
        if isinstance(left, FalseConst) or isinstance(right, FalseConst):
            return FALSE
        if isinstance(left, TrueConst):
            return right
        if isinstance(right, TrueConst):
            return left
        return And(left, right)
    if isinstance(f, Or):
        if isinstance(left, TrueConst) or isinstance(right, TrueConst):
            return TRUE
        if isinstance(left, FalseConst):
            return right
        if isinstance(right, FalseConst):
            return left
        return Or(left, right)
    if isinstance(f, Until):
        if isinstance(right, (TrueConst, FalseConst)):
            return right
        if isinstance(left, FalseConst):
            return right
        return Until(left, right)
    if isinstance(f, Release):
        if isinstance(right, (TrueConst, FalseConst)):
            return right
        if isinstance(left, TrueConst):
            return right
        return Release(left, right)
    raise TypeError(f"not in negation normal form: {f!r}")


@dataclass(frozen=True)
class GeneralizedBuchi:
    """State-based generalized Büchi automaton; guards sit on source states."""

    guards: tuple[Formula, ...]          # literal conjunction per state
    successors: tuple[tuple[int, ...], ...]
    initial: tuple[int, ...]
    acceptance: tuple[frozenset[int], ...]
    alphabet: frozenset[str]

    def __len__(self):
        return len(self.guards)


class _Interner:
    def __init__(self):
        self.ids: dict[Formula, int] = {}
        self.formulas: list[Formula] = []

    def __call__(self, f: Formula) -> int:
        i = self.ids.get(f)
        if i is None:
            for child in f.children():
                self(child)
            i = self.ids[f] = len(self.formulas)
            self.formulas.append(f)
        return i


_INIT = -1


def ltl_to_gba(formula: Formula, max_states: int = DEFAULT_MAX_STATES) -> GeneralizedBuchi:
    f = simplify(formula if is_nnf(formula) else to_nnf(formula))
    intern = _Interner()
    root = intern(f)
    F = intern.formulas

    def negation_id(i):
        g = F[i]
        neg = g.arg if isinstance(g, Not) else Not(g)
        return intern.ids.get(neg)

    # tableau nodes: key (old, next) -> [node id, incoming set]
    nodes: dict[tuple[frozenset, frozenset], list] = {}
    order: list[tuple[frozenset, frozenset]] = []
    work = [({_INIT}, frozenset([root]), frozenset(), frozenset())]
    while work:
        incoming, new, old, nxt = work.pop()
        if not new:
            key = (old, nxt)
            entry = nodes.get(key)
            if entry is not None:
                entry[1] |= incoming
                continue
            if len(nodes) >= max_states:
                raise CapacityExceeded(len(nodes) + 1, max_states)
            nid = len(order)
            nodes[key] = [nid, set(incoming)]
            order.append(key)
            work.append(({nid}, nxt, frozenset(), frozenset()))
            continue
        eta = min(new)
        new = new - {eta}
        g = F[eta]
        if isinstance(g, FalseConst):
            continue
        if isinstance(g, TrueConst):
            work.append((incoming, new, old, nxt))
        elif isinstance(g, (Atom, Not)):
            neg = negation_id(eta)
            if neg is not None and neg in old:
                continue
            work.append((incoming, new, old | {eta}, nxt))
        elif isinstance(g, And):
            add = {intern(g.left), intern(g.right)} - old
            work.append((incoming, new | add, old | {eta}, nxt))
        elif isinstance(g, Next):
            work.append((incoming, new, old | {eta}, nxt | {intern(g.arg)}))
        else:
            left, right = intern(g.left), intern(g.right)
            if isinstance(g, Or):
                first, first_next, second = {left}, set(), {right}
            elif isinstance(g, Until):
                first, first_next, second = {left}, {eta}, {right}
            else:  # Release
                first, first_next, second = {right}, {eta}, {left, right}
            old2 = old | {eta}
            # pushed in reverse so the first branch is expanded first
            work.append((incoming, new | (second - old2), old2, nxt))
            work.append((incoming, new | (first - old2), old2, nxt | first_next))

    n = len(order)
    succ: list[list[int]] = [[] for _ in range(n)]
    initial = []
    for key in order:
        nid, incoming = nodes[key]
        for p in sorted(incoming):
            if p == _INIT:
                initial.append(nid)
            else:
                succ[p].append(nid)
    guards = []
    for old, _ in order:
        lits = sorted((F[i] for i in old if isinstance(F[i], (Atom, Not))),
                      key=lambda g: (g.name if isinstance(g, Atom) else g.arg.name,
                                     isinstance(g, Not)))
        guards.append(conjunction(lits))
    untils = [i for i, g in enumerate(F) if isinstance(g, Until)]
    acceptance = []
    for u in untils:
        target = F[u].right
        rid = intern.ids[target]
        acceptance.append(frozenset(
            k for k, (old, _) in enumerate(order)
            if u not in old or rid in old or isinstance(target, TrueConst)))
    return GeneralizedBuchi(tuple(guards), tuple(tuple(sorted(s)) for s in succ),
                            tuple(initial), tuple(acceptance), atoms(f))


def degeneralize(gba: GeneralizedBuchi, max_states: int = DEFAULT_MAX_STATES) -> Nba:
    """Counting construction; only states reachable from the initial ones
    are built."""
    k = len(gba.acceptance)
    if not gba.initial:
        return Nba(("s0",), (0,), frozenset(), (), gba.alphabet)
    levels = max(k, 1)
    index: dict[tuple[int, int], int] = {}
    states: list[tuple[int, int]] = []
    queue = deque()
    for q in gba.initial:
        if (q, 0) not in index:
            index[(q, 0)] = len(states)
            states.append((q, 0))
            queue.append((q, 0))
    edges = []
    while queue:
        q, lvl = queue.popleft()
        if k and q in gba.acceptance[lvl]:
            nxt_lvl = (lvl + 1) % levels
        else:
            nxt_lvl = lvl
        for r in gba.successors[q]:
            key = (r, nxt_lvl)
            if key not in index:
                if len(states) >= max_states:
                    raise CapacityExceeded(len(states) + 1, max_states)
                index[key] = len(states)
                states.append(key)
                queue.append(key)
            edges.append((index[(q, lvl)], gba.guards[q], index[key]))
    if k:
        accepting = frozenset(i for i, (q, lvl) in enumerate(states)
                              if lvl == 0 and q in gba.acceptance[0])
    else:
        accepting = frozenset(range(len(states)))
    initial = tuple(index[(q, 0)] for q in dict.fromkeys(gba.initial))
    names = tuple(f"s{i}" for i in range(len(states)))
    return Nba(names, initial, accepting, tuple(edges), gba.alphabet)


def ltl_to_nba(formula: Formula, max_states: int = DEFAULT_MAX_STATES) -> Nba:
    """Translate a formula (any form; NNF is applied internally) to an NBA."""
    return degeneralize(ltl_to_gba(formula, max_states), max_states)


def gba_accepts_lasso(gba: GeneralizedBuchi, word: LassoWord) -> bool:
    n = len(gba)
    checks = [compile_guard(g) for g in gba.guards]

    def moves(q, letter):
        return gba.successors[q] if checks[q](letter) else ()

    nodes, succ = lasso_product(n, gba.initial, moves, word)
    for comp in strongly_connected(nodes, succ):
        if not _has_cycle(comp, succ):
            continue
        present = {v % n for v in comp}
        if all(present & acc for acc in gba.acceptance):
            return True
    return False
