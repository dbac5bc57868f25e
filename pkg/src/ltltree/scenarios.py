"""Scenario generators: grid workspaces, the two case-study shapes, the
meeting-event formula family and a seeded random instance corpus.

Weights are Euclidean distances between cell centres on a unit grid and
self-loops cost 0.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from importlib import resources

from .automaton import Nba, parse_nba
from .model import MultiRobotModel, Wts
from .translate import ltl_to_nba
from .ltl import parse_ltl

__all__ = ["grid_model", "case1_model", "case2_model", "intermittent_formula",
           "parse_teams", "CASE1_TEAMS", "CASE1_FORMULA", "CASE2_FORMULA",
           "case1_nba", "RandomInstance", "random_instance", "random_corpus"]


def _cell(k: int, cols: int) -> tuple[int, int]:
    return divmod(k, cols)


def _grid_edges(rows: int, cols: int, diagonals=()) -> list[tuple[int, int]]:
    """Undirected 4-neighbour edges (row-major cell order) plus extras."""
    out = []
    for k in range(rows * cols):
        r, c = _cell(k, cols)
        if c + 1 < cols:
            out.append((k, k + 1))
        if r + 1 < rows:
            out.append((k, k + cols))
    return out + list(diagonals)


def _wts(robot_id: int, rows: int, cols: int, undirected, start: int) -> Wts:
    names = tuple(f"l{k + 1}" for k in range(rows * cols))
    edges = []
    for k in range(rows * cols):
        edges.append((k, k, 0.0))
    for a, b in undirected:
        (ra, ca), (rb, cb) = _cell(a, cols), _cell(b, cols)
        w = math.hypot(ra - rb, ca - cb)
        edges += [(a, b, w), (b, a, w)]
    edges.sort(key=lambda e: (e[0], e[1]))
    labels = tuple(frozenset([f"r{robot_id}@{n}"]) for n in names)
    return Wts(robot_id, names, start, tuple(edges), labels)


def grid_model(rows: int, cols: int, robots: int, starts=None,
               diagonals=()) -> MultiRobotModel:
    """Identical grid for every robot; cells ``l1..l{rows*cols}`` row-major.

    ``starts`` gives 0-based start cells; by default robot ``i`` starts at
    cell ``(i - 1) mod (rows*cols)``.
    """
    if rows < 1 or cols < 1 or robots < 1:
        raise ValueError("rows, cols and robots must be positive")
    n = rows * cols
    if starts is None:
        starts = [i % n for i in range(robots)]
    if len(starts) != robots or not all(0 <= s < n for s in starts):
        raise ValueError("need one valid start cell per robot")
    und = _grid_edges(rows, cols, diagonals)
    return MultiRobotModel(tuple(_wts(i + 1, rows, cols, und, s)
                                 for i, s in enumerate(starts)))


# 3x3 grid (12 edges) plus three diagonals through the centre cell l5:
# 15 undirected edges, 30 directed, 39 transitions with the self-loops.
CASE1_DIAGONALS = ((0, 4), (4, 8), (2, 4))


def case1_model() -> MultiRobotModel:
    """Nine robots on the 9-cell workspace, robot ``i`` starting at ``l{i}``."""
    return grid_model(3, 3, 9, starts=list(range(9)), diagonals=CASE1_DIAGONALS)


# 4x4 grid (24 edges) plus three diagonals: 54 directed + 16 self-loops = 70.
CASE2_DIAGONALS = ((0, 5), (5, 10), (10, 15))


def case2_model() -> MultiRobotModel:
    return grid_model(4, 4, 2, starts=[0, 15], diagonals=CASE2_DIAGONALS)


CASE1_TEAMS = (((1, 2), "l5"), ((2, 3, 4), "l1"), ((4, 5, 6), "l7"),
               ((6, 7), "l8"), ((7, 8), "l4"), ((8, 9), "l3"))

CASE2_FORMULA = ("[]<>(r1@l6 & <> r2@l14) & [] !r1@l9 & "
                 "[](r2@l14 -> X(!r2@l14 U r1@l4)) & <> r2@l12 & []<> r2@l10")


def parse_teams(text: str):
    """``"1,2@l5;2,3,4@l1"`` -> ``(((1, 2), "l5"), ((2, 3, 4), "l1"))``."""
    teams = []
    for part in text.split(";"):
        part = part.strip()
        if not part:
            continue
        members, sep, region = part.partition("@")
        if not sep or not region.strip():
            raise ValueError(f"team {part!r} must look like 1,2@l5")
        ids = tuple(int(x) for x in members.split(","))
        if not ids or any(i < 1 for i in ids):
            raise ValueError(f"team {part!r}: robot ids must be positive")
        teams.append((ids, region.strip()))
    if not teams:
        raise ValueError("no teams given")
    return tuple(teams)


def _meeting(ids, region) -> str:
    return " & ".join(f"r{i}@{region}" for i in ids)


def intermittent_formula(teams, until=None) -> str:
    """Every team meets at its region infinitely often. ``until=(ids, region,
    target)`` adds ``!(meeting) U target``."""
    parts = [f"[] <> ({_meeting(ids, region)})" for ids, region in teams]
    if until is not None:
        ids, region, target = until
        parts.append(f"(!({_meeting(ids, region)}) U {target})")
    return " & ".join(parts)


CASE1_FORMULA = intermittent_formula(CASE1_TEAMS, until=((1, 2), "l5", "r1@l7"))


def case1_nba() -> Nba:
    """Hand-written 8-state automaton for the case-study-I formula."""
    text = resources.files("ltltree.data").joinpath("case1.nba").read_text("utf-8")
    return parse_nba(text)


# -------------------------------------------------------- random corpus

@dataclass
class RandomInstance:
    seed: int
    model: MultiRobotModel
    formula: str
    nba: Nba


_TEMPLATES = (
    "[]<> {a} & []<> {b}",
    "<> {a} & [] !{c}",
    "[]<> ({a} & {b})",
    "<> ({a} & X {b})",
    "[]({a} -> <> {b}) & []<> {a}",
    "(!{a} U {b}) & []<> {c}",
    "<>[] {a}",
    "[]<> {a} & <> {b}",
    "<> {a} & <> {b} & []<> {c}",
    "[] !{c} & []<> {a}",
)


def _random_model(rnd: random.Random) -> MultiRobotModel:
    n = rnd.choice((1, 2, 3))
    size_range = {1: (4, 6), 2: (3, 6), 3: (2, 4)}[n]
    robots = []
    for i in range(1, n + 1):
        m = rnd.randint(*size_range)
        names = tuple(f"l{k + 1}" for k in range(m))
        edges = {}
        for k in range(m):
            edges[(k, k)] = 0.0 if rnd.random() < 0.6 else rnd.randint(1, 4) / 4
        for k in range(m):
            # a ring keeps every state reachable, chords add choice
            edges[(k, (k + 1) % m)] = rnd.randint(1, 12) / 4
        for _ in range(rnd.randint(0, m)):
            a, b = rnd.randrange(m), rnd.randrange(m)
            if (a, b) not in edges:
                edges[(a, b)] = rnd.randint(1, 12) / 4
        ordered = tuple((a, b, w) for (a, b), w in sorted(edges.items()))
        labels = tuple(frozenset([f"r{i}@{s}"]) for s in names)
        robots.append(Wts(i, names, rnd.randrange(m), ordered, labels))
    return MultiRobotModel(tuple(robots))


def random_instance(seed: int, max_nba: int = 12, max_product: int = 10**4,
                    require_plan: bool = True) -> RandomInstance:
    """Deterministic random instance; resamples until the limits hold and,
    if requested, an optimal plan exists according to the oracle."""
    from .oracle import oracle_optimal_plan  # avoid an import cycle

    rnd = random.Random(seed)
    while True:
        model = _random_model(rnd)
        atoms = sorted(model.alphabet)
        a, b, c = rnd.sample(atoms, 3) if len(atoms) >= 3 else rnd.choices(atoms, k=3)
        formula = rnd.choice(_TEMPLATES).format(a=a, b=b, c=c)
        nba = ltl_to_nba(parse_ltl(formula))
        if len(nba) > max_nba or model.n_pts_states * len(nba) > max_product:
            continue
        if require_plan and not oracle_optimal_plan(model, nba):
            continue
        return RandomInstance(seed, model, formula, nba)


def random_corpus(count: int, base_seed: int = 0, **kw) -> list[RandomInstance]:
    return [random_instance(base_seed + k, **kw) for k in range(count)]
