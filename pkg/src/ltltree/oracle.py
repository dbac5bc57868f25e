"""Exact reference planners for small instances.

``oracle_optimal_plan`` enumerates the whole product automaton and runs
Dijkstra for the prefix and a Dijkstra-from-the-accepting-state for the
cycle. ``ucs_optimal_prefix`` searches the product lazily. The brute-force
enumerator exists only to check the oracle itself.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from itertools import count

from .automaton import Nba
from .errors import BudgetExceeded, CapacityExceeded
from .model import MultiRobotModel, pts_label, pts_weight
from .planner import NoPlanFound, Plan, find_plan_violation
from .product import ProductState, pba_successors

__all__ = ["ExplicitPba", "build_explicit_pba", "dijkstra", "oracle_optimal_plan",
           "ucs_optimal_prefix", "brute_force_optimum", "DEFAULT_MAX_STATES"]

DEFAULT_MAX_STATES = 10**6


@dataclass
class ExplicitPba:
    states: list[ProductState]            # vertex id -> product state
    succ: list[list[tuple[int, float]]]
    pred: list[list[tuple[int, float]]]
    initial: list[int]
    accepting: frozenset[int]

    def __len__(self):
        return len(self.states)

    @property
    def num_edges(self) -> int:
        return sum(len(s) for s in self.succ)


def product_size(model: MultiRobotModel, nba: Nba) -> int:
    return model.n_pts_states * len(nba)


def build_explicit_pba(model: MultiRobotModel, nba: Nba,
                       max_states: int = DEFAULT_MAX_STATES) -> ExplicitPba:
    """Vertex id is ``code(pts) * |Q_B| + b``."""
    size = product_size(model, nba)
    if size > max_states:
        raise CapacityExceeded(size, max_states)
    nb = len(nba)
    states = [ProductState(p, b) for p in model.all_pts_states() for b in range(nb)]
    succ: list[list[tuple[int, float]]] = [[] for _ in states]
    pred: list[list[tuple[int, float]]] = [[] for _ in states]
    for v, q in enumerate(states):
        targets = nba.successors(q.buchi, pts_label(model, q.pts))
        if not targets:
            continue
        for p2 in model.pts_successors(q.pts):
            w = pts_weight(model, q.pts, p2)
            base = model.encode(p2) * nb
            for b2 in targets:
                succ[v].append((base + b2, w))
                pred[base + b2].append((v, w))
    init_code = model.encode(model.initial) * nb
    initial = [init_code + b for b in nba.initial]
    accepting = frozenset(v for v, q in enumerate(states) if q.buchi in nba.accepting)
    return ExplicitPba(states, succ, pred, initial, accepting)


def dijkstra(graph: ExplicitPba, source: int, bound: float = math.inf):
    """Distances and parents from ``source``; ties on the heap are broken by
    push order. Vertices at distance >= ``bound`` are not settled."""
    n = len(graph)
    dist = [math.inf] * n
    parent = [-1] * n
    done = [False] * n
    dist[source] = 0.0
    tick = count()
    heap = [(0.0, next(tick), source)]
    while heap:
        d, _, v = heapq.heappop(heap)
        if done[v]:
            continue
        if d >= bound:
            break
        done[v] = True
        for w_id, w in graph.succ[v]:
            nd = d + w
            if nd < dist[w_id]:
                dist[w_id] = nd
                parent[w_id] = v
                heapq.heappush(heap, (nd, next(tick), w_id))
    return dist, parent


def _chain(parent, target):
    out = [target]
    while parent[out[-1]] >= 0:
        out.append(parent[out[-1]])
    return out[::-1]


def oracle_optimal_plan(model: MultiRobotModel, nba: Nba,
                        max_states: int = DEFAULT_MAX_STATES,
                        graph: ExplicitPba | None = None) -> Plan | NoPlanFound:
    """Minimum of prefix distance plus shortest cycle over all reachable
    accepting product states. Ties keep the earlier initial state, then the
    smaller prefix distance, then the smaller vertex id."""
    g = graph if graph is not None else build_explicit_pba(model, nba, max_states)
    cycles: dict[int, tuple[float, list[int]]] = {}
    best = None  # (J, source, dist, parent, f, cycle vertices)
    for s in g.initial:
        dist, parent = dijkstra(g, s)
        reach = sorted((dist[f], f) for f in g.accepting if dist[f] < math.inf)
        for d, f in reach:
            if best is not None and d >= best[0]:
                break
            if f not in cycles:
                cycles[f] = _shortest_cycle(g, f)
            c, cyc = cycles[f]
            if c == math.inf:
                continue
            if best is None or d + c < best[0]:
                best = (d + c, s, parent, f, cyc, d, c)
    if best is None:
        return NoPlanFound("no accepting cycle reachable")
    total, s, parent, f, cyc, d, c = best
    pre = [g.states[v] for v in _chain(parent, f)]
    suf = [g.states[v] for v in cyc]
    plan = Plan(prefix=[q.pts for q in pre], suffix=[q.pts for q in suf],
                prefix_cost=d, suffix_cost=c, total_cost=d + c,
                provenance={"initial_buchi": g.states[s].buchi,
                            "accepting_state": g.states[f]},
                product_prefix=pre, product_suffix=suf)
    problem = find_plan_violation(model, nba, plan)
    if problem is not None:
        raise RuntimeError(f"oracle plan failed validation: {problem}")
    return plan


def _shortest_cycle(g: ExplicitPba, f: int):
    """Cheapest closed walk through ``f``, as the vertex list after ``f``
    ending at ``f``."""
    if not g.pred[f]:
        return math.inf, []
    dist, parent = dijkstra(g, f)
    best_c, best_p = math.inf, -1
    for p, w in g.pred[f]:
        c = dist[p] + w
        if c < best_c or (c == best_c and p < best_p):
            best_c, best_p = c, p
    if best_p < 0:
        return math.inf, []
    path = _chain(parent, best_p)  # f ... p
    return best_c, path[1:] + [f]


def ucs_optimal_prefix(model: MultiRobotModel, nba: Nba,
                       max_expansions: int = 10**6):
    """Uniform-cost search over the implicit product from all initial
    product states; returns ``(accepting state, cost)``."""
    tick = count()
    heap = []
    best: dict[ProductState, float] = {}
    for b in nba.initial:
        q = ProductState(model.initial, b)
        if q not in best:
            best[q] = 0.0
            heapq.heappush(heap, (0.0, next(tick), q))
    settled = set()
    expansions = 0
    while heap:
        d, _, q = heapq.heappop(heap)
        if q in settled:
            continue
        settled.add(q)
        if q.buchi in nba.accepting:
            return q, d
        expansions += 1
        if expansions > max_expansions:
            raise BudgetExceeded(max_expansions)
        for q2 in pba_successors(model, nba, q):
            nd = d + pts_weight(model, q.pts, q2.pts)
            if nd < best.get(q2, math.inf):
                best[q2] = nd
                heapq.heappush(heap, (nd, next(tick), q2))
    return NoPlanFound("no accepting product state reachable")


def brute_force_optimum(model: MultiRobotModel, nba: Nba, max_states: int = 200):
    """Optimal plan cost by enumerating simple prefix paths and simple cycles;
    None when no accepting cycle is reachable.

    Partial walks that already cost at least the best known total are cut,
    which is safe because weights are nonnegative.
    """
    g = build_explicit_pba(model, nba, max_states)
    order = [sorted(out, key=lambda e: (e[1], e[0])) for out in g.succ]
    cycle_cost: dict[int, float] = {}
    best = math.inf

    def reaching(targets):
        stack = list(targets)
        seen = set(stack)
        while stack:
            for u, _ in g.pred[stack.pop()]:
                if u not in seen:
                    seen.add(u)
                    stack.append(u)
        return seen

    def cycle(f):
        found = math.inf
        useful = reaching([f])

        def walk(v, on_path, cost):
            nonlocal found
            for nxt, w in order[v]:
                c = cost + w
                if c >= found:
                    continue
                if nxt == f:
                    found = c
                elif nxt in useful and nxt not in on_path:
                    on_path.add(nxt)
                    walk(nxt, on_path, c)
                    on_path.discard(nxt)

        walk(f, {f}, 0.0)
        return found

    def paths(v, on_path, cost):
        nonlocal best
        if cost >= best:
            return
        if v in g.accepting:
            if v not in cycle_cost:
                cycle_cost[v] = cycle(v)
            best = min(best, cost + cycle_cost[v])
        for nxt, w in order[v]:
            if nxt in toward and nxt not in on_path:
                on_path.add(nxt)
                paths(nxt, on_path, cost + w)
                on_path.discard(nxt)

    lasso_ends = [f for f in g.accepting if f in reaching(u for u, _ in g.pred[f])]
    toward = reaching(lasso_ends)
    for s in g.initial:
        if s in toward:
            paths(s, {s}, 0.0)
    return None if best == math.inf else best
