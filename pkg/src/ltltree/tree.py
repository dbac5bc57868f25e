"""Sampling-based tree over the implicit product automaton.

One iteration draws a tree node, moves every robot to a random one-hop
successor, and then sweeps all automaton states ``b`` for the resulting
team position ``p``: a candidate ``(p, b)`` already in the tree triggers a
rewire around it, otherwise it is attached to its cheapest feasible parent
(and then rewired around) or rejected.

Nodes are identified by insertion index; the root is node 0. Costs are sums
of PTS edge weights along the parent chain and are kept exact: after a
reparent the subtree is re-summed from the new parent instead of shifted by
a delta.

Once an iteration changes nothing, the tree may already be a fixed point:
closed under product successors with no strictly cheaper parent anywhere.
That is checked occasionally and, when it holds, the remaining iterations
only draw their samples (in one batch, consuming the generator exactly as
the slow path would) to fill in the statistics.
"""

from __future__ import annotations

import csv
import io
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Protocol

import numpy as np

from .automaton import Nba
from .errors import DuplicateNode
from .model import MultiRobotModel, PtsState, pts_label, pts_weight
from .product import ProductState, pba_transition

__all__ = [
    "Distribution", "Uniform", "UNIFORM", "SamplerConfig", "PlannerTree",
    "TreeStats", "TreeResult", "PrefixGoal", "SuffixGoal", "sample", "extend",
    "rewire", "find_path", "construct_tree", "tree_rng", "check_tree",
    "growth_violations", "STATS_HEADER",
]


# ------------------------------------------------------------ sampling

class Distribution(Protocol):
    """Maps a uniform draw ``u`` in [0, 1) to an index in ``range(n)``.

    Implementations must give every index positive probability.
    """

    full_support: bool

    def index(self, u: float, n: int) -> int: ...

    def indices(self, u: np.ndarray, n: np.ndarray) -> np.ndarray: ...


class Uniform:
    full_support = True

    def index(self, u: float, n: int) -> int:
        return min(int(u * n), n - 1)

    def indices(self, u, n):
        return np.minimum((u * n).astype(np.int64), np.asarray(n) - 1)

    def __repr__(self):
        return "Uniform()"


UNIFORM = Uniform()


@dataclass(frozen=True)
class SamplerConfig:
    seed: int = 0
    rand_dist: Distribution = UNIFORM   # over tree nodes
    new_dist: Distribution = UNIFORM    # per robot, over one-hop successors
    fast_forward: bool = True           # batch the iterations after a fixed point
    check_invariants: bool = False      # full invariant check after every operation

    def __post_init__(self):
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 unsigned bits")
        for d in (self.rand_dist, self.new_dist):
            if not getattr(d, "full_support", False):
                raise ValueError(f"{d!r} does not declare full support")


def tree_rng(seed: int, *stream: int) -> np.random.Generator:
    """Independent generator for one tree build, keyed by ``stream``."""
    return np.random.Generator(np.random.PCG64(
        np.random.SeedSequence(seed, spawn_key=tuple(stream))))


# --------------------------------------------------------------- goals

class PrefixGoal:
    """Product states whose automaton component is accepting."""

    def __init__(self, nba: Nba):
        self.accepting = nba.accepting

    def __call__(self, q: ProductState) -> bool:
        return q.buchi in self.accepting

    def closing_cost(self, q: ProductState) -> float:
        return 0.0


class SuffixGoal:
    """Product states with a one-hop transition back to ``root``; the closing
    edge weight counts towards the cycle cost."""

    def __init__(self, model: MultiRobotModel, nba: Nba, root: ProductState):
        self.model, self.nba, self.root = model, nba, root

    def __call__(self, q: ProductState) -> bool:
        return pba_transition(self.model, self.nba, q, self.root)

    def closing_cost(self, q: ProductState) -> float:
        return pts_weight(self.model, q.pts, self.root.pts)


# ---------------------------------------------------------------- tree

class PlannerTree:
    """Tree of product states with exact path costs."""

    def __init__(self, model: MultiRobotModel, nba: Nba, root: ProductState):
        self.model, self.nba = model, nba
        self.n_buchi = len(nba)
        self.states: list[ProductState] = []
        self.index: dict[ProductState, int] = {}
        self.parent: list[int] = []
        self.children: list[list[int]] = []
        self.cost: list[float] = []
        self.edge_weight: list[float] = []   # weight of the edge from the parent
        self.node_pts: list[int] = []         # node -> distinct-PTS id
        # distinct PTS states present in the tree
        self._pts_ids: dict[PtsState, int] = {}
        self._pts: list[PtsState] = []
        self._pts_arr = np.zeros((16, model.n_robots), dtype=np.intp)
        self._node_at: list[list[int]] = []   # pts id -> node per automaton state, -1 if absent
        self._succ_tab: list[tuple] = []      # pts id -> automaton successor table under its label
        self._pred_tab: list[tuple] = []
        self._add(ProductState(tuple(root.pts), root.buchi), -1, 0.0)

    root = 0

    def __len__(self):
        return len(self.states)

    @property
    def num_edges(self) -> int:
        return sum(len(c) for c in self.children)

    def __contains__(self, q) -> bool:
        return q in self.index

    def _pts_id(self, p: PtsState) -> int:
        pid = self._pts_ids.get(p)
        if pid is None:
            pid = len(self._pts)
            self._pts_ids[p] = pid
            self._pts.append(p)
            if pid == len(self._pts_arr):
                self._pts_arr = np.concatenate([self._pts_arr, np.zeros_like(self._pts_arr)])
            self._pts_arr[pid] = p
            self._node_at.append([-1] * self.n_buchi)
            label = pts_label(self.model, p)
            self._succ_tab.append(self.nba.successor_table(label))
            self._pred_tab.append(self.nba.predecessor_table(label))
        return pid

    def _add(self, q: ProductState, parent: int, weight: float) -> int:
        v = len(self.states)
        pid = self._pts_id(q.pts)
        self.states.append(q)
        self.index[q] = v
        self._node_at[pid][q.buchi] = v
        self.node_pts.append(pid)
        self.children.append([])
        self.edge_weight.append(weight)
        if parent < 0:
            self.parent.append(v)
            self.cost.append(0.0)
        else:
            self.parent.append(parent)
            self.children[parent].append(v)
            self.cost.append(self.cost[parent] + weight)
        return v

    # -- neighbourhood scan over the distinct PTS states in the tree

    def neighbours(self, p: PtsState):
        """(predecessors, successors) of ``p`` among tree PTS states, each a
        list of ``(pts id, edge weight)`` in pts-id order."""
        m = len(self._pts)
        arr = self._pts_arr[:m]
        into = np.ones(m, dtype=bool)
        out = np.ones(m, dtype=bool)
        w_in = np.zeros(m)
        w_out = np.zeros(m)
        for i, r in enumerate(self.model.robots):
            col = arr[:, i]
            into &= r.adjacency[col, p[i]]
            out &= r.adjacency[p[i], col]
            w_in += r.weights[col, p[i]]
            w_out += r.weights[p[i], col]
        pi = np.flatnonzero(into)
        po = np.flatnonzero(out)
        return (list(zip(pi.tolist(), w_in[pi].tolist())),
                list(zip(po.tolist(), w_out[po].tolist())))

    def _self_weight(self, p: PtsState):
        total = 0.0
        for r, s in zip(self.model.robots, p):
            if not r.adjacency[s, s]:
                return None
            total += float(r.weights[s, s])
        return total

    # -- the two tree operations

    def extend(self, q: ProductState, preds=None):
        """Attach ``q`` to its cheapest parent; None when no tree node has a
        product transition into it. Ties go to the smaller node index."""
        if q in self.index:
            raise DuplicateNode(f"{q} is already in the tree")
        if preds is None:
            preds = self._preds_with_self(q.pts)
        b = q.buchi
        best, best_cost, best_w = -1, math.inf, 0.0
        cost = self.cost
        for pid, w in preds:
            row = self._node_at[pid]
            for b2 in self._pred_tab[pid][b]:
                u = row[b2]
                if u >= 0:
                    c = cost[u] + w
                    if c < best_cost or (c == best_cost and u < best):
                        best, best_cost, best_w = u, c, w
        if best < 0:
            return None
        return self._add(q, best, best_w)

    def rewire(self, v: int, succs=None) -> int:
        """Reparent every tree node that is strictly cheaper to reach
        through ``v``; returns how many were reparented."""
        p, b = self.states[v]
        if succs is None:
            succs = self._succs_with_self(p)
        targets = self._succ_tab[self.node_pts[v]][b]
        if not targets:
            return 0
        cost = self.cost
        cv = cost[v]
        found = []
        for pid, w in succs:
            row = self._node_at[pid]
            c = cv + w
            for b2 in targets:
                u = row[b2]
                if u > 0 and u != v and cost[u] > c:
                    found.append((u, w))
        if not found:
            return 0
        found.sort()
        count = 0
        for u, w in found:
            c = cv + w
            if cost[u] > c:  # an earlier reparent may already have lowered it
                self._reparent(u, v, w)
                count += 1
        return count

    def _reparent(self, u: int, v: int, w: float) -> None:
        self.children[self.parent[u]].remove(u)
        self.children[v].append(u)
        self.parent[u] = v
        self.edge_weight[u] = w
        cost, ew, children = self.cost, self.edge_weight, self.children
        cost[u] = cost[v] + w
        stack = list(children[u])
        while stack:
            x = stack.pop()
            cost[x] = cost[self.parent[x]] + ew[x]
            stack.extend(children[x])

    def _preds_with_self(self, p):
        preds, _ = self.neighbours(p)
        return preds

    def _succs_with_self(self, p):
        _, succs = self.neighbours(p)
        return succs

    # -- queries

    def path_to(self, v: int) -> list[ProductState]:
        chain = [v]
        for _ in range(len(self.states)):
            if chain[-1] == self.root:
                break
            chain.append(self.parent[chain[-1]])
        else:
            raise RuntimeError("parent chain does not reach the root")
        return [self.states[x] for x in reversed(chain)]

    def is_fixed_point(self) -> bool:
        """Closed under product successors and no node has a strictly
        cheaper parent available, so further iterations change nothing."""
        model = self.model
        for pid, p in enumerate(self._pts):
            row = self._node_at[pid]
            tab = self._succ_tab[pid]
            present = [(v, tab[b]) for b, v in enumerate(row) if v >= 0 and tab[b]]
            if not present:
                continue
            for p2 in model.pts_successors(p):
                pid2 = self._pts_ids.get(p2)
                if pid2 is None:
                    return False
                row2 = self._node_at[pid2]
                w = pts_weight(model, p, p2)
                for v, targets in present:
                    c = self.cost[v] + w
                    for b2 in targets:
                        u = row2[b2]
                        if u < 0:
                            return False
                        if u > 0 and u != v and self.cost[u] > c:
                            return False
        return True


def sample(tree: PlannerTree, model: MultiRobotModel, cfg: SamplerConfig,
           rng: np.random.Generator):
    """Draw a team position one hop away from a random tree node.

    Returns ``(q_rand node index, new PTS state or None)``; None means some
    robot has nowhere to go. Always consumes ``1 + N`` uniforms.
    """
    u = rng.random(1 + model.n_robots)
    return _sample_from(tree, model, cfg, u)


def _sample_from(tree, model, cfg, u):
    v = cfg.rand_dist.index(float(u[0]), len(tree))
    p = tree.states[v].pts
    new = []
    for i, (r, s) in enumerate(zip(model.robots, p)):
        options = r.succ[s]
        if not options:
            return v, None
        new.append(options[cfg.new_dist.index(float(u[1 + i]), len(options))])
    return v, tuple(new)


def extend(tree: PlannerTree, q_new: ProductState, model=None, nba=None):
    """Module-level form of :meth:`PlannerTree.extend`."""
    return tree.extend(ProductState(tuple(q_new[0]), q_new[1]))


def rewire(tree: PlannerTree, q_new: ProductState, model=None, nba=None) -> int:
    return tree.rewire(tree.index[ProductState(tuple(q_new[0]), q_new[1])])


def find_path(tree: PlannerTree, goal: int) -> list[ProductState]:
    return tree.path_to(goal)


# --------------------------------------------------------------- stats

STATS_HEADER = ["iteration", "tree_size", "rejected", "extended", "rewired",
                "best_goal_cost", "elapsed_ms"]


@dataclass
class TreeStats:
    """Per-iteration counters, one array entry per iteration."""

    tree_size: np.ndarray
    rejected: np.ndarray
    extended: np.ndarray
    rewired: np.ndarray
    present: np.ndarray        # candidates already in the tree (rewire branch)
    rand_has_moves: np.ndarray # the drawn node has a non-empty product successor set
    best_goal_cost: np.ndarray
    elapsed_ms: np.ndarray
    fixed_point_at: int = -1   # first iteration served by the batch path

    @classmethod
    def empty(cls, n: int):
        z = lambda dt: np.zeros(n, dtype=dt)
        return cls(z(np.int64), z(np.int32), z(np.int32), z(np.int64), z(np.int32),
                   z(bool), np.full(n, math.inf), z(np.float64))

    def __len__(self):
        return len(self.tree_size)

    def write_csv(self, out, tree_label: str | None = None, timings: bool = False):
        w = csv.writer(out, lineterminator="\n")
        for k in range(len(self)):
            best = self.best_goal_cost[k]
            row = [k + 1, int(self.tree_size[k]), int(self.rejected[k]),
                   int(self.extended[k]), int(self.rewired[k]),
                   "inf" if math.isinf(best) else repr(float(best)),
                   f"{self.elapsed_ms[k]:.3f}" if timings else ""]
            w.writerow(([tree_label] if tree_label is not None else []) + row)

    def to_csv(self, timings: bool = False) -> str:
        buf = io.StringIO()
        csv.writer(buf, lineterminator="\n").writerow(STATS_HEADER)
        self.write_csv(buf, timings=timings)
        return buf.getvalue()


def growth_violations(stats: TreeStats, n_buchi: int) -> list[int]:
    """Iterations breaking the growth guarantee: a drawn node with product
    successors must yield at least one attached or already-present
    candidate, and at most ``n_buchi`` candidates are examined."""
    bad = (stats.rand_has_moves & (stats.extended + stats.present == 0))
    bad |= (stats.rejected + stats.extended + stats.present) > n_buchi
    return (np.flatnonzero(bad) + 1).tolist()


@dataclass
class TreeResult:
    tree: PlannerTree
    goals: list[int]
    stats: TreeStats
    goal_costs: dict[int, float] = field(default_factory=dict)


# -------------------------------------------------------- construction

def construct_tree(goal: Callable[[ProductState], bool], model: MultiRobotModel,
                   nba: Nba, root: ProductState, n_max: int, cfg: SamplerConfig,
                   rng: np.random.Generator | None = None) -> TreeResult:
    """Grow a tree for exactly ``n_max`` iterations from ``root``.

    ``goal`` selects goal nodes; if it has a ``closing_cost`` method, the
    reported best goal cost includes it.
    """
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    if rng is None:
        rng = tree_rng(cfg.seed)
    tree = PlannerTree(model, nba, root)
    closing = getattr(goal, "closing_cost", lambda q: 0.0)
    goals: list[int] = []
    goal_extra: list[float] = []

    def note_goal(v):
        q = tree.states[v]
        if goal(q):
            goals.append(v)
            goal_extra.append(closing(q))

    note_goal(0)
    stats = TreeStats.empty(n_max)
    n_robots, n_buchi = model.n_robots, tree.n_buchi
    best = min((tree.cost[v] + e for v, e in zip(goals, goal_extra)), default=math.inf)
    idle, patience = 0, 32
    start = time.perf_counter()
    check = check_tree if cfg.check_invariants else None

    n = 0
    while n < n_max:
        if cfg.fast_forward and idle >= patience:
            idle = 0
            if tree.is_fixed_point():
                _fast_forward(tree, model, cfg, rng, stats, n, best, start)
                stats.fixed_point_at = n + 1
                break
            patience = min(patience * 2, 4096)

        u = rng.random(1 + n_robots)
        v_rand, p_new = _sample_from(tree, model, cfg, u)
        rejected = extended = rewired = present = 0
        if p_new is not None:
            q_rand = tree.states[v_rand]
            stats.rand_has_moves[n] = bool(
                tree._succ_tab[tree.node_pts[v_rand]][q_rand.buchi])
            preds, succs = tree.neighbours(p_new)
            pid = tree._pts_ids.get(p_new)
            self_w = None if pid is not None else tree._self_weight(p_new)
            for b in range(n_buchi):
                q_new = ProductState(p_new, b)
                v = tree.index.get(q_new)
                if v is not None:
                    present += 1
                    rewired += tree.rewire(v, succs)
                else:
                    v = tree.extend(q_new, preds)
                    if v is None:
                        rejected += 1
                        continue
                    extended += 1
                    note_goal(v)
                    if pid is None:
                        pid = tree.node_pts[v]
                        if self_w is not None:
                            preds.append((pid, self_w))
                            succs.append((pid, self_w))
                    rewired += tree.rewire(v, succs)
                if check is not None:
                    check(tree)
            if extended or rewired:
                best = min((tree.cost[g] + e for g, e in zip(goals, goal_extra)),
                           default=math.inf)
        stats.tree_size[n] = len(tree)
        stats.rejected[n] = rejected
        stats.extended[n] = extended
        stats.rewired[n] = rewired
        stats.present[n] = present
        stats.best_goal_cost[n] = best
        stats.elapsed_ms[n] = (time.perf_counter() - start) * 1e3
        idle = 0 if (extended or rewired) else idle + 1
        n += 1

    costs = {g: tree.cost[g] + e for g, e in zip(goals, goal_extra)}
    return TreeResult(tree, goals, stats, costs)


def _fast_forward(tree: PlannerTree, model: MultiRobotModel, cfg: SamplerConfig,
                  rng, stats: TreeStats, n0: int, best: float, start: float) -> None:
    """Fill iterations ``n0..`` of a tree that can no longer change."""
    k = len(stats) - n0
    n_robots, n_buchi = model.n_robots, tree.n_buchi
    u = rng.random((k, 1 + n_robots))  # same stream as k single draws of 1+N
    size = len(tree)
    v_rand = cfg.rand_dist.indices(u[:, 0], np.full(k, size))
    node_pts = np.asarray(tree.node_pts, dtype=np.intp)
    rand_pts = tree._pts_arr[node_pts[v_rand]]
    valid = np.ones(k, dtype=bool)
    new_cols = []
    for i, r in enumerate(model.robots):
        deg = np.array([len(s) for s in r.succ], dtype=np.int64)
        width = max(1, int(deg.max()))
        table = np.zeros((len(r), width), dtype=np.intp)
        for s, succ in enumerate(r.succ):
            table[s, :len(succ)] = succ
        cur = rand_pts[:, i]
        d = deg[cur]
        valid &= d > 0
        pick = cfg.new_dist.indices(u[:, 1 + i], np.maximum(d, 1))
        new_cols.append(table[cur, pick])

    # candidates already present per distinct tree PTS state
    counts = {p: sum(1 for x in tree._node_at[pid] if x >= 0)
              for pid, p in enumerate(tree._pts)}
    present = np.zeros(k, dtype=np.int32)
    new = np.stack(new_cols, axis=1)
    for row in np.flatnonzero(valid):
        present[row] = counts.get(tuple(new[row].tolist()), 0)

    has_moves = np.array([bool(tree._succ_tab[tree.node_pts[v]][q.buchi])
                          for v, q in enumerate(tree.states)])
    sl = slice(n0, None)
    stats.tree_size[sl] = size
    stats.present[sl] = present
    stats.rejected[sl] = np.where(valid, n_buchi - present, 0)
    stats.extended[sl] = 0
    stats.rewired[sl] = 0
    stats.rand_has_moves[sl] = valid & has_moves[v_rand]
    stats.best_goal_cost[sl] = best
    stats.elapsed_ms[sl] = (time.perf_counter() - start) * 1e3


# ----------------------------------------------------------- invariants

def check_tree(tree: PlannerTree) -> None:
    """Raise AssertionError on the first broken structural invariant."""
    n = len(tree)
    assert tree.parent[0] == 0, "root must be its own parent"
    assert tree.cost[0] == 0.0, "root cost must be 0"
    assert tree.num_edges == n - 1, "edge count must be node count - 1"
    for v in range(1, n):
        p = tree.parent[v]
        assert v in tree.children[p], f"node {v} missing from its parent's children"
        qp, qv = tree.states[p], tree.states[v]
        assert pba_transition(tree.model, tree.nba, qp, qv), f"edge {p}->{v} infeasible"
        w = pts_weight(tree.model, qp.pts, qv.pts)
        assert tree.cost[v] == tree.cost[p] + w, f"cost recurrence broken at {v}"
    depth = [-1] * n
    depth[0] = 0
    for v in range(1, n):
        chain = []
        x = v
        while depth[x] < 0:
            chain.append(x)
            x = tree.parent[x]
            assert len(chain) <= n, "parent pointers form a cycle"
        for y in reversed(chain):
            depth[y] = depth[tree.parent[y]] + 1
    for q, v in tree.index.items():
        assert tree.states[v] == q
