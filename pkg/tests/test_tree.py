import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ltltree.automaton import parse_nba
from ltltree.errors import DuplicateNode
from ltltree.ltl import TRUE
from ltltree.model import load_model, pts_weight
from ltltree.product import ProductState, pba_successors
from ltltree.scenarios import random_instance
from ltltree.translate import ltl_to_nba
from ltltree.tree import (PlannerTree, PrefixGoal, SamplerConfig, TreeStats,
                          check_tree, construct_tree, extend, find_path,
                          growth_violations, rewire, sample, tree_rng)

from helpers import nba_for

P = ProductState
ANYTHING = ltl_to_nba(TRUE)


def model_from_edges(edges, states, start):
    return load_model(json.dumps({"robots": [
        {"id": 1, "states": states, "initial": start,
         "edges": [[a, b, w] for a, b, w in edges]}]}))


def quiet_model(edges, states, start):
    import warnings
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return model_from_edges(edges, states, start)


def idx(model, name):
    return model.robots[0].states.index(name)


def node(model, name):
    return P((idx(model, name),), 0)


class TestExtend:
    def setup_method(self):
        self.m = quiet_model([("s", "A", 5.0), ("s", "B", 2.0), ("A", "T", 1.0),
                              ("B", "T", 3.0), ("s", "U", 1.0)],
                             ["s", "A", "B", "T", "U"], "s")
        self.tree = PlannerTree(self.m, ANYTHING, node(self.m, "s"))

    def test_no_parent(self):
        assert extend(self.tree, node(self.m, "T")) is None
        assert len(self.tree) == 1

    def test_single_candidate(self):
        v = extend(self.tree, node(self.m, "B"))
        assert (v, self.tree.cost[v], self.tree.parent[v]) == (1, 2.0, 0)

    def test_argmin(self):
        a = extend(self.tree, node(self.m, "A"))   # cost 5, edge to T 1 -> 6
        b = extend(self.tree, node(self.m, "B"))   # cost 2, edge to T 3 -> 5
        t = extend(self.tree, node(self.m, "T"))
        assert self.tree.parent[t] == b and self.tree.cost[t] == 5.0
        assert a < b

    def test_duplicate(self):
        with pytest.raises(DuplicateNode):
            extend(self.tree, node(self.m, "s"))

    def test_tie_goes_to_older_node(self):
        m = quiet_model([("s", "A", 2.0), ("s", "B", 1.0), ("A", "T", 1.0), ("B", "T", 2.0)],
                        ["s", "A", "B", "T"], "s")
        for order in (("A", "B"), ("B", "A")):
            tree = PlannerTree(m, ANYTHING, node(m, "s"))
            first, second = (extend(tree, node(m, x)) for x in order)
            t = extend(tree, node(m, "T"))
            assert tree.cost[t] == 3.0
            assert tree.parent[t] == first


class TestRewire:
    def build(self, via_weight):
        m = quiet_model([("r", "X", 10.0), ("r", "N", 4.0), ("N", "X", via_weight),
                         ("X", "Y", 1.0), ("Y", "Z", 0.5)], ["r", "X", "Y", "Z", "N"], "r")
        tree = PlannerTree(m, ANYTHING, node(m, "r"))
        x = extend(tree, node(m, "X"))
        y = extend(tree, node(m, "Y"))
        z = extend(tree, node(m, "Z"))
        n = extend(tree, node(m, "N"))
        return m, tree, x, y, z, n

    def test_reparent_and_propagate(self):
        m, tree, x, y, z, n = self.build(3.0)
        before = list(tree.cost)
        assert rewire(tree, tree.states[n]) == 1
        assert tree.parent[x] == n and tree.cost[x] == 7.0
        assert tree.cost[y] == before[y] - 3.0 and tree.cost[z] == before[z] - 3.0
        assert x not in tree.children[0] and x in tree.children[n]
        check_tree(tree)

    def test_equal_cost_does_not_rewire(self):
        m, tree, x, y, z, n = self.build(6.0)
        assert rewire(tree, tree.states[n]) == 0
        assert tree.parent[x] == 0

    def test_root_never_reparented(self):
        m = quiet_model([("r", "r", 0.0), ("r", "a", 0.0), ("a", "r", 0.0), ("a", "a", 0.0)],
                        ["r", "a"], "r")
        tree = PlannerTree(m, ANYTHING, node(m, "r"))
        a = extend(tree, node(m, "a"))
        assert rewire(tree, tree.states[a]) == 0
        assert tree.parent[0] == 0 and tree.cost[0] == 0.0


class TestFindPath:
    def test_root(self):
        m = quiet_model([("r", "a", 1.0)], ["r", "a"], "r")
        tree = PlannerTree(m, ANYTHING, node(m, "r"))
        assert find_path(tree, 0) == [node(m, "r")]

    def test_chain_and_cost(self):
        m = quiet_model([("r", "a", 1.25), ("a", "b", 2.5)], ["r", "a", "b"], "r")
        tree = PlannerTree(m, ANYTHING, node(m, "r"))
        extend(tree, node(m, "a"))
        b = extend(tree, node(m, "b"))
        path = find_path(tree, b)
        assert path == [node(m, "r"), node(m, "a"), node(m, "b")]
        assert sum(pts_weight(m, p.pts, q.pts) for p, q in zip(path, path[1:])) == tree.cost[b]


class TestSample:
    def test_singleton_supports(self):
        m = quiet_model([("a", "b", 1.0)], ["a", "b"], "a")
        tree = PlannerTree(m, ANYTHING, node(m, "a"))
        v, p = sample(tree, m, SamplerConfig(), tree_rng(3))
        assert (v, p) == (0, (idx(m, "b"),))

    def test_dead_end(self):
        m = quiet_model([("a", "b", 1.0)], ["a", "b"], "b")
        tree = PlannerTree(m, ANYTHING, node(m, "b"))
        assert sample(tree, m, SamplerConfig(), tree_rng(3))[1] is None

    def test_repeatable(self):
        inst = random_instance(4)
        r = construct_tree(PrefixGoal(inst.nba), inst.model, inst.nba,
                           P(inst.model.initial, inst.nba.initial[0]), 50, SamplerConfig())
        draws = [sample(r.tree, inst.model, SamplerConfig(), tree_rng(9, 1)) for _ in range(3)]
        assert draws[0] == draws[1] == draws[2]

    def test_uniform_over_nodes(self):
        # a ten-node chain; each node should be drawn about 1/10 of the time
        names = [f"s{k}" for k in range(10)]
        m = quiet_model([(a, b, 1.0) for a, b in zip(names, names[1:])] + [("s9", "s9", 0.0)],
                        names, "s0")
        tree = PlannerTree(m, ANYTHING, node(m, "s0"))
        for name in names[1:]:
            extend(tree, node(m, name))
        rng = tree_rng(2024)
        draws = 10**5
        counts = np.zeros(10, dtype=int)
        for _ in range(draws):
            counts[sample(tree, m, SamplerConfig(), rng)[0]] += 1
        sigma = math.sqrt(draws * 0.1 * 0.9)
        assert np.all(np.abs(counts - draws / 10) <= 3 * sigma), counts

    def test_config_rejects_partial_support(self):
        class Bad:
            full_support = False

            def index(self, u, n):
                return 0

        with pytest.raises(ValueError):
            SamplerConfig(rand_dist=Bad())


class TestConstruct:
    def test_single_iteration(self):
        m = quiet_model([("l1", "l2", 1.0)], ["l1", "l2"], "l1")
        nba = parse_nba("states: go seen\ninitial: go\naccepting: seen\nalphabet: r1@l2\n"
                        "go -- !r1@l2 --> go\ngo -- r1@l2 --> seen\nseen -- true --> seen\n")
        r = construct_tree(PrefixGoal(nba), m, nba, P((0,), 0), 1, SamplerConfig(seed=5))
        assert len(r.tree) == 2
        assert r.tree.states[1] == P((1,), 0)
        assert (r.stats.extended[0], r.stats.rejected[0]) == (1, 1)
        assert r.goals == []

    def test_unsatisfiable_has_no_goals(self):
        inst = random_instance(1)
        nba = nba_for("F r1@l1 & G !r1@l1")
        for n in (1, 50, 400):
            r = construct_tree(PrefixGoal(nba), inst.model, nba,
                               P(inst.model.initial, nba.initial[0]), n, SamplerConfig())
            assert r.goals == []
            assert np.all(np.isinf(r.stats.best_goal_cost))

    def test_rejects_zero_budget(self):
        inst = random_instance(1)
        with pytest.raises(ValueError):
            construct_tree(PrefixGoal(inst.nba), inst.model, inst.nba,
                           P(inst.model.initial, 0), 0, SamplerConfig())

    def test_stats_csv(self):
        inst = random_instance(2)
        r = construct_tree(PrefixGoal(inst.nba), inst.model, inst.nba,
                           P(inst.model.initial, inst.nba.initial[0]), 5, SamplerConfig())
        lines = r.stats.to_csv().splitlines()
        assert lines[0] == "iteration,tree_size,rejected,extended,rewired,best_goal_cost,elapsed_ms"
        assert len(lines) == 6 and lines[1].startswith("1,")
        assert lines[1].endswith(",")  # timings are opt-in


def run(inst, n, seed, fast=True, check=False):
    cfg = SamplerConfig(seed=seed, fast_forward=fast, check_invariants=check)
    return construct_tree(PrefixGoal(inst.nba), inst.model, inst.nba,
                          P(inst.model.initial, inst.nba.initial[0]), n, cfg,
                          tree_rng(seed, 0, 0))


@settings(max_examples=12, deadline=None)
@given(st.integers(0, 10**6), st.integers(0, 2**32))
def test_fast_forward_changes_nothing(inst_seed, seed):
    inst = random_instance(inst_seed, max_product=600, require_plan=False)
    a, b = run(inst, 1500, seed, fast=True), run(inst, 1500, seed, fast=False)
    assert a.tree.states == b.tree.states
    assert a.tree.parent == b.tree.parent and a.tree.cost == b.tree.cost
    assert a.goals == b.goals
    for name in ("tree_size", "rejected", "extended", "rewired", "present",
                 "rand_has_moves", "best_goal_cost"):
        assert np.array_equal(getattr(a.stats, name), getattr(b.stats, name)), name


def test_fast_forward_triggers():
    inst = random_instance(0)
    assert run(inst, 3000, 1).stats.fixed_point_at > 0


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10**6), st.integers(0, 2**32))
def test_iteration_properties(inst_seed, seed):
    inst = random_instance(inst_seed, max_product=500, require_plan=False)
    r = run(inst, 300, seed, check=True)
    best = r.stats.best_goal_cost
    assert np.all(best[1:] <= best[:-1])
    assert np.all(np.diff(r.stats.tree_size) >= 0)
    assert growth_violations(r.stats, len(inst.nba)) == []
    assert (r.stats.rejected + r.stats.extended + r.stats.present <= len(inst.nba)).all()
    # every goal node really satisfies the goal and every tree node is reachable
    for g in r.goals:
        assert inst.nba.accepting.__contains__(r.tree.states[g].buchi)
    for v in range(1, len(r.tree)):
        parent = r.tree.states[r.tree.parent[v]]
        assert r.tree.states[v] in set(pba_successors(inst.model, inst.nba, parent))


def test_deterministic_replay():
    inst = random_instance(7)
    a, b = run(inst, 800, 11), run(inst, 800, 11)
    assert a.tree.states == b.tree.states and a.tree.cost == b.tree.cost
    assert a.stats.to_csv() == b.stats.to_csv()


def test_longer_budget_extends_shorter_run():
    inst = random_instance(8)
    short, long = run(inst, 200, 3, fast=False), run(inst, 900, 3, fast=False)
    assert long.tree.states[:len(short.tree)] == short.tree.states
    for v in range(len(short.tree)):
        assert long.tree.cost[v] <= short.tree.cost[v]


def test_growth_violation_detector():
    stats = TreeStats.empty(2)
    stats.rand_has_moves[:] = True
    stats.extended[0] = 1
    assert growth_violations(stats, 4) == [2]
