"""Prefix-suffix plan synthesis on top of the tree planner.

Plan layout: ``prefix`` runs from the initial team position to the
accepting product state's position ``q_K`` inclusive; ``suffix`` is one
traversal of the cycle that starts right after ``q_K`` and ends back at
``q_K``. The infinite execution is ``prefix, suffix, suffix, ...`` and its
label trace is the lasso word ``trace(prefix) . trace(suffix)^omega``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .automaton import Nba, nba_accepts_lasso
from .ltl import LassoWord
from .model import MultiRobotModel, PtsState, pts_label, pts_transition, pts_weight
from .product import ProductState, pba_transition, pba_weight
from .tree import (PrefixGoal, SamplerConfig, SuffixGoal, TreeResult,
                   construct_tree, tree_rng)

__all__ = ["Plan", "NoPlanFound", "Synthesis", "synthesize", "synthesize_detailed",
           "validate_plan", "find_plan_violation", "plan_to_json", "plan_from_json",
           "plan_costs"]

COST_TOLERANCE = 1e-9
PREFIX_STREAM, SUFFIX_STREAM = 0, 1


@dataclass(frozen=True)
class NoPlanFound:
    reason: str

    def __bool__(self):
        return False


@dataclass
class Plan:
    prefix: list[PtsState]
    suffix: list[PtsState]
    prefix_cost: float
    suffix_cost: float
    total_cost: float
    provenance: dict = field(default_factory=dict)
    product_prefix: list[ProductState] = field(default_factory=list)
    product_suffix: list[ProductState] = field(default_factory=list)

    def lasso_word(self, model: MultiRobotModel) -> LassoWord:
        return LassoWord(tuple(pts_label(model, q) for q in self.prefix),
                         tuple(pts_label(model, q) for q in self.suffix))


def plan_costs(model: MultiRobotModel, prefix, suffix) -> tuple[float, float]:
    """Re-sum path costs: the prefix from its first state, the suffix as one
    lap starting and ending at ``suffix[-1]``."""
    pre = 0.0
    for a, b in zip(prefix, prefix[1:]):
        pre += pts_weight(model, a, b)
    lap = [suffix[-1], *suffix]
    suf = 0.0
    for a, b in zip(lap, lap[1:]):
        suf += pts_weight(model, a, b)
    return pre, suf


def find_plan_violation(model: MultiRobotModel, nba: Nba, plan: Plan) -> str | None:
    """Describe the first broken plan invariant, or None if the plan is sound."""
    if not plan.prefix or not plan.suffix:
        return "prefix and suffix must be non-empty"
    if tuple(plan.prefix[0]) != model.initial:
        return "prefix does not start at the initial team position"
    for k, (a, b) in enumerate(zip(plan.prefix, plan.prefix[1:])):
        if not pts_transition(model, a, b):
            return f"prefix step {k} -> {k + 1} is not a transition"
    if not pts_transition(model, plan.prefix[-1], plan.suffix[0]):
        return "prefix end does not connect to suffix start"
    for k, (a, b) in enumerate(zip(plan.suffix, plan.suffix[1:])):
        if not pts_transition(model, a, b):
            return f"suffix step {k} -> {k + 1} is not a transition"
    if not pts_transition(model, plan.suffix[-1], plan.suffix[0]):
        return "suffix end does not wrap to suffix start"
    pre, suf = plan_costs(model, plan.prefix, plan.suffix)
    if not abs(pre - plan.prefix_cost) <= COST_TOLERANCE:
        return f"prefix cost {plan.prefix_cost} differs from re-summed {pre}"
    if not abs(suf - plan.suffix_cost) <= COST_TOLERANCE:
        return f"suffix cost {plan.suffix_cost} differs from re-summed {suf}"
    if plan.total_cost != plan.prefix_cost + plan.suffix_cost:
        return "total cost is not prefix cost + suffix cost"
    if not nba_accepts_lasso(nba, plan.lasso_word(model)):
        return "label trace is not accepted by the automaton"
    return None


def validate_plan(model: MultiRobotModel, nba: Nba, plan: Plan) -> bool:
    return find_plan_violation(model, nba, plan) is None


@dataclass
class Synthesis:
    """A synthesis run with its trees kept for reporting."""

    plan: Plan | NoPlanFound
    prefix_runs: dict[int, TreeResult]                   # initial automaton state -> run
    suffix_runs: dict[tuple[int, int], TreeResult]       # (initial state, accepting node) -> run
    shortcuts: list[tuple[int, int]] = field(default_factory=list)


def synthesize(model: MultiRobotModel, nba: Nba, n_pre: int, n_suf: int,
               cfg: SamplerConfig = SamplerConfig()) -> Plan | NoPlanFound:
    return synthesize_detailed(model, nba, n_pre, n_suf, cfg).plan


def synthesize_detailed(model: MultiRobotModel, nba: Nba, n_pre: int, n_suf: int,
                        cfg: SamplerConfig = SamplerConfig()) -> Synthesis:
    if n_pre < 1 or n_suf < 1:
        raise ValueError("iteration budgets must be at least 1")
    prefix_goal = PrefixGoal(nba)
    result = Synthesis(NoPlanFound("no accepting product state reached"), {}, {})
    best = None  # (J, plan)
    found_accepting = False

    for k, b0 in enumerate(nba.initial):
        root = ProductState(model.initial, b0)
        pre = construct_tree(prefix_goal, model, nba, root, n_pre, cfg,
                             tree_rng(cfg.seed, PREFIX_STREAM, k))
        result.prefix_runs[b0] = pre
        tree = pre.tree
        for a in pre.goals:
            found_accepting = True
            acc = tree.states[a]
            suffix = _best_suffix(model, nba, acc, n_suf, cfg, k, a, result, b0)
            if suffix is None:
                continue
            suf_cost, product_suffix, endpoint = suffix
            total = tree.cost[a] + suf_cost
            if best is None or total < best[0]:
                product_prefix = tree.path_to(a)
                plan = Plan(
                    prefix=[q.pts for q in product_prefix],
                    suffix=[q.pts for q in product_suffix],
                    prefix_cost=tree.cost[a],
                    suffix_cost=suf_cost,
                    total_cost=total,
                    provenance={"initial_buchi": b0, "accepting_node": a,
                                "accepting_state": acc, "suffix_endpoint": endpoint,
                                "shortcut": endpoint is None},
                    product_prefix=product_prefix,
                    product_suffix=product_suffix,
                )
                best = (total, plan)

    if best is None:
        if found_accepting:
            result.plan = NoPlanFound("no accepting product state admits a suffix")
        return result
    problem = find_plan_violation(model, nba, best[1])
    if problem is not None:
        raise RuntimeError(f"synthesized plan failed validation: {problem}")
    result.plan = best[1]
    return result


def _best_suffix(model, nba, acc: ProductState, n_suf, cfg, k, a, result, b0):
    """Cheapest cycle back to ``acc``: (cost, product states, endpoint)."""
    if pba_transition(model, nba, acc, acc) and pba_weight(model, nba, acc, acc) == 0:
        result.shortcuts.append((b0, a))
        return 0.0, [acc], None
    run = construct_tree(SuffixGoal(model, nba, acc), model, nba, acc, n_suf, cfg,
                         tree_rng(cfg.seed, SUFFIX_STREAM, k, a))
    result.suffix_runs[(b0, a)] = run
    best_e, best_c = -1, math.inf
    for e in run.goals:
        c = run.goal_costs[e]
        if c < best_c or (c == best_c and e < best_e):
            best_e, best_c = e, c
    if best_e < 0:
        return None
    path = run.tree.path_to(best_e)
    endpoint = run.tree.states[best_e]
    return best_c, path[1:] + [path[0]], endpoint


# ------------------------------------------------------------------ JSON

def _product_json(model, nba, q: ProductState) -> dict:
    return {"pts": model.region_names(q.pts), "buchi": nba.states[q.buchi]}


def plan_to_json(model: MultiRobotModel, nba: Nba, plan: Plan, extra=None) -> str:
    prov = dict(plan.provenance)
    for key in ("accepting_state", "suffix_endpoint"):
        if isinstance(prov.get(key), ProductState):
            prov[key] = _product_json(model, nba, prov[key])
    if isinstance(prov.get("initial_buchi"), int):
        prov["initial_buchi"] = nba.states[prov["initial_buchi"]]
    doc = {
        "prefix": [model.region_names(q) for q in plan.prefix],
        "suffix": [model.region_names(q) for q in plan.suffix],
        "prefix_cost": plan.prefix_cost,
        "suffix_cost": plan.suffix_cost,
        "total_cost": plan.total_cost,
        "provenance": prov,
        "product_prefix": [_product_json(model, nba, q) for q in plan.product_prefix],
        "product_suffix": [_product_json(model, nba, q) for q in plan.product_suffix],
    }
    if extra:
        doc.update(extra)
    return json.dumps(doc, indent=1) + "\n"


def plan_from_json(model: MultiRobotModel, nba: Nba, text: str) -> Plan:
    doc = json.loads(text)
    index = [{s: k for k, s in enumerate(r.states)} for r in model.robots]
    names = {s: k for k, s in enumerate(nba.states)}

    def pts(regions):
        return tuple(index[i][s] for i, s in enumerate(regions))

    def prod(entry):
        return ProductState(pts(entry["pts"]), names[entry["buchi"]])

    return Plan(
        prefix=[pts(r) for r in doc["prefix"]],
        suffix=[pts(r) for r in doc["suffix"]],
        prefix_cost=float(doc["prefix_cost"]),
        suffix_cost=float(doc["suffix_cost"]),
        total_cost=float(doc["total_cost"]),
        provenance=doc.get("provenance", {}),
        product_prefix=[prod(e) for e in doc.get("product_prefix", [])],
        product_suffix=[prod(e) for e in doc.get("product_suffix", [])],
    )
