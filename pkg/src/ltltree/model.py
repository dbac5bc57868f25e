"""Weighted transition systems for individual robots and the implicit
synchronous product over a team.

A product state is a plain tuple of per-robot state indices.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from itertools import product as cartesian

import numpy as np

from .errors import (DanglingEdge, FormatError, InvalidTransition,
                     MissingInitial, NegativeWeight)

__all__ = ["Wts", "MultiRobotModel", "PtsState", "load_model", "dump_model",
           "pts_transition", "pts_weight", "pts_label", "robot_reachable",
           "MissingSelfLoop"]

PtsState = tuple  # tuple[int, ...], one state index per robot


class MissingSelfLoop(UserWarning):
    """A robot state without a self-loop cannot wait in place."""


@dataclass(frozen=True)
class Wts:
    robot_id: int
    states: tuple[str, ...]
    initial: int
    edges: tuple[tuple[int, int, float], ...]
    labels: tuple[frozenset[str], ...]
    succ: tuple[tuple[int, ...], ...] = field(init=False, repr=False, compare=False)
    adjacency: np.ndarray = field(init=False, repr=False, compare=False)
    weights: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        n = len(self.states)
        succ = [[] for _ in range(n)]
        adj = np.zeros((n, n), dtype=bool)
        wts = np.zeros((n, n), dtype=np.float64)
        for src, dst, w in self.edges:
            succ[src].append(dst)
            adj[src, dst] = True
            wts[src, dst] = w
        adj.setflags(write=False)
        wts.setflags(write=False)
        object.__setattr__(self, "succ", tuple(tuple(s) for s in succ))
        object.__setattr__(self, "adjacency", adj)
        object.__setattr__(self, "weights", wts)

    def __len__(self):
        return len(self.states)

    def weight(self, src: int, dst: int) -> float:
        if not self.adjacency[src, dst]:
            raise InvalidTransition(
                f"robot {self.robot_id}: no edge {self.states[src]} -> {self.states[dst]}")
        return float(self.weights[src, dst])

    @property
    def alphabet(self) -> frozenset[str]:
        return frozenset().union(*self.labels)


@dataclass(frozen=True)
class MultiRobotModel:
    robots: tuple[Wts, ...]

    def __post_init__(self):
        if not self.robots:
            raise FormatError("model needs at least one robot")
        seen: dict[str, int] = {}
        for r in self.robots:
            for a in r.alphabet:
                if a in seen and seen[a] != r.robot_id:
                    raise FormatError(
                        f"atom {a!r} used by robots {seen[a]} and {r.robot_id}")
                seen[a] = r.robot_id

    @property
    def n_robots(self) -> int:
        return len(self.robots)

    @property
    def alphabet(self) -> frozenset[str]:
        return frozenset().union(*(r.alphabet for r in self.robots))

    @property
    def initial(self) -> PtsState:
        return tuple(r.initial for r in self.robots)

    @property
    def n_pts_states(self) -> int:
        return math.prod(len(r) for r in self.robots)

    def region_names(self, q: PtsState) -> list[str]:
        return [r.states[s] for r, s in zip(self.robots, q)]

    def pts_successors(self, q: PtsState):
        """All PTS successors, lexicographic in per-robot edge order."""
        return cartesian(*(r.succ[s] for r, s in zip(self.robots, q)))

    def all_pts_states(self):
        return cartesian(*(range(len(r)) for r in self.robots))

    def encode(self, q: PtsState) -> int:
        """Mixed-radix code, robot 1 most significant."""
        code = 0
        for r, s in zip(self.robots, q):
            code = code * len(r) + s
        return code


def pts_transition(model: MultiRobotModel, q: PtsState, q2: PtsState) -> bool:
    return all(r.adjacency[a, b] for r, a, b in zip(model.robots, q, q2))


def pts_weight(model: MultiRobotModel, q: PtsState, q2: PtsState) -> float:
    """Sum of per-robot edge weights, accumulated in robot order."""
    total = 0.0
    for r, a, b in zip(model.robots, q, q2):
        if not r.adjacency[a, b]:
            raise InvalidTransition(
                f"robot {r.robot_id}: no edge {r.states[a]} -> {r.states[b]}")
        total += float(r.weights[a, b])
    return total


def pts_label(model: MultiRobotModel, q: PtsState) -> frozenset[str]:
    return frozenset().union(*(r.labels[s] for r, s in zip(model.robots, q)))


def robot_reachable(model: MultiRobotModel, i: int, q_i: int) -> set[int]:
    """One-hop successors of robot ``i`` (0-based position in the team)."""
    return set(model.robots[i].succ[q_i])


# ------------------------------------------------------------------ loading

def _weight(raw, where: str) -> float:
    if isinstance(raw, bool):
        raise FormatError(f"{where}: weight must be a number")
    if isinstance(raw, str):
        try:
            value = float(Decimal(raw.strip()))
        except InvalidOperation:
            raise FormatError(f"{where}: bad weight {raw!r}") from None
    elif isinstance(raw, (int, float)):
        value = float(raw)
    else:
        raise FormatError(f"{where}: weight must be a number or decimal string")
    if not math.isfinite(value):
        raise FormatError(f"{where}: weight must be finite")
    if value < 0:
        raise NegativeWeight(f"{where}: negative weight {raw}")
    return value


def _robot(doc, position: int) -> Wts:
    if not isinstance(doc, dict):
        raise FormatError(f"robot #{position}: expected an object")
    rid = doc.get("id", position)
    if not isinstance(rid, int) or isinstance(rid, bool) or rid < 1:
        raise FormatError(f"robot #{position}: id must be a positive integer")
    where = f"robot {rid}"
    states = doc.get("states")
    if not isinstance(states, list) or not states or not all(isinstance(s, str) for s in states):
        raise FormatError(f"{where}: 'states' must be a non-empty list of names")
    if len(set(states)) != len(states):
        raise FormatError(f"{where}: duplicate state name")
    index = {s: k for k, s in enumerate(states)}
    init = doc.get("initial")
    if init is None:
        raise MissingInitial(f"{where}: no initial state")
    if init not in index:
        raise MissingInitial(f"{where}: initial state {init!r} is not a state")

    edges, seen = [], set()
    for k, e in enumerate(doc.get("edges", [])):
        if not isinstance(e, list) or len(e) != 3:
            raise FormatError(f"{where}: edge #{k} must be [src, dst, weight]")
        src, dst, raw = e
        for end in (src, dst):
            if end not in index:
                raise DanglingEdge(f"{where}: edge #{k} endpoint {end!r} is not a state")
        pair = (index[src], index[dst])
        if pair in seen:
            raise FormatError(f"{where}: duplicate edge {src} -> {dst}")
        seen.add(pair)
        edges.append((*pair, _weight(raw, f"{where}, edge #{k}")))

    labels_doc = doc.get("labels")
    if labels_doc is None:
        labels = tuple(frozenset([f"r{rid}@{s}"]) for s in states)
    else:
        if not isinstance(labels_doc, dict):
            raise FormatError(f"{where}: 'labels' must map states to atom lists")
        for s in labels_doc:
            if s not in index:
                raise FormatError(f"{where}: label for unknown state {s!r}")
        labels = tuple(frozenset(labels_doc.get(s, [f"r{rid}@{s}"])) for s in states)

    wts = Wts(rid, tuple(states), index[init], tuple(edges), labels)
    lacking = [s for k, s in enumerate(states) if not wts.adjacency[k, k]]
    if lacking:
        warnings.warn(f"{where}: no self-loop at {', '.join(lacking)}",
                      MissingSelfLoop, stacklevel=3)
    return wts


def load_model(text: str) -> MultiRobotModel:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON: {exc.msg}", exc.lineno) from None
    if not isinstance(doc, dict) or not isinstance(doc.get("robots"), list):
        raise FormatError("top level must be an object with a 'robots' list")
    robots = tuple(_robot(r, k + 1) for k, r in enumerate(doc["robots"]))
    ids = [r.robot_id for r in robots]
    if len(set(ids)) != len(ids):
        raise FormatError("duplicate robot id")
    return MultiRobotModel(robots)


def dump_model(model: MultiRobotModel) -> str:
    robots = []
    for r in model.robots:
        entry = {
            "id": r.robot_id,
            "states": list(r.states),
            "initial": r.states[r.initial],
            "edges": [[r.states[s], r.states[d], w] for s, d, w in r.edges],
        }
        default = all(lab == frozenset([f"r{r.robot_id}@{s}"])
                      for s, lab in zip(r.states, r.labels))
        if not default:
            entry["labels"] = {s: sorted(lab) for s, lab in zip(r.states, r.labels)}
        robots.append(entry)
    return json.dumps({"robots": robots}, indent=1) + "\n"
