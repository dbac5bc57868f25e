"""The product of the team transition system with a Büchi automaton, kept
implicit. The automaton edge is read under the label of the *source* PTS
state."""

from __future__ import annotations

from typing import Iterator, NamedTuple

from .automaton import Nba
from .errors import InvalidTransition
from .model import MultiRobotModel, PtsState, pts_label, pts_transition, pts_weight

__all__ = ["ProductState", "pba_transition", "pba_weight", "is_prefix_goal",
           "is_suffix_goal", "pba_successors", "initial_product_states"]


class ProductState(NamedTuple):
    pts: PtsState
    buchi: int


def pba_transition(model: MultiRobotModel, nba: Nba, q: ProductState,
                   q2: ProductState) -> bool:
    if not pts_transition(model, q.pts, q2.pts):
        return False
    return q2.buchi in nba.successors(q.buchi, pts_label(model, q.pts))


def pba_weight(model: MultiRobotModel, nba: Nba, q: ProductState,
               q2: ProductState) -> float:
    if not pba_transition(model, nba, q, q2):
        raise InvalidTransition(f"no product transition {q} -> {q2}")
    return pts_weight(model, q.pts, q2.pts)


def is_prefix_goal(nba: Nba, q: ProductState) -> bool:
    return q.buchi in nba.accepting


def is_suffix_goal(model: MultiRobotModel, nba: Nba, q: ProductState,
                   root: ProductState) -> bool:
    return pba_transition(model, nba, q, root)


def pba_successors(model: MultiRobotModel, nba: Nba,
                   q: ProductState) -> Iterator[ProductState]:
    targets = nba.successors(q.buchi, pts_label(model, q.pts))
    if not targets:
        return
    for nxt in model.pts_successors(q.pts):
        for b in targets:
            yield ProductState(nxt, b)


def initial_product_states(model: MultiRobotModel, nba: Nba) -> list[ProductState]:
    return [ProductState(model.initial, b) for b in nba.initial]
