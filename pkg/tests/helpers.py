"""Small hand-made instances shared by several test modules."""

import json

from ltltree.automaton import parse_nba
from ltltree.ltl import parse_ltl
from ltltree.model import load_model
from ltltree.translate import ltl_to_nba


def line_model(weights=(1.0, 2.0), self_loops=(0.0, 0.0, 0.0), start="l1"):
    """One robot on a line l1 - l2 - l3 with the given forward weights;
    backward moves cost the same."""
    states = ["l1", "l2", "l3"]
    edges = [[s, s, w] for s, w in zip(states, self_loops)]
    for (a, b), w in zip(zip(states, states[1:]), weights):
        edges += [[a, b, w], [b, a, w]]
    return load_model(json.dumps({"robots": [
        {"id": 1, "states": states, "initial": start, "edges": edges}]}))


def two_robot_model():
    return load_model(json.dumps({"robots": [
        {"id": 1, "states": ["l1", "l2"], "initial": "l1",
         "edges": [["l1", "l1", 0], ["l1", "l2", 1], ["l2", "l2", 0], ["l2", "l1", 1]]},
        {"id": 2, "states": ["l1", "l2", "l3"], "initial": "l3",
         "edges": [["l1", "l1", 0], ["l2", "l2", 0], ["l3", "l3", 0.5],
                   ["l3", "l2", 2], ["l2", "l1", 0.25], ["l1", "l3", 1.5]]},
    ]}))


def nba_for(text):
    return ltl_to_nba(parse_ltl(text))


REACH_THEN_STAY = parse_nba("""\
states: go there
initial: go
accepting: there
alphabet: r1@l3
go -- !r1@l3 --> go
go -- r1@l3 --> there
there -- r1@l3 --> there
""")
