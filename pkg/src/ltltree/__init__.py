"""Optimal prefix-suffix motion plans for robot teams under LTL tasks,
found by growing trees over an implicit product automaton."""

from .automaton import Nba, emit_nba, guard_sat, nba_accepts_lasso, nba_successors, parse_nba
from .errors import (BudgetExceeded, CapacityExceeded, DanglingEdge, DuplicateNode,
                     FormatError, InvalidTransition, LtlSyntaxError, MissingInitial,
                     NegativeWeight, PlannerError, UnknownAtom, UnknownOperator)
from .ltl import LassoWord, eval_lasso, parse_ltl, to_nnf, to_str
from .model import (MultiRobotModel, Wts, load_model, pts_label, pts_transition,
                    pts_weight, robot_reachable)
from .oracle import build_explicit_pba, oracle_optimal_plan, ucs_optimal_prefix
from .planner import NoPlanFound, Plan, synthesize, validate_plan
from .product import (ProductState, is_prefix_goal, is_suffix_goal, pba_successors,
                      pba_transition, pba_weight)
from .translate import ltl_to_nba
from .tree import PlannerTree, SamplerConfig, construct_tree, find_path

__version__ = "0.1.0"
