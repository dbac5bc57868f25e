"""``planner`` command-line entry point.

Exit codes: 0 success, 1 usage/input/translation error, 2 no plan found,
3 explicit product too large, 4 compare match rate below threshold.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .automaton import emit_nba, parse_nba
from .errors import CapacityExceeded, PlannerError
from .ltl import parse_ltl
from .model import dump_model, load_model
from .oracle import DEFAULT_MAX_STATES, build_explicit_pba, oracle_optimal_plan
from .planner import plan_to_json, synthesize_detailed
from .scenarios import (case1_model, case2_model, grid_model, intermittent_formula,
                        parse_teams)
from .translate import ltl_to_nba
from .tree import STATS_HEADER, SamplerConfig

log = logging.getLogger("ltltree")

EXIT_OK, EXIT_ERROR, EXIT_NO_PLAN, EXIT_CAPACITY, EXIT_BELOW_THRESHOLD = 0, 1, 2, 3, 4


@dataclass
class ExperimentConfig:
    model: str | None = None
    ltl: str | None = None
    nba: str | None = None
    n_pre: int = 1000
    n_suf: int = 1000
    seeds: list[int] = field(default_factory=lambda: [0])
    oracle: bool = False
    oracle_max_states: int = DEFAULT_MAX_STATES
    out: str = "."
    workers: int = 1
    timings: bool = False
    match_threshold: float = 0.95

    def check(self):
        if self.model is None:
            raise ValueError("a model file is required (--model)")
        if (self.ltl is None) == (self.nba is None):
            raise ValueError("give exactly one of --ltl and --nba")
        if self.n_pre < 1 or self.n_suf < 1:
            raise ValueError("--n-pre and --n-suf must be at least 1")
        if not self.seeds:
            raise ValueError("at least one seed is required")
        if self.workers < 1:
            raise ValueError("--workers must be at least 1")


_CONFIG_KEYS = set(ExperimentConfig.__dataclass_fields__)


def _config(args) -> ExperimentConfig:
    values = {}
    if getattr(args, "config", None):
        doc = json.loads(Path(args.config).read_text("utf-8"))
        unknown = set(doc) - _CONFIG_KEYS
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        values.update(doc)
    for key in _CONFIG_KEYS:
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag
    if getattr(args, "seed", None) is not None:
        values["seeds"] = [args.seed]
    cfg = ExperimentConfig(**values)
    cfg.check()
    return cfg


def _load_inputs(cfg: ExperimentConfig):
    model = load_model(Path(cfg.model).read_text("utf-8"))
    if cfg.nba is not None:
        nba = parse_nba(Path(cfg.nba).read_text("utf-8"))
    else:
        nba = ltl_to_nba(parse_ltl(Path(cfg.ltl).read_text("utf-8")))
    return model, nba


def _seed_list(text: str) -> list[int]:
    out = []
    for part in text.split(","):
        lo, sep, hi = part.partition("-")
        out += list(range(int(lo), int(hi) + 1)) if sep else [int(lo)]
    return out


# ------------------------------------------------------------- commands

def cmd_translate(args) -> int:
    formula = parse_ltl(Path(args.ltl).read_text("utf-8"))
    nba = ltl_to_nba(formula, args.max_states)
    text = emit_nba(nba)
    if args.out:
        Path(args.out).write_text(text, "utf-8")
    else:
        sys.stdout.write(text)
    print(f"states: {len(nba)} transitions: {nba.num_edges} "
          f"initial: {len(nba.initial)} accepting: {len(nba.accepting)}",
          file=sys.stderr if not args.out else sys.stdout)
    return EXIT_OK


def _run_seed(model, nba, cfg: ExperimentConfig, seed: int):
    start = time.perf_counter()
    syn = synthesize_detailed(model, nba, cfg.n_pre, cfg.n_suf, SamplerConfig(seed=seed))
    return seed, syn, time.perf_counter() - start


def _run_seeds(model, nba, cfg):
    if cfg.workers == 1 or len(cfg.seeds) == 1:
        return [_run_seed(model, nba, cfg, s) for s in cfg.seeds]
    with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
        return list(pool.map(_run_seed, [model] * len(cfg.seeds),
                             [nba] * len(cfg.seeds), [cfg] * len(cfg.seeds), cfg.seeds))


def _stats_csv(nba, syn, timings: bool) -> str:
    import io
    buf = io.StringIO()
    buf.write(",".join(["tree"] + STATS_HEADER) + "\n")
    for b0, run in syn.prefix_runs.items():
        run.stats.write_csv(buf, f"prefix:{nba.states[b0]}", timings)
    for (b0, a), run in syn.suffix_runs.items():
        run.stats.write_csv(buf, f"suffix:{nba.states[b0]}:{a}", timings)
    return buf.getvalue()


def cmd_plan(args) -> int:
    cfg = _config(args)
    model, nba = _load_inputs(cfg)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    found = 0
    for seed, syn, elapsed in _run_seeds(model, nba, cfg):
        (out / f"stats_seed{seed}.csv").write_text(_stats_csv(nba, syn, cfg.timings), "utf-8")
        if syn.plan:
            found += 1
            (out / f"plan_seed{seed}.json").write_text(
                plan_to_json(model, nba, syn.plan), "utf-8")
            print(f"seed {seed}: J = {syn.plan.total_cost!r} "
                  f"(prefix {syn.plan.prefix_cost!r}, suffix {syn.plan.suffix_cost!r})")
        else:
            print(f"seed {seed}: no plan ({syn.plan.reason})")
        log.info("seed %d finished in %.2fs", seed, elapsed)
    return EXIT_OK if found else EXIT_NO_PLAN


def cmd_oracle(args) -> int:
    cfg = _config(args)
    model, nba = _load_inputs(cfg)
    start = time.perf_counter()
    graph = build_explicit_pba(model, nba, cfg.oracle_max_states)
    plan = oracle_optimal_plan(model, nba, graph=graph)
    elapsed = time.perf_counter() - start
    print(f"product states: {len(graph)} edges: {graph.num_edges}")
    if not plan:
        print(f"no plan ({plan.reason})")
        return EXIT_NO_PLAN
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "oracle_plan.json").write_text(plan_to_json(
        model, nba, plan, {"product_states": len(graph), "product_edges": graph.num_edges}),
        "utf-8")
    print(f"J* = {plan.total_cost!r}")
    log.info("oracle finished in %.2fs", elapsed)
    return EXIT_OK


def cmd_compare(args) -> int:
    cfg = _config(args)
    model, nba = _load_inputs(cfg)
    t0 = time.perf_counter()
    graph = build_explicit_pba(model, nba, cfg.oracle_max_states)
    best = oracle_optimal_plan(model, nba, graph=graph)
    oracle_s = time.perf_counter() - t0
    if not best:
        print(f"oracle: no plan ({best.reason})")
        return EXIT_NO_PLAN
    rows, matches = [], 0
    for seed, syn, elapsed in _run_seeds(model, nba, cfg):
        plan = syn.plan
        J = plan.total_cost if plan else None
        match = J is not None and abs(J - best.total_cost) <= 1e-9
        matches += match
        first = None
        for run in syn.prefix_runs.values():
            hits = [k for k, c in enumerate(run.stats.best_goal_cost) if c != float("inf")]
            if hits and (first is None or hits[0] + 1 < first):
                first = hits[0] + 1
        runs = [*syn.prefix_runs.values(), *syn.suffix_runs.values()]
        rows.append({
            "seed": seed, "J": J, "J_star": best.total_cost, "match": match,
            "prefix_tree_nodes": [len(r.tree) for r in syn.prefix_runs.values()],
            "max_tree_nodes": max(len(r.tree) for r in runs),
            "first_accepting_iteration": first,
            "max_rejected_per_iteration": max(int(r.stats.rejected.max()) for r in runs),
            "seconds": round(elapsed, 3),
        })
    rate = matches / len(cfg.seeds)
    report = {"product_states": len(graph), "product_edges": graph.num_edges,
              "buchi_states": len(nba), "J_star": best.total_cost,
              "oracle_seconds": round(oracle_s, 3), "match_rate": rate,
              "threshold": cfg.match_threshold, "runs": rows}
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "compare_report.json").write_text(json.dumps(report, indent=1) + "\n", "utf-8")
    print(f"match rate {rate:.3f} over {len(cfg.seeds)} seeds (J* = {best.total_cost!r})")
    return EXIT_OK if rate >= cfg.match_threshold else EXIT_BELOW_THRESHOLD


def cmd_gen(args) -> int:
    if args.kind == "grid":
        if not (args.rows and args.cols and args.robots):
            raise ValueError("grid needs --rows, --cols and --robots")
        text = dump_model(grid_model(args.rows, args.cols, args.robots))
    elif args.kind == "case1":
        text = dump_model(case1_model())
    elif args.kind == "case2":
        text = dump_model(case2_model())
    else:  # intermittent
        if not args.teams:
            raise ValueError("intermittent needs --teams, e.g. \"1,2@l5;2,3,4@l1\"")
        until = None
        if args.until:
            meet, sep, target = args.until.partition(":")
            if not sep:
                raise ValueError("--until must look like 1,2@l5:r1@l7")
            ((ids, region),) = parse_teams(meet)
            until = (ids, region, target.strip())
        text = intermittent_formula(parse_teams(args.teams), until) + "\n"
    if args.out:
        Path(args.out).write_text(text, "utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


# --------------------------------------------------------------- parser

def _experiment_flags(p):
    p.add_argument("--config", help="JSON file with experiment settings")
    p.add_argument("--model")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--ltl", help="formula file")
    src.add_argument("--nba", help="automaton file (.nba)")
    p.add_argument("--n-pre", dest="n_pre", type=int)
    p.add_argument("--n-suf", dest="n_suf", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--seeds", type=_seed_list, help="e.g. 0,1,5-9")
    p.add_argument("--out")
    p.add_argument("--oracle-max-states", dest="oracle_max_states", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--timings", action="store_const", const=True,
                   help="fill the elapsed_ms stats column (breaks byte-identical output)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="planner", description="Optimal multi-robot plans for LTL tasks via sampling trees.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("translate", help="LTL formula file to .nba")
    p.add_argument("--ltl", required=True)
    p.add_argument("--out")
    p.add_argument("--max-states", dest="max_states", type=int, default=10**6)
    p.set_defaults(func=cmd_translate)

    for name, func, text in (("plan", cmd_plan, "run the sampling planner per seed"),
                             ("oracle", cmd_oracle, "exact plan from the explicit product"),
                             ("compare", cmd_compare, "planner vs oracle report")):
        p = sub.add_parser(name, help=text)
        _experiment_flags(p)
        if name == "compare":
            p.add_argument("--match-threshold", dest="match_threshold", type=float)
        p.set_defaults(func=func)

    p = sub.add_parser("gen", help="generate models and formulas")
    p.add_argument("kind", choices=["grid", "intermittent", "case1", "case2"])
    p.add_argument("--rows", type=int)
    p.add_argument("--cols", type=int)
    p.add_argument("--robots", type=int)
    p.add_argument("--teams")
    p.add_argument("--until", help="extra !meeting U target clause, e.g. 1,2@l5:r1@l7")
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen)
    return parser


def main(argv=None) -> int:
    level = os.environ.get("PLANNER_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse uses 2, which means "no plan" here
        return EXIT_OK if exc.code in (0, None) else EXIT_ERROR
    try:
        return args.func(args)
    except CapacityExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except (PlannerError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
