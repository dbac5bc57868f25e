import json

import pytest

from ltltree.automaton import parse_nba
from ltltree.cli import main
from ltltree.ltl import parse_ltl
from ltltree.model import dump_model, load_model
from ltltree.planner import plan_from_json, validate_plan
from ltltree.translate import ltl_to_nba

from helpers import line_model


@pytest.fixture
def files(tmp_path):
    model = tmp_path / "model.json"
    model.write_text(dump_model(line_model()))
    ok = tmp_path / "ok.ltl"
    ok.write_text("G F r1@l3 & G F r1@l1\n")
    never = tmp_path / "never.ltl"
    never.write_text("F r1@l2 & G !r1@l2\n")
    return tmp_path, model, ok, never


def test_translate(tmp_path, capsys):
    src = tmp_path / "f.ltl"
    src.write_text("F a")
    out = tmp_path / "f.nba"
    assert main(["translate", "--ltl", str(src), "--out", str(out)]) == 0
    nba = parse_nba(out.read_text())
    assert nba.accepting
    assert "states:" in capsys.readouterr().out


def test_translate_syntax_error(tmp_path, capsys):
    src = tmp_path / "bad.ltl"
    src.write_text("a U & b")
    assert main(["translate", "--ltl", str(src)]) == 1
    assert "at byte 4" in capsys.readouterr().err


def test_plan_writes_valid_plan(files, capsys):
    tmp, model, ok, _ = files
    out = tmp / "run"
    code = main(["plan", "--model", str(model), "--ltl", str(ok), "--n-pre", "200",
                 "--n-suf", "200", "--seeds", "0-2", "--out", str(out)])
    assert code == 0
    m = load_model(model.read_text())
    nba = ltl_to_nba(parse_ltl(ok.read_text()))
    for seed in range(3):
        plan = plan_from_json(m, nba, (out / f"plan_seed{seed}.json").read_text())
        assert validate_plan(m, nba, plan) and plan.total_cost == 9.0
        rows = (out / f"stats_seed{seed}.csv").read_text().splitlines()
        assert rows[0].startswith("tree,iteration,tree_size,rejected")
        assert sum(r.startswith("prefix:") for r in rows) == 200 * len(nba.initial)
    assert "J = 9.0" in capsys.readouterr().out


def test_plan_unsatisfiable(files):
    tmp, model, _, never = files
    assert main(["plan", "--model", str(model), "--ltl", str(never), "--n-pre", "50",
                 "--n-suf", "50", "--out", str(tmp / "x")]) == 2


def test_plan_is_byte_identical(files):
    tmp, model, ok, _ = files
    outs = []
    for k in range(2):
        out = tmp / f"r{k}"
        main(["plan", "--model", str(model), "--ltl", str(ok), "--n-pre", "300",
              "--n-suf", "300", "--seed", "4", "--out", str(out)])
        outs.append(((out / "plan_seed4.json").read_bytes(), (out / "stats_seed4.csv").read_bytes()))
    assert outs[0] == outs[1]


def test_config_file_and_override(files):
    tmp, model, ok, _ = files
    cfg = tmp / "cfg.json"
    cfg.write_text(json.dumps({"model": str(model), "ltl": str(ok), "n_pre": 5,
                               "n_suf": 5, "seeds": [1], "out": str(tmp / "c")}))
    assert main(["plan", "--config", str(cfg), "--n-pre", "150", "--n-suf", "150"]) == 0
    rows = (tmp / "c" / "stats_seed1.csv").read_text().splitlines()
    assert rows[150].split(",")[1] == "150"
    cfg.write_text(json.dumps({"model": str(model), "bogus": 1}))
    assert main(["plan", "--config", str(cfg)]) == 1


def test_config_errors(files):
    tmp, model, ok, _ = files
    assert main(["plan", "--model", str(model), "--n-pre", "5"]) == 1
    assert main(["plan", "--model", str(model), "--ltl", str(ok), "--n-pre", "0"]) == 1
    assert main(["plan", "--model", str(tmp / "missing.json"), "--ltl", str(ok)]) == 1
    assert main(["plan", "--no-such-flag"]) == 1


def test_oracle_and_capacity(files, capsys):
    tmp, model, ok, _ = files
    out = tmp / "o"
    assert main(["oracle", "--model", str(model), "--ltl", str(ok), "--out", str(out)]) == 0
    doc = json.loads((out / "oracle_plan.json").read_text())
    assert doc["total_cost"] == 9.0 and doc["product_states"] == 3 * 12
    assert main(["oracle", "--model", str(model), "--ltl", str(ok),
                 "--oracle-max-states", "10"]) == 3
    assert "36" in capsys.readouterr().err


def test_compare(files):
    tmp, model, ok, _ = files
    out = tmp / "cmp"
    assert main(["compare", "--model", str(model), "--ltl", str(ok), "--n-pre", "300",
                 "--n-suf", "300", "--seeds", "0,1", "--out", str(out)]) == 0
    report = json.loads((out / "compare_report.json").read_text())
    assert report["match_rate"] == 1.0 and len(report["runs"]) == 2
    assert all(r["max_rejected_per_iteration"] <= report["buchi_states"] for r in report["runs"])
    # one iteration cannot reach the far end of the line
    assert main(["compare", "--model", str(model), "--ltl", str(ok), "--n-pre", "1",
                 "--n-suf", "1", "--out", str(out)]) == 4


def test_workers_match_serial(files):
    tmp, model, ok, _ = files
    args = ["plan", "--model", str(model), "--ltl", str(ok), "--n-pre", "100",
            "--n-suf", "100", "--seeds", "0-3"]
    main(args + ["--out", str(tmp / "serial")])
    main(args + ["--out", str(tmp / "pool"), "--workers", "2"])
    for seed in range(4):
        name = f"plan_seed{seed}.json"
        assert (tmp / "serial" / name).read_bytes() == (tmp / "pool" / name).read_bytes()


def test_gen_grid(tmp_path):
    out = tmp_path / "grid.json"
    assert main(["gen", "grid", "--rows", "4", "--cols", "4", "--robots", "2",
                 "--out", str(out)]) == 0
    m = load_model(out.read_text())
    assert m.n_robots == 2 and all(len(r.states) == 16 for r in m.robots)
    assert all(any(a == b for a, b, _ in r.edges) for r in m.robots)
    again = tmp_path / "again.json"
    main(["gen", "grid", "--rows", "4", "--cols", "4", "--robots", "2", "--out", str(again)])
    assert out.read_bytes() == again.read_bytes()


def test_gen_intermittent(capsys):
    assert main(["gen", "intermittent", "--teams", "1,2@l5;2,3,4@l1"]) == 0
    text = capsys.readouterr().out
    assert "[] <> (r1@l5 & r2@l5)" in text
    parse_ltl(text)


def test_gen_errors():
    assert main(["gen", "grid", "--rows", "3"]) == 1
    assert main(["gen", "intermittent", "--teams", "1,2"]) == 1
    assert main(["gen", "intermittent", "--teams", "1@l1", "--until", "nocolon"]) == 1


def test_gen_case_models(tmp_path):
    for kind, robots in (("case1", 9), ("case2", 2)):
        out = tmp_path / f"{kind}.json"
        assert main(["gen", kind, "--out", str(out)]) == 0
        assert load_model(out.read_text()).n_robots == robots
