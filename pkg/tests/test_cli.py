import io
import json
import sys
from pathlib import Path

import pytest

from decisive import cli, decision as dc, serialize as se, towers as tw
from decisive.creatures import SplitCreature
from decisive.decision import BOTTOM, FiniteCondition, NameTable
from decisive.extnat import bit_budget
from decisive.fixtures import cid, graded_system
from decisive.rank import RankParams, full_cube
from decisive.schedules import parse_schedule


def run(*argv):
    buf = io.StringIO()
    code = cli.run(list(map(str, argv)), buf)
    return code, buf.getvalue()


@pytest.fixture
def full_file(tmp_path):
    path = tmp_path / "full.json"
    assert run("construct", "--out", path)[0] == 0
    return path


@pytest.fixture
def const2_file(tmp_path):
    path = tmp_path / "c2.json"
    assert run("construct", "--schedule", "const:2", "--J", 4, "--out", path)[0] == 0
    return path


# ------------------------------------------------------------------ examples


def test_rank_example():
    code, out = run("rank", "--B", 2, "--n", 0, "--schedule", "default", "--set", "0-3")
    assert code == 0 and out.splitlines() == ["2"]


def test_rank_empty_set():
    assert run("rank", "--set", "")[1].splitlines() == ["0"]


def test_construct_example():
    code, out = run("construct", "--n", 0, "--B", 2, "--r", 1)
    assert code == 0
    assert out.splitlines()[:2] == ["J=4", "Psi=16"]
    assert "max_norm=1" in out


def test_verify_vacuous_on_low_norm_creature(full_file):
    code, out = run("verify", "--property", "big", "--B", 2, "--r", 1, "--mode", "exhaustive", full_file)
    assert code == 0 and out.strip() == "big(2): vacuous"


def test_verify_non_vacuous(const2_file):
    code, out = run("verify", "--property", "halving", const2_file)
    assert code == 0 and "halving: pass" in out
    code, out = run("verify", "--property", "big", "--mode", "sample", "--samples", 40, const2_file)
    assert code == 0 and "big(2): pass" in out


def test_towers_commands(tmp_path):
    code, out = run("towers", "gen", "--E", 3, "--L", 5, "--out", tmp_path / "t.json")
    assert code == 0 and out.strip() == "117/117 certified"
    assert run("towers", "check", tmp_path / "t.json")[1].strip() == "117/117 certified"
    code, out = run("towers", "grid", "--N", 4, "--out", tmp_path / "g.json")
    assert code == 0 and out.strip() == "43/43 certified"
    assert run("towers", "check", tmp_path / "g.json")[0] == 0


def test_homogenize_random_with_oracle():
    code, out = run("homogenize", "--k", 2, "--nvals", 3, "--seed", 0, "--oracle")
    assert out.splitlines() == ["success", "oracle: 144 solutions"]
    assert code == 0


def test_homogenize_failure_exits_1():
    # the random fixture's declared witnesses carry no real bigness, so this run fails
    code, out = run("homogenize", "--k", 2, "--nvals", 3, "--seed", 7, "--oracle")
    assert code == 1 and out.startswith("failed:")


def test_decide_toy():
    code, out = run("decide", "--toy", "--H", 9, "--seed", 3)
    assert code == 0 and out.startswith("flag=")
    code, out = run("decide", "--toy", "--op", "pure", "--H", 9, "--M", 0, "--no-shortcut", "--seed", 3)
    assert out.startswith("decided-below(") or out.startswith("error: HorizonExhausted")


def test_decide_from_files(tmp_path):
    s = graded_system([0, 1, 2], {2: 9, 3: 9}, "1/4", 6)
    p = FiniteCondition((), [s[cid([0, 1, 2], 0)]] * 2)
    tau = NameTable.from_function([[0, 1, 2]] * 2, lambda b: b[1] % 2)
    (tmp_path / "p.json").write_text(json.dumps(se.condition_to_json(p)))
    (tmp_path / "t.json").write_text(json.dumps(se.name_to_json(tau)))
    code, out = run("decide", tmp_path / "p.json", tmp_path / "t.json", "--op", "basic")
    assert code == 0 and out.strip() == "flag=dec"
    code, out = run("decide", tmp_path / "p.json", tmp_path / "t.json", "--op", "pure", "--M", 0, "--no-shortcut")
    assert code == 0 and out.strip().startswith("decided-below(")


# ------------------------------------------------------------------ exit codes and schema errors


def test_usage_errors_exit_2(capsys, tmp_path):
    assert run("frobnicate")[0] == 2
    assert run("rank", "--set", "3-1")[0] == 2
    assert run("towers", "check", tmp_path / "missing.json")[0] == 2
    assert run("decide")[0] == 2
    assert run("rank", "--schedule", "weird")[0] == 2


def test_invalid_k_is_rejected(tmp_path, full_file, capsys):
    d = json.loads(full_file.read_text())
    d["k"] = 5
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(d))
    assert run("verify", "--property", "big", bad)[0] == 2
    assert "k <= prenorm(c)-1" in capsys.readouterr().err


def test_bad_bitstring_is_rejected(tmp_path, full_file, capsys):
    d = json.loads(full_file.read_text())
    d["c"][0] = "01x1"
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(d))
    assert run("verify", "--property", "big", bad)[0] == 2
    assert ".c" in capsys.readouterr().err


def test_name_missing_branch_is_rejected(tmp_path, capsys):
    tau = NameTable.from_function([[0, 1]] * 2, lambda b: 0)
    d = se.name_to_json(tau)
    del d["table"]["1,0"]
    with pytest.raises(se.SchemaError, match="missing branch '1,0'"):
        se.name_from_json(d)


def test_non_monotone_schedule_is_rejected():
    with pytest.raises(se.SchemaError):
        parse_schedule("table:3,2")


def test_failed_check_exits_1(tmp_path):
    t = tw.gen_sequences(2, 2)
    d = t.to_json()
    d["f"][1][1] = d["f"][0][1]
    (tmp_path / "bad.json").write_text(json.dumps(d))
    code, out = run("towers", "check", tmp_path / "bad.json", "--report", tmp_path / "r.json")
    assert code == 1
    rep = json.loads((tmp_path / "r.json").read_text())
    assert rep["status"] == "fail"
    assert rep["checks"][0]["uncertified"]  # the failing items are named


def test_file_schedule(tmp_path):
    (tmp_path / "s.json").write_text(json.dumps([2, 2, 2]))
    a = run("construct", "--schedule", f"file:{tmp_path / 's.json'}")[1]
    b = run("construct", "--schedule", "const:2")[1]
    assert a.splitlines()[:2] == b.splitlines()[:2]


def test_bit_budget_flag_is_scoped():
    before = bit_budget()
    assert run("towers", "grid", "--N", 2, "--bit-budget", 128)[0] == 0
    assert bit_budget() == before


# ------------------------------------------------------------------ reports


def test_report_determinism(tmp_path, const2_file):
    argv = ["verify", "--property", "big", "--mode", "sample", "--samples", 30, "--seed", 9, const2_file]
    run(*argv, "--report", tmp_path / "r.json")
    a = (tmp_path / "r.json").read_bytes()
    run(*argv, "--report", tmp_path / "r.json")
    b = (tmp_path / "r.json").read_bytes()
    assert a == b
    rep = json.loads(a)
    assert rep["schema"] == se.SCHEMA and rep["seed"] == 9 and "wall_clock" not in rep
    assert rep["digest"] == se.digest(rep["params"])


def test_timing_is_opt_in(tmp_path):
    run("rank", "--set", "0-3", "--timing", "--report", tmp_path / "r.json")
    assert "wall_clock" in json.loads((tmp_path / "r.json").read_text())


def test_report_to_stdout():
    code, out = run("rank", "--set", "0-3", "--report", "-")
    first, rest = out.split("\n", 1)
    assert first == "2" and json.loads(rest)["status"] == "pass"


# ------------------------------------------------------------------ round trips


def test_split_creature_round_trip():
    c = SplitCreature(4, full_cube(4), 1, RankParams(2, 0, parse_schedule("const:2"), 1))
    d = se.creature_from_json(json.loads(json.dumps(se.creature_to_json(c))))
    assert d == c and se.creature_to_json(d) == se.creature_to_json(c)


def test_condition_and_name_round_trip():
    s = dc.toy_system()
    p = dc.and_value(FiniteCondition((), [s[cid([0, 1, 2], 1)], s[cid([0, 2], 0)], s[cid([0, 1, 2], 2)]]), (2,))
    q = se.condition_from_json(json.loads(json.dumps(se.condition_to_json(p))))
    assert q.trunk == p.trunk and q.r == p.r
    assert [c.cid for c in q.creatures] == [c.cid for c in p.creatures]
    assert [c.val for c in q.creatures] == [c.val for c in p.creatures]
    tau = NameTable.from_function([[0, 1, 2]] * 3, lambda b: BOTTOM if b[0] == 1 else "ab"[b[2] % 2])
    t2 = se.name_from_json(json.loads(json.dumps(se.name_to_json(tau))))
    assert t2.as_dict() == tau.as_dict()


def test_tables_and_grid_round_trip():
    t = tw.gen_sequences(2, 3)
    t2 = se.tables_from_json(json.loads(json.dumps(t.to_json())))
    assert t2.to_json() == t.to_json() and tw.check_assumption(t2)["ok"]
    g, _ = tw.gen_grid(3)
    g2 = se.grid_from_json(json.loads(json.dumps(g.to_json())))
    assert g2.to_json() == g.to_json() and tw.check_grid(g2)["ok"]


def test_coloring_round_trip_and_partial_rejection():
    F = {(a, b): (a + b) % 2 for a in range(3) for b in range(2)}
    dom = sorted(F)
    assert se.coloring_from_json(se.coloring_to_json(F), dom) == F
    d = se.coloring_to_json(F)
    del d["table"]["2,1"]
    with pytest.raises(se.SchemaError, match="no color for '2,1'"):
        se.coloring_from_json(d, dom)


# ------------------------------------------------------------------ dispatch coverage

OPERATIONS = {
    "rank": ["ns", "minimal_block", "choose_J", "prenorm", "pigeonhole_index"],
    "creatures": ["norm", "in_sigma", "halve", "unhalve", "big_extract", "decisive_witness"],
    "verify": ["verify"],
    "homogenize": ["boost", "avoid", "multi_homogenize", "homogenize_product"],
    "towers": ["ext_compare", "exp_tower", "phi_r", "psi_upper", "gen_sequences", "check_assumption", "gen_grid"],
    "decision": ["and_value", "decision_status", "leq_n", "basic_step", "pure_decide"],
}


def test_every_operation_is_dispatched():
    listed = {op for ops in cli.DISPATCH.values() for op in ops}
    for mod, names in OPERATIONS.items():
        for n in names:
            assert f"{mod}.{n}" in listed, f"{mod}.{n} has no subcommand"


def traced(argv):
    seen = set()

    def prof(frame, event, arg):
        if event == "call":
            mod = frame.f_globals.get("__name__", "")
            if mod.startswith("decisive."):
                seen.add((mod, frame.f_code.co_name))

    sys.setprofile(prof)
    try:
        cli.run([str(a) for a in argv], io.StringIO())
    finally:
        sys.setprofile(None)
    return seen


def reached(entry, seen):
    import importlib

    mod, name = entry.split(".")
    obj = getattr(importlib.import_module(f"decisive.{mod}"), name)
    code_name = getattr(obj, "__name__", name)
    homes = {f"decisive.{mod}", getattr(obj, "__module__", "")}
    # wrappers delegate to methods; "in_sigma" is the method in_sigma_of
    names = {name, code_name, name + "_of"}
    return any(m in homes and n in names for m, n in seen)


def test_dispatch_entries_are_really_called(tmp_path, const2_file):
    g = tmp_path / "g.json"
    t = tmp_path / "t.json"
    s = graded_system(list(range(5)), {k: 3 for k in range(2, 6)}, "1/4", 8, witness_K=2, big_same_set=True)
    inst = {"systems": [s.to_json()],
            "creatures": [{"kind": "tabular-creature", "system": 0, "creature": cid(range(5), 0)}],
            "F": {"table": {str(v): v % 2 for v in range(5)}}}
    (tmp_path / "inst.json").write_text(json.dumps(inst))
    runs = {
        "rank": [["rank", "--set", "0-5"]],
        "construct": [["construct", "--schedule", "const:2", "--J", 4]],
        "verify": [["verify", const2_file, "--property", "halving"],
                   ["verify", const2_file, "--property", "big", "--mode", "sample", "--samples", 20]],
        "homogenize": [["homogenize", "--k", 2, "--nvals", 3, "--oracle", "--seed", 0],
                       ["homogenize", tmp_path / "inst.json", "--op", "product", "--delta", 1],
                       ["homogenize", tmp_path / "inst.json", "--op", "boost", "--delta", 1],
                       ["homogenize", tmp_path / "inst.json", "--op", "avoid", "--delta", 1, "--avoid", "0"]],
        "towers gen": [["towers", "gen", "--E", 2, "--L", 3, "--out", t]],
        "towers grid": [["towers", "grid", "--N", 3, "--out", g]],
        "towers check": [["towers", "check", t], ["towers", "check", g]],
        "decide": [["decide", "--toy", "--H", 9, "--seed", s_] for s_ in range(6)]
        + [["decide", "--toy", "--H", 9, "--op", "pure", "--M", 0, "--no-shortcut", "--seed", 1]],
    }
    assert set(runs) == set(cli.DISPATCH)
    for cmd, argvs in runs.items():
        seen = set()
        for argv in argvs:
            seen |= traced(argv)
        missing = [e for e in cli.DISPATCH[cmd] if not reached(e, seen)]
        assert not missing, f"{cmd}: {missing}"
