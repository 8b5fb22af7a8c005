import json
import os
import subprocess
import sys

import pytest

from mclearn.cli import main
from mclearn.errors import get_budget, set_budget
from mclearn.hypothesis import build_full_class, save_hclass


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def report(argv, capsys):
    code, out, err = run(argv, capsys)
    assert code == 0, err
    data = json.loads(out)
    assert data["schema"] == "report_v1"
    return data["result"]


def test_dims_cantor(capsys):
    res = report(["dims", "--generator", "cantor", "--d", "3"], capsys)
    assert res["natarajan"]["value"] == 1 and res["graph"]["value"] == 3
    assert res["littlestone"]["value"] == 1 and res["bandit_littlestone"]["value"] == 4
    assert res["graph_natarajan_check"]["ok"]


def test_dims_full_class_from_file(tmp_path, capsys):
    path = tmp_path / "h.hclass"
    save_hclass(build_full_class(2, 2), path)
    res = report(["dims", "--file", str(path)], capsys)
    assert [res[key]["value"] for key in ("natarajan", "graph", "vc", "littlestone")] == [2, 2, 2, 2]


def test_malformed_file_exit_1(tmp_path, capsys):
    path = tmp_path / "bad.hclass"
    path.write_text("2 2 1\n0 5\n")
    code, out, err = run(["dims", "--file", str(path)], capsys)
    assert code == 1 and out == "" and "line 2" in err


def test_usage_errors_exit_1(capsys):
    assert run(["gap", "--delta", "1"], capsys)[0] == 1
    assert run(["gap", "--epsilon", "0"], capsys)[0] == 1
    assert run(["dims", "--generator", "full", "--d", "2"], capsys)[0] == 1
    assert run(["online", "--generator", "full", "--d", "2", "--k", "2", "--learner", "nope"], capsys)[0] == 1
    assert run(["frobnicate"], capsys)[0] == 1


def test_gap_is_byte_identical_and_rerunnable(tmp_path, capsys):
    argv = ["gap", "--d", "4", "--epsilon", "0.25", "--delta", "0.2", "--trials", "200", "--seed", "3"]
    first = tmp_path / "a.json"
    assert main(argv + ["--output", str(first)]) == 0
    code, out, _ = run(argv, capsys)
    assert code == 0 and out == first.read_text()
    second = tmp_path / "b.json"
    assert main(["rerun", str(first), "--output", str(second)]) == 0
    assert second.read_text() == first.read_text()
    res = json.loads(out)["result"]
    assert res["good_bound_ok"] and res["m_ref"] == 7


def test_gap_independent_of_workers(capsys):
    argv = ["gap", "--d", "4", "--epsilon", "0.25", "--delta", "0.2", "--trials", "120"]
    a = report(argv + ["--workers", "1"], capsys)
    b = report(argv + ["--workers", "2"], capsys)
    assert a == b


def test_online_full_class(capsys):
    res = report(["online", "--generator", "full", "--d", "3", "--k", "2", "--adversary", "tree"], capsys)
    assert res["mistakes"] == 3 and res["bound_ok"] and res["littlestone_dim"] == 3


def test_online_replay_reproduces(tmp_path, capsys):
    path = tmp_path / "o.json"
    base = ["online", "--generator", "full", "--d", "3", "--k", "2", "--adversary", "tree"]
    assert main(base + ["--output", str(path)]) == 0
    res = report([*base[:-2], "--replay", str(path)], capsys)
    assert res["mistakes"] == 3
    jsonl = tmp_path / "seq.jsonl"
    jsonl.write_text("".join(json.dumps(r) + "\n" for r in json.loads(path.read_text())["result"]["replay"]))
    assert report([*base[:-2], "--replay", str(jsonl)], capsys)["mistakes"] == 3


def test_bandit_constants(tmp_path, capsys):
    base = ["bandit", "--generator", "constants", "--k", "4", "--adversary", "tree"]
    res = report(base, capsys)
    assert res["mistakes"] == 3 and res["bound_ok"] and res["bandit_littlestone_dim"] == 3
    path = tmp_path / "b.json"
    assert main(base + ["--output", str(path)]) == 0
    assert report([*base[:-2], "--replay", str(path)], capsys)["mistakes"] == 3


def test_csv_output(capsys):
    code, out, _ = run(["online", "--generator", "full", "--d", "2", "--k", "2", "--adversary", "tree", "--format", "csv"], capsys)
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0].startswith("t,") or "t" in lines[0].split(",")
    assert len(lines) == 3


def test_budget_exit_2(capsys):
    old = set_budget(hypotheses=10)
    try:
        code, _, err = run(["dims", "--generator", "full", "--d", "3", "--k", "3"], capsys)
    finally:
        set_budget(**old.__dict__)
    assert code == 2 and "budget" in err
    assert get_budget() == old


def test_budget_env_var_and_console_entry():
    env = dict(os.environ, MCLEARN_BUDGET="hypotheses=10")
    proc = subprocess.run([sys.executable, "-m", "mclearn", "dims", "--generator", "full", "--d", "3", "--k", "3"],
                          capture_output=True, text=True, env=env)
    assert proc.returncode == 2 and proc.stdout == ""
