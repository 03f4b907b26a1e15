import json
import subprocess
import sys

import pytest

from pebres.cli import run
from pebres.formula import pebbling_contradiction, strip_targets, to_dimacs
from pebres.hiding import potential, spreading_check
from pebres.pebbling import BwConfig, exact_price
from pebres.resolution import build_linear, replay
from conftest import pyramid


def call(capsys, *argv):
    code, report = run(list(argv))
    out = capsys.readouterr()
    return code, report, out


def test_gen_golden(capsys, tmp_path):
    out = tmp_path / "p2.cnf"
    code, report, _ = call(capsys, "gen", "pyramid:2", "--degree", "2", "--out", str(out))
    assert code == 0
    assert out.read_text() == to_dimacs(pebbling_contradiction(pyramid(2), 2))
    assert report["results"]["clauses"] == 17 and report["results"]["vars"] == 12


def test_gen_stdout_report_on_stderr(capsys):
    code, _, out = call(capsys, "gen", "--graph", "pyramid:1")
    assert code == 0
    assert out.out == to_dimacs(pebbling_contradiction(pyramid(1), 1))
    assert json.loads(out.err)["verdict"] == "pass"


def test_build_and_check(capsys, tmp_path):
    cnf, trace = tmp_path / "f.cnf", tmp_path / "t.drv"
    call(capsys, "gen", "pyramid:2", "-d", "2", "-o", str(cnf))
    code, report, _ = call(capsys, "build", "pyramid:2", "-d", "2", "-o", str(trace))
    assert code == 0
    m = replay(pebbling_contradiction(pyramid(2), 2), build_linear(pyramid(2), 2))
    assert report["results"]["clause_space"] == m.clause_space
    code, report, _ = call(capsys, "check", "--cnf", str(cnf), "--trace", str(trace))
    assert code == 0
    assert report["results"]["length"] == m.length and report["results"]["width"] == m.width


def test_check_bad_trace(capsys, tmp_path):
    cnf, trace = tmp_path / "f.cnf", tmp_path / "t.drv"
    call(capsys, "gen", "pyramid:1", "-o", str(cnf))
    trace.write_text("p drv f.cnf\nd 1\nd 2\ni 1 2 1\n")
    code, report, _ = call(capsys, "check", "--cnf", str(cnf), "--trace", str(trace))
    assert code == 1
    assert report["verdict"] == "fail" and report["results"]["step"] == 3


@pytest.mark.parametrize("mode", ["black", "bw"])
def test_price_matches_library(capsys, mode):
    code, report, _ = call(capsys, "price", "pyramid:3", "--mode", mode)
    assert code == 0
    assert report["results"]["price"] == exact_price(pyramid(3), mode).price


def test_price_blob(capsys):
    code, report, _ = call(capsys, "price", "pyramid:1", "--mode", "blob")
    assert (code, report["results"]["price"]) == (0, 3)


def test_budget_exit_code(capsys):
    code, report, _ = call(capsys, "price", "pyramid:3", "--budget", "3")
    assert code == 3 and report["verdict"] == "budget exceeded"


@pytest.mark.parametrize("argv", [
    ["gen", "pyramid:x"], ["gen", "cube:2"], ["gen", "pyramid:2", "-d", "9"], ["gen"],
    ["check", "pyramid:2"], ["check", "--trace", "t.drv"], ["potential", "pyramid:2"],
    ["potential", "pyramid:2", "--set", "q9"], ["check", "--cnf", "/nonexistent", "--trace", "/nonexistent"],
])
def test_usage_errors(capsys, argv):
    code, report, _ = call(capsys, *argv)
    assert code == 2 and report["verdict"] == "error"


def test_argparse_errors(capsys):
    assert run(["frobnicate"])[0] == 2
    assert run(["price", "pyramid:2", "--mode", "red"])[0] == 2
    capsys.readouterr()


def test_translate_and_verify(capsys, tmp_path):
    trace, out = tmp_path / "t.drv", tmp_path / "blob.json"
    call(capsys, "build", "pyramid:1", "-d", "2", "--no-targets", "-o", str(trace))
    code, report, _ = call(capsys, "translate", "pyramid:1", "-d", "2", "--trace", str(trace), "-o", str(out))
    assert code == 0 and report["results"]["fallback_steps"] == []
    doc = json.loads(out.read_text())
    code, rep2, _ = call(capsys, "check", "pyramid:1", "--blob", str(out))
    assert code == 0 and rep2["results"]["final"] == ["[z]<>"]
    assert rep2["results"]["cost"] == report["results"]["max_cost"] == 3
    assert len(doc["moves"]) == report["results"]["moves"]
    code, rep3, _ = call(capsys, "verify-bounds", "pyramid:1", "-d", "2", "--trace", str(trace))
    assert code == 0
    assert rep3["results"]["cost_bound"] == "pass" and rep3["results"]["space_bound"] == "pass"


def test_potential(capsys):
    code, report, _ = call(capsys, "potential", "pyramid:6", "--set", "w1,s3")
    assert report["results"]["measure"] == 5
    code, report, _ = call(capsys, "potential", "pyramid:6", "--black", "z,y1", "--white", "x1,x2")
    g = pyramid(6)
    want = potential(g, BwConfig(g.vs(["z", "y1"]), g.vs(["x1", "x2"])))
    assert report["results"]["potential"] == want.potential == 6
    code, report, _ = call(capsys, "potential", "pyramid:3", "--blob", "[z]<>")
    assert report["results"]["potential"] == 5


def test_spreading(capsys):
    code, report, _ = call(capsys, "spreading", "pyramid:3", "--jobs", "2")
    assert code == 0
    assert report["results"]["spreading"] == spreading_check(pyramid(3)).as_dict()


def test_text_format(capsys):
    code, _, out = call(capsys, "price", "tree:2", "--mode", "bw", "--format", "text")
    assert code == 0
    assert out.out.startswith("price: pass") and "  price: 4" in out.out
    code, _, out = call(capsys, "gen", "pyramid:q", "--format", "text")
    assert code == 2 and "error:" in out.out


def test_report_file(capsys, tmp_path):
    rep = tmp_path / "r.json"
    code, _, out = call(capsys, "gen", "tree:1", "--report", str(rep))
    assert code == 0 and json.loads(rep.read_text())["command"] == "gen"
    assert out.err == ""


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "pebres", "gen", "pyramid:1", "--no-targets"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert proc.stdout == to_dimacs(strip_targets(pebbling_contradiction(pyramid(1), 1)))
