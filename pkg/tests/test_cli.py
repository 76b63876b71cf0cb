import json
import subprocess
import sys

import pytest

from fusion import cli, sexp

from conftest import PROGRAMS, needs_smt


def run(*args):
    return cli.run([str(a) for a in args])


@needs_smt
def test_check_safe(capsys):
    assert run("check", PROGRAMS / "ex1.lf") == 0
    assert "SAFE" in capsys.readouterr().out


@needs_smt
def test_check_unsafe_is_located(capsys):
    assert run("check", PROGRAMS / "ex1_bad.lf") == 1
    out = capsys.readouterr().out
    assert "ex1_bad.lf:9:5: invalid" in out
    assert "x = 0" in out


@needs_smt
def test_json_output(capsys):
    assert run("check", PROGRAMS / "ex1_bad.lf", "--json") == 1
    doc = json.loads(capsys.readouterr().out)
    assert doc["status"] == "unsafe"
    f, = doc["failures"]
    assert (f["line"], f["col"]) == (9, 5)
    assert f["model"]["x"] == "0"
    assert doc["stats"]["flat_clauses"] == 2


def test_missing_file(capsys):
    assert run("check", "does-not-exist.lf") == 2
    assert "io error" in capsys.readouterr().err


def test_parse_error(tmp_path, capsys):
    p = tmp_path / "bad.lf"
    p.write_text("f :: Int -> Int\nf x = = 3\n")
    assert run("check", p) == 2
    assert "bad.lf:2:7: syntax error" in capsys.readouterr().err


def test_type_error_json(tmp_path, capsys):
    p = tmp_path / "bad.lf"
    p.write_text("f :: Int -> Int\nf x = y\n")
    assert run("check", p, "--json") == 2
    doc = json.loads(capsys.readouterr().out)
    assert doc["status"] == "error" and doc["kind"] == "type"


def test_eliminate_all_rejects_cycles(capsys):
    assert run("check", PROGRAMS / "sum.lf", "--eliminate", "all") == 2
    assert "cyclic" in capsys.readouterr().err


@needs_smt
def test_qualifier_file(tmp_path):
    q = tmp_path / "q.txt"
    q.write_text("qualif Pos(v:Int): 0 <= v\n")
    assert run("check", PROGRAMS / "sum.lf") == 1
    assert run("check", PROGRAMS / "sum.lf", "--qualifiers", q) == 0
    assert run("check", PROGRAMS / "sum.lf", "--scrape-quals") == 0


@needs_smt
def test_stats_json(capsys):
    assert run("stats", PROGRAMS / "ex2.lf", "--json") == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["flat_clauses"] == 4
    for key in ("kvars", "cuts", "eliminated", "vc_atoms", "smt_queries", "seconds"):
        assert key in doc


@needs_smt
def test_dumps(tmp_path):
    c, v = tmp_path / "c.sexp", tmp_path / "vc.smt2"
    assert run("check", PROGRAMS / "ex1.lf", "--dump-constraints", c, "--dump-vc", v) == 0
    assert sexp.parse_constraints(c.read_text()).kvs
    out = subprocess.run(["z3", str(v)], capture_output=True, text=True).stdout
    assert out.strip() == "unsat"


@needs_smt
def test_no_scope_and_cut_toplevel_flags():
    assert run("check", PROGRAMS / "ex2.lf", "--no-scope") == 0
    assert run("check", PROGRAMS / "sum.lf", "--cut-toplevel", "off", "--scrape-quals") == 0


@needs_smt
def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "fusion", "check", str(PROGRAMS / "ex4.lf")],
                       capture_output=True, text=True)
    assert r.returncode == 0, r.stderr


@needs_smt
@pytest.mark.parametrize("name", ["ex1.lf", "ex3_bad.lf"])
def test_exit_codes_are_stable(name):
    assert len({run("check", PROGRAMS / name) for _ in range(3)}) == 1
