import csv
import io
import subprocess
import sys

import pytest

from psapilp.cli import main

from conftest import UKP_TEXT


@pytest.fixture
def ukp_file(tmp_path):
    path = tmp_path / "ukp.pilp"
    path.write_text(UKP_TEXT)
    return str(path)


def _out(capsys):
    return dict(line.split(" ", 1) for line in capsys.readouterr().out.splitlines()
                if " " in line and not line.startswith("trace"))


def test_solve_ukp(ukp_file, capsys):
    assert main(["solve", ukp_file]) == 0
    out = _out(capsys)
    assert out["status"] == "optimal"
    assert out["value"] == "11" and out["x"] == "0 1 1"
    assert out["levels"] == "3" and out["av_pct"] == "66.67"


@pytest.mark.parametrize("solver", ["bb", "brute"])
def test_solve_with_oracles(ukp_file, capsys, solver):
    assert main(["solve", "--solver", solver, ukp_file]) == 0
    assert _out(capsys)["value"] == "11"


def test_solve_trace(ukp_file, capsys):
    assert main(["solve", "--trace", "--split", "first", "--list", "fifo", ukp_file]) == 0
    text = capsys.readouterr().out
    assert "trace level 13" in text and "trace incumbent 12 (0, 0, 1) 8" in text


def test_infeasible_exit_code(tmp_path, capsys):
    path = tmp_path / "inf.pilp"
    path.write_text("pilp 1 2\nobj 0 1\nrow 1 2\nrow -1 -2\nupper 1\n")
    assert main(["solve", str(path)]) == 1
    assert _out(capsys)["status"] == "infeasible"
    assert main(["solve", "--solver", "bb", str(path)]) == 1
    empty = tmp_path / "empty.pilp"
    empty.write_text("pilp 1 1\nobj 0 1\nrow -1 0\n")
    assert main(["dump-projections", str(empty)]) == 1


def test_input_errors(tmp_path, capsys):
    bad = tmp_path / "bad.pilp"
    bad.write_text("pilp 2 1\nobj 0 1.5 1\nrow 1 1 1\n")
    assert main(["solve", str(bad)]) == 2
    err = capsys.readouterr().err
    assert "line 2" in err
    assert main(["solve", str(tmp_path / "missing.pilp")]) == 2
    assert main(["generate", "--n", "3", "--m", "1", "--alpha", "1.5"]) == 2


def test_resource_limit_exit_code(tmp_path, capsys):
    path = tmp_path / "g.pilp"
    assert main(["generate", "--n", "14", "--m", "2", "--seed", "4", "--out", str(path)]) == 0
    assert main(["solve", "--time-limit", "0", str(path)]) == 3
    assert _out(capsys)["status"] == "aborted:time_limit"
    assert main(["solve", "--solver", "bb", "--node-cap", "1", str(path)]) == 3


def test_generate_is_byte_exact(tmp_path, capsys):
    a, b = tmp_path / "a.pilp", tmp_path / "b.pilp"
    for path in (a, b):
        assert main(["generate", "--n", "8", "--m", "3", "--corr", "weak", "--seed", "11",
                     "--out", str(path)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert a.read_text().startswith("pilp 8 3\n")
    assert main(["generate", "--n", "2", "--m", "1", "--seed", "1"]) == 0
    assert capsys.readouterr().out.startswith("pilp 2 1\n")


def test_verify(capsys):
    assert main(["verify", "--n", "6", "--m", "2", "--count", "3", "--seed", "5"]) == 0
    assert "mismatches 0 of 3" in capsys.readouterr().out


def test_bench(tmp_path):
    spec = tmp_path / "spec.csv"
    spec.write_text("n,m,alpha,corr,seed,count\n6,2,0.5,uncorrelated,1,2\n")
    out = tmp_path / "report.csv"
    assert main(["bench", "--spec", str(spec), "--out", str(out), "--solvers", "psa,bb"]) == 0
    rows = list(csv.DictReader(io.StringIO(out.read_text())))
    assert len(rows) == 4
    assert rows[0]["solver"] == "psa" and rows[1]["solver"] == "bb"
    assert rows[0]["value"] == rows[1]["value"]
    assert main(["bench", "--spec", str(tmp_path / "none.csv")]) == 2


def test_dump_projections(ukp_file, capsys):
    assert main(["dump-projections", ukp_file, "--level", "11"]) == 0
    rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    assert list(rows[0]) == ["var", "e", "low", "up", "low_exact", "up_exact", "in_range"]
    members = {(r["var"], r["e"]) for r in rows if r["in_range"] == "1"}
    assert members == {("0", "0"), ("0", "1"), ("1", "0"), ("1", "1"), ("2", "1")}
    assert main(["dump-projections", ukp_file]) == 0
    header = capsys.readouterr().out.splitlines()[0]
    assert header == "var,e,low,up,low_exact,up_exact"


def test_module_entry_point(ukp_file):
    proc = subprocess.run([sys.executable, "-m", "psapilp", "solve", ukp_file],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "value 11" in proc.stdout
