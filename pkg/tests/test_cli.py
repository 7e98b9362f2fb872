import csv
import io
import json
from fractions import Fraction

import pytest

from prguess import cli
from prguess.behavior import pr_product
from prguess.certify import Certificate
from prguess.lp import LpError

F = Fraction


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_solve_examples(capsys, tmp_path):
    path = tmp_path / "c.json"
    code, out, _ = run(capsys, "solve", "--n", "2", "--scenario", "tons", "--v", "1/2", "--mode", "exact",
                       "--out", str(path))
    assert code == 0
    assert "G=5/8" in out and "certificate: verified" in out and "bounds=[9/16, 3/4]" in out
    assert Certificate.load(path).objective == F(5, 8)
    code, out, _ = run(capsys, "solve", "--n", "1", "--scenario", "abns", "--v", "1", "--mode", "exact",
                       "--out", str(tmp_path / "d.json"))
    assert code == 0 and "G=1/2" in out and "H=1 " in out
    code, out, _ = run(capsys, "solve", "--n", "2", "--scenario", "fullns", "--v", "1/3", "--mode", "exact",
                       "--out", str(tmp_path / "e.json"))
    assert code == 0 and "G=25/36" in out


def test_solve_default_path(capsys, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert run(capsys, "solve", "--n", "1", "--scenario", "tons", "--v", "1/4")[0] == 0
    assert (tmp_path / "cert_tons_n1_v1_4.json").exists()


def test_solve_full_formulation(capsys, tmp_path):
    code, out, _ = run(capsys, "solve", "--n", "2", "--scenario", "abns", "--v", "1/4", "--formulation", "full",
                       "--x-star", "10", "--y-star", "11", "--out", str(tmp_path / "f.json"))
    assert code == 0 and "G=7/8" in out
    assert Certificate.load(tmp_path / "f.json").metadata()["y_star"] == "11"


@pytest.mark.parametrize("argv", [
    ["solve", "--n", "0", "--scenario", "tons", "--v", "1/2"],
    ["solve", "--n", "2", "--scenario", "bogus", "--v", "1/2"],
    ["solve", "--n", "2", "--scenario", "tons", "--v", "0.5", "--mode", "exact"],
    ["solve", "--n", "2", "--scenario", "tons", "--v", "3/2"],
    ["solve", "--n", "2", "--scenario", "tons", "--v", "1/2", "--x-star", "01"],
    ["solve", "--n", "2", "--scenario", "tons", "--v", "1/2", "--formulation", "full", "--x-star", "012"],
    ["solve", "--n", "2", "--scenario", "tons"],
    ["sweep", "--n", "2", "--scenario", "tons", "--v-grid", "0:1"],
    ["sweep", "--n", "2", "--scenario", "tons", "--v", "1/2", "--jobs", "0"],
    ["nonsense"],
])
def test_invalid_config_exit_2(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 2
    assert err.startswith("error:") and err.count("\n") == 1


def test_sweep_rows_and_bounds(capsys, tmp_path):
    out_path = tmp_path / "s.csv"
    code, out, _ = run(capsys, "sweep", "--n", "2", "--scenario", "all", "--v-grid", "0:1:11", "--jobs", "1",
                       "--out", str(out_path))
    assert code == 0 and "44 rows" in out
    rows = list(csv.DictReader(out_path.open()))
    assert len(rows) == 44
    assert list(rows[0]) == cli.CSV_COLUMNS
    for row in rows:
        assert F(row["lower_bound"]) <= F(row["G"]) <= F(row["upper_bound"])
        if row["scenario"] == "tons":
            assert F(row["G"]) == 1 - 3 * F(row["v"]) / 4


def test_sweep_fullns_n3(capsys):
    code, out, _ = run(capsys, "sweep", "--n", "3", "--scenario", "fullns", "--v", "1/4,1/2,1", "--jobs", "1")
    assert code == 0
    for row in csv.DictReader(io.StringIO(out)):
        assert F(row["G"]) == (1 - F(row["v"]) / 2) ** 3


def test_sweep_deterministic(capsys, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    argv = ["sweep", "--n", "1,2", "--scenario", "abns,wtons", "--v", "1/3,2/3"]
    assert run(capsys, *argv, "--jobs", "1", "--out", str(a))[0] == 0
    assert run(capsys, *argv, "--jobs", "2", "--out", str(b))[0] == 0
    assert a.read_bytes() == b.read_bytes()


def test_sweep_float_grid(capsys):
    code, out, _ = run(capsys, "sweep", "--n", "2", "--scenario", "tons", "--v-grid", "0:1:5", "--mode", "float",
                       "--jobs", "1")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and [r["v"] for r in rows] == ["0.0", "0.25", "0.5", "0.75", "1.0"]
    assert all(abs(float(r["G"]) - (1 - 0.75 * float(r["v"]))) < 1e-9 for r in rows)


def test_sweep_failure_removes_partial(capsys, tmp_path, monkeypatch):
    def boom(task):
        raise LpError("synthetic failure")

    monkeypatch.setattr(cli, "_solve_task", boom)
    out_path = tmp_path / "s.csv"
    code, _, err = run(capsys, "sweep", "--n", "1", "--scenario", "tons", "--v", "1/2", "--jobs", "1",
                       "--out", str(out_path))
    assert code == 3 and "synthetic failure" in err
    assert list(tmp_path.iterdir()) == []


def test_jobs_env(monkeypatch):
    monkeypatch.setenv(cli.JOBS_ENV, "3")
    assert cli.default_jobs(10) == 3
    monkeypatch.setenv(cli.JOBS_ENV, "x")
    with pytest.raises(cli.ConfigError):
        cli.default_jobs(10)
    monkeypatch.delenv(cli.JOBS_ENV)
    assert cli.default_jobs(1) == 1


def test_parse_v_grid():
    from prguess.numeric import Mode

    assert cli.parse_v_grid("0:1:5", Mode.EXACT) == [F(0), F(1, 4), F(1, 2), F(3, 4), F(1)]
    assert cli.parse_v_grid("1/2:1/2:1", Mode.EXACT) == [F(1, 2)]
    with pytest.raises(ValueError):
        cli.parse_v_grid("0:2:3", Mode.EXACT)


def test_verify_and_tamper(capsys, tmp_path):
    path = tmp_path / "c.json"
    assert run(capsys, "solve", "--n", "2", "--scenario", "tons", "--v", "1/2", "--out", str(path))[0] == 0
    code, out, _ = run(capsys, "verify", str(path))
    assert code == 0 and "ACCEPT" in out and "objective=5/8" in out
    data = json.loads(path.read_text())
    j, val = data["primal"][0]
    data["primal"][0] = [j, str(F(val) + F(1, 1000))]
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(data))
    code, out, _ = run(capsys, "verify", str(bad))
    assert code == 1 and "REJECT" in out
    assert run(capsys, "verify", str(tmp_path / "missing.json"))[0] == 2


def test_verify_sandwich(capsys, tmp_path):
    lo, hi = tmp_path / "t.json", tmp_path / "w.json"
    run(capsys, "solve", "--n", "2", "--scenario", "tons", "--v", "1/2", "--out", str(lo))
    run(capsys, "solve", "--n", "2", "--scenario", "wtons", "--v", "1/2", "--out", str(hi))
    code, out, _ = run(capsys, "verify", str(lo), str(hi))
    assert code == 0 and "objective=5/8" in out
    assert run(capsys, "verify", str(hi), str(lo))[0] == 1


def test_vertex(capsys, tmp_path):
    code, out, _ = run(capsys, "vertex", "--scenario", "wtons")
    assert code == 0 and out.strip() == "vertex: true"
    code, out, _ = run(capsys, "vertex", "--scenario", "abns", "--v", "-1")
    assert code == 1 and out.strip() == "vertex: false"
    path = tmp_path / "b.json"
    path.write_text(pr_product(1, 1).to_json())
    assert run(capsys, "vertex", "--scenario", "tons", "--behavior", str(path))[0] == 0
    path.write_text("{}")
    assert run(capsys, "vertex", "--scenario", "tons", "--behavior", str(path))[0] == 2


def test_table1_check_n2(capsys):
    code, out, _ = run(capsys, "table1", "--check", "--n", "2", "--jobs", "1")
    assert code == 0 and out.strip().endswith("table1: ok")
    assert run(capsys, "table1", "--n", "4")[0] == 2


def test_table1_mismatch(capsys, monkeypatch):
    monkeypatch.setattr(cli, "analytic_reference_exact", lambda n, s, v: F(0))
    code, out, _ = run(capsys, "table1", "--check", "--n", "2", "--scenario", "tons", "--jobs", "1")
    assert code == 1 and "MISMATCH tons n=2 v=1/10" in out


def test_export(capsys, tmp_path):
    path = tmp_path / "lp.json"
    assert run(capsys, "export", "--n", "1", "--scenario", "tons", "--v", "1/2", "--out", str(path))[0] == 0
    data = json.loads(path.read_text())
    assert data["metadata"]["v"] == "1/2"
    code, out, _ = run(capsys, "export", "--n", "1", "--scenario", "tons", "--v", "1/2")
    assert code == 0 and json.loads(out) == data
