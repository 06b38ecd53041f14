import csv
import json

import pytest

from efgpath import fixture_path
from efgpath.cli import main


@pytest.fixture()
def fig1():
    return str(fixture_path("fig1"))


def test_solve_converges(fig1, capsys):
    assert main(["--json", "solve", fig1]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["status"] == "converged"
    assert max(out["gap"]) <= 1e-3
    assert set(out["gamma"]) == {"1", "2"}


def test_flags_after_subcommand(capsys):
    path = str(fixture_path("fig3"))
    assert main(["solve", path, "--variant", "lbne", "--json"]) == 0
    assert json.loads(capsys.readouterr().out)["status"] == "converged"


def test_malformed_game(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"players": 2,\n "root": ')
    assert main(["solve", str(bad)]) == 2
    assert "line" in capsys.readouterr().err


def test_missing_file(capsys):
    assert main(["solve", "/nonexistent/game.json"]) == 2


def write(tmp_path, name, doc):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return str(p)


def test_verify_type_b_realization(fig1, tmp_path, capsys):
    prof = {"kind": "realization", "profile": {
        "1": {"L": 0, "R": 1, "R,S": 1 / 3, "R,T": 2 / 3},
        "2": {"a": 0, "b": 1, "d": 2 / 3, "f": 1 / 3}}}
    assert main(["verify", fig1, write(tmp_path, "p.json", prof), "--eps", "1e-8"]) == 0
    assert "PASS" in capsys.readouterr().out


def test_verify_type_a_boundary_mixed(fig1, tmp_path, capsys):
    prof = {"kind": "mixed", "profile": {"1": {"{L}": 1}, "2": {"{a,d}": 1 / 12, "{a,f}": 11 / 12}}}
    assert main(["--json", "verify", fig1, write(tmp_path, "p.json", prof)]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["verdict"] == "PASS"
    assert max(out["deviation_slack"]) <= 1e-9


def test_verify_uniform_fails(fig1, tmp_path, capsys):
    prof = {"kind": "mixed", "profile": {"1": [1 / 3] * 3, "2": [0.25] * 4}}
    assert main(["--json", "verify", fig1, write(tmp_path, "p.json", prof)]) == 1
    out = json.loads(capsys.readouterr().out)
    assert out["verdict"] == "FAIL" and max(out["gap"]) > 0


def test_verify_dimension_mismatch(fig1, tmp_path):
    prof = {"kind": "mixed", "profile": {"1": [1, 0], "2": [0.25] * 4}}
    assert main(["verify", fig1, write(tmp_path, "p.json", prof)]) == 2


def test_oracle(fig1, capsys):
    assert main(["--json", "oracle", fig1]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["strategies"]["1"] == ["{L}", "{R,S}", "{R,T}"]
    assert len(out["equilibria"]) >= 3


def test_gen(tmp_path, capsys):
    out = tmp_path / "g.game.json"
    assert main(["--json", "gen", "--type", "1", "--n", "3", "--depth", "5", "--actions", "2", "--out", str(out)]) == 0
    assert json.loads(capsys.readouterr().out)["dim"] == 49
    assert main(["solve", str(out), "--max-steps", "2"]) == 1


def test_export_path(fig1, tmp_path, capsys):
    tr = tmp_path / "trace.json"
    direct = tmp_path / "direct.csv"
    assert main(["--json", "solve", fig1, "--trace-out", str(tr), "--csv", str(direct)]) == 0
    solved = json.loads(capsys.readouterr().out)
    out = tmp_path / "path.csv"
    assert main(["export-path", str(tr), "--out", str(out)]) == 0
    assert out.read_text() == direct.read_text()
    rows = list(csv.DictReader(out.open()))
    assert float(rows[-1]["t"]) < 1e-4
    assert float(rows[-1]["gamma:1:L"]) == pytest.approx(solved["gamma"]["1"]["L"], abs=1e-3)


def test_export_empty_trace(tmp_path):
    assert main(["export-path", write(tmp_path, "t.json", {"gamma_columns": [], "points": []})]) == 2


def test_bench_small(tmp_path, capsys):
    cfg = write(tmp_path, "bench.json", {"rows": [[2, 2, 2, 2]], "instances": 1, "variants": ["lgne"]})
    assert main(["bench", cfg, "--out-dir", str(tmp_path), "--workers", "1"]) == 0
    report = json.loads((tmp_path / "bench_report.json").read_text())
    assert len(report["records"]) == 1
    rows = list(csv.DictReader((tmp_path / "bench_summary.csv").open()))
    assert rows[0]["failure_rate"] == "0.0"
