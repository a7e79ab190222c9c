import json
from pathlib import Path

import pytest

from hodge_limits.cli import main

SPECS = sorted((Path(__file__).resolve().parents[1] / "specs").glob("*.json"))


def structured(out):
    return json.loads((out / "report.structured").read_text())


def test_bundled_specs_exist():
    names = {p.stem for p in SPECS}
    assert {"s1", "s2", "pure_n0", "twisted_s2"} <= names


def test_s1_report(tmp_path, capsys):
    out = tmp_path / "s1"
    assert main(["analyze", str(SPECS[0].parent / "s1.json"), "--out", str(out)]) == 0
    r = structured(out)
    assert r["weight_filtration"]["dims"]["-1"] == 1 and r["weight_filtration"]["dims"]["1"] == 2
    assert r["triple"]["H"] == [["1", "0"], ["0", "-1"]]
    assert r["limits"]["F_H_equals_F_lim"] is True
    assert not (r["sl2_series"]["B"] or r["sl2_series"]["C"] or r["sl2_series"]["h"])
    assert (out / "report.txt").exists()
    assert (out / "curves" / "bigrading.csv").read_text().startswith("x,y,quantity,value\n")
    assert (out / "figures" / "bigrading.png").stat().st_size > 0
    assert "weight filtration dims" in capsys.readouterr().out


def test_pure_case_note(tmp_path):
    out = tmp_path / "pure"
    assert main(["analyze", str(SPECS[0].parent / "pure_n0.json"), "--out", str(out)]) == 0
    assert "pure case, F_lim in D" in (out / "report.txt").read_text()


def test_malformed_row_is_line_anchored(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{\n "version": 1,\n "kind": "degeneration",\n "name": "bad",\n "dim": 2,\n'
                   ' "weight": 1,\n "Q": [[0, 1],\n       [1]],\n "N": [[0, 0], [0, 0]],\n'
                   ' "F": {"1": [[1, 1]]}\n}\n')
    assert main(["analyze", str(bad)]) == 2
    err = capsys.readouterr().err
    assert "line 8" in err


def test_float_is_rejected(tmp_path, capsys):
    bad = tmp_path / "float.json"
    bad.write_text('{"version": 1, "kind": "model", "name": "x",\n "summands": [[1.5, 0, 0]]}\n')
    assert main(["analyze", str(bad)]) == 2
    assert "line 2" in capsys.readouterr().err


def test_math_failure_exits_3(tmp_path, capsys):
    spec = tmp_path / "notpol.json"
    spec.write_text(json.dumps({"version": 1, "kind": "degeneration", "name": "np", "dim": 2, "weight": 1,
                                "Q": [[0, 1], [1, 0]], "N": [[0, 0], [0, 0]],
                                "F": {"0": [[1, 0], [0, 1]], "1": [[1, -1]], "2": []}}, indent=1))
    assert main(["analyze", str(spec)]) == 3
    assert "mathematical check failed" in capsys.readouterr().err


def test_usage_errors(tmp_path, capsys):
    assert main(["frobnicate"]) == 2
    assert main(["verify", str(SPECS[0]), "no-such-check"]) == 2
    assert main(["make-model", "sm", "-1"]) == 2
    assert main(["make-model", "twisted", "2", "--eps", "0"]) == 2
    assert main(["make-model", "twisted", "0"]) == 2
    assert main(["analyze", str(tmp_path / "missing.json")]) == 2
    assert main(["analyze", str(SPECS[0]), "--order", "0"]) == 2


@pytest.mark.parametrize("args", [["sm", "0"], ["sm", "1"], ["sm", "3"], ["sum", "2,0"], ["sum", "3,1,1"],
                                  ["twisted", "1"], ["twisted", "2", "--eps", "1/2"]])
def test_make_model_round_trip(tmp_path, args):
    spec = tmp_path / "gen.json"
    assert main(["make-model", *args, "--out", str(spec)]) == 0
    assert main(["analyze", str(spec), "--out", str(tmp_path / "o")]) == 0
    assert structured(tmp_path / "o")["status"] == "ok"


def test_make_model_refuses_overwrite(tmp_path, capsys):
    spec = tmp_path / "gen.json"
    assert main(["make-model", "sm", "1", "--out", str(spec)]) == 0
    assert main(["make-model", "sm", "2", "--out", str(spec)]) == 2
    assert main(["make-model", "sm", "2", "--out", str(spec), "--force"]) == 0
    assert json.loads(spec.read_text())["summands"] == [[2, 0, 0]]


def test_output_directory_needs_force(tmp_path):
    out = tmp_path / "o"
    spec = str(SPECS[0].parent / "s1.json")
    assert main(["analyze", spec, "--out", str(out)]) == 0
    assert main(["analyze", spec, "--out", str(out)]) == 2
    assert main(["analyze", spec, "--out", str(out), "--force"]) == 0


def test_analyze_is_deterministic(tmp_path):
    spec = str(SPECS[0].parent / "twisted_s2.json")
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["analyze", spec, "--out", str(a)]) == 0
    assert main(["analyze", spec, "--out", str(b)]) == 0
    assert (a / "report.structured").read_bytes() == (b / "report.structured").read_bytes()
    assert (a / "curves" / "bigrading.csv").read_bytes() == (b / "curves" / "bigrading.csv").read_bytes()


def test_verify_on_models(tmp_path):
    out = tmp_path / "v"
    spec = str(SPECS[0].parent / "s2.json")
    assert main(["verify", spec, "growth", "higgs", "--out", str(out)]) == 0
    r = structured(out)
    assert r["verify"]["growth"]["verdict"] == "PASS"
    assert r["verify"]["higgs"]["verdict"] == "PASS"
    assert r["verify"]["higgs"]["x2_value"] == pytest.approx(1.0, rel=1e-10)
    for name in ("growth.csv", "higgs.csv"):
        assert (out / "curves" / name).exists()
    assert (out / "figures" / "growth.png").exists()


def test_verify_on_twisted_datum(tmp_path):
    out = tmp_path / "v"
    spec = str(SPECS[0].parent / "twisted_s2.json")
    assert main(["verify", spec, "decay", "orbit-scan", "growth", "--out", str(out)]) == 0
    r = structured(out)
    assert r["verify"]["decay"]["verdict"] == "PASS"
    assert r["verify"]["orbit-scan"]["verdict"] == "RECORDED"
    assert r["verify"]["growth"]["verdict"] == "SKIP"
    assert all(v < 1e-8 for v in r["verify"]["decay"]["orbit_identity_error"].values())


def test_verify_commutator(tmp_path):
    out = tmp_path / "c"
    assert main(["verify", str(SPECS[0].parent / "s1.json"), "commutator", "--out", str(out)]) == 0
    r = structured(out)
    assert r["verify"]["commutator"]["equality_attained"]
