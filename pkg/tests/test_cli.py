import json
import subprocess
import sys

import pytest

from stripext.cli import EXIT_INVALID, EXIT_OK, EXIT_VIOLATION, ExperimentConfig, InputError, run

KNAPP = ["--family", "knapp", "--functional", "radon", "--setting", "parabola-transversal",
         "--pq", "2,4", "--grid", "0.25,0.125,0.0625,0.03125"]


def test_classify_text(capsys):
    assert run(["classify", "--setting", "parabola-nontransversal", "--functional", "strip",
                "--p", "4", "--q", "4"]) == EXIT_OK
    assert capsys.readouterr().out.strip() == "Fails ((p,q)≠(4,4))"


def test_classify_json_and_points(capsys):
    assert run(["classify", "--setting", "T", "--point", "0.3333333333333333,0.3333333333333333",
                "--pq", "1,inf", "--json"]) == EXIT_OK
    recs = [json.loads(x) for x in capsys.readouterr().out.splitlines()]
    assert [r["verdict"] for r in recs] == ["Holds", "Holds"]
    assert recs[0]["a"] == 1.0 and recs[0]["b"] == 0.0  # --pq points come first


@pytest.mark.parametrize("argv", [
    ["classify", "--setting", "bogus", "--p", "2", "--q", "2"],
    ["classify", "--setting", "compact-transversal", "--functional", "strip"],
    ["classify", "--setting", "compact-transversal", "--functional", "strip", "--p", "2"],
    ["classify", "--setting", "compact-transversal", "--functional", "strip", "--pq", "x"],
    ["sweep", "--family", "knapp", "--setting", "nowhere"],
    ["perron", "--j0", "-1"],
    ["verify", "--suite", "nope"],
    ["fit", "--input", "/nonexistent.csv"],
    ["no-such-command"],
])
def test_invalid_input_exit_2(argv, capsys):
    assert run(argv) == EXIT_INVALID


def test_perron_trivial(capsys):
    assert run(["perron", "--j0", "0"]) == EXIT_OK
    assert "area 1.0\n" in capsys.readouterr().out


def test_perron_containment_and_polygons(tmp_path, capsys):
    out = tmp_path / "tree.csv"
    assert run(["perron", "--j0", "3", "--check-containment", "--polygons", str(out)]) == EXIT_OK
    text = capsys.readouterr().out
    assert "containment c1=0.04: PASS" in text
    assert len(out.read_text().splitlines()) == 8
    # an infeasible c1 is an input error that names the largest feasible value
    assert run(["perron", "--j0", "3", "--check-containment", "--c1", "50"]) == EXIT_INVALID
    assert "largest feasible c1" in capsys.readouterr().err


def test_verify_suite_classifier(capsys):
    assert run(["verify", "--suite", "classifier"]) == EXIT_OK
    assert capsys.readouterr().out.startswith("PASS classifier")


def test_bn_check_exit_codes(capsys):
    assert run(["bn-check", "--t", "0"]) == EXIT_OK
    assert capsys.readouterr().out.startswith("PASS bn")
    assert run(["bn-check", "--t", "0", "--tol", "1e-9"]) == EXIT_VIOLATION


def test_config_round_trip():
    cfg = ExperimentConfig(family="knapp", params={"xi0": 1.0}, pq=[[2.0, 4.0]])
    back = ExperimentConfig.from_json(cfg.to_json())
    assert back == cfg
    with pytest.raises(InputError):
        ExperimentConfig.from_json('{"colour": 1}')
    with pytest.raises(InputError):
        ExperimentConfig(params={"bogus": 1}).sweep_config()


def test_sweep_config_file_and_override(tmp_path, capsys):
    cfg = ExperimentConfig(family="knapp", functional="radon", setting="parabola-transversal",
                           pq=[[4.0, 2.0]], grid=[0.25, 0.125])
    path = tmp_path / "cfg.json"
    path.write_text(cfg.to_json())
    assert run(["sweep", "--config", str(path), "--format", "json"]) == EXIT_OK
    doc = json.loads(capsys.readouterr().out)
    assert [r["p"] for r in doc["rows"]] == [4.0, 4.0]
    assert doc["meta"]["config"]["grid"] == [0.25, 0.125]
    assert run(["sweep", "--config", str(path), "--pq", "2,4"]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("family,delta,p,q,")
    assert lines[1].split(",")[2:4] == ["2", "4"]


def test_sweep_output_independent_of_workers(tmp_path, monkeypatch):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(["sweep", *KNAPP, "-o", str(a)]) == EXIT_OK
    monkeypatch.setenv("STRIPEXT_WORKERS", "2")
    assert run(["sweep", *KNAPP, "-o", str(b)]) == EXIT_OK
    assert a.read_bytes() == b.read_bytes()


def test_fit_from_file(tmp_path, capsys):
    path = tmp_path / "s.csv"
    assert run(["sweep", *KNAPP, "-o", str(path)]) == EXIT_OK
    assert run(["fit", "--input", str(path), "--min-exponent", "0.2"]) == EXIT_OK
    out = capsys.readouterr().out
    assert out.startswith("p=2 q=4 model=power exponent=0.25")
    assert run(["fit", "--input", str(path), "--min-exponent", "0.3"]) == EXIT_VIOLATION
    assert "VIOLATION" in capsys.readouterr().out


def test_console_entry_point():
    r = subprocess.run([sys.executable, "-m", "stripext.cli", "classify", "--setting",
                        "compact-transversal", "--functional", "strip", "--p", "2", "--q", "2"],
                       capture_output=True, text=True)
    assert r.returncode == 0
    assert r.stdout.startswith("Holds")
