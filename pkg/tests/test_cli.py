import json
import pytest
import sys
import os

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import app
from modules.run_config import RUN_SETTINGS


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    for setting in RUN_SETTINGS.values():
        if setting["env"]:
            monkeypatch.delenv(setting["env"], raising=False)
    monkeypatch.delenv("FOCKOP_RUN_LOG", raising=False)


def _run_json(capsys, argv):
    assert app.main(argv) == 0
    return json.loads(capsys.readouterr().out)


def test_moments_document(capsys):
    doc = _run_json(capsys, ["moments", "--degree", "3", "--m", "2"])
    assert list(doc) == ["config", "results", "diagnostics"]
    assert doc["config"]["command"] == "moments"
    assert doc["config"]["m"] == 2.0
    assert "output" not in doc["config"]
    assert len(doc["results"]) == 4
    assert doc["diagnostics"]["pass"] is True


def test_config_echo_carries_command_arguments(capsys):
    doc = _run_json(capsys, ["commute", "--f", "r^2", "--g", "z1", "--degree", "4"])
    assert doc["config"]["arguments"] == {"f": "r^2", "g": "z1", "sweep": None}
    assert doc["config"]["degree"] == 4
    assert doc["config"]["n_r"] == 60
    assert doc["diagnostics"]["commutes"] is False
    assert doc["diagnostics"]["agree"] is True


def test_environment_fills_unset_flags(capsys, monkeypatch):
    monkeypatch.setenv("FOCKOP_DEGREE", "2")
    doc = _run_json(capsys, ["moments"])
    assert len(doc["results"]) == 3
    doc = _run_json(capsys, ["moments", "--max-degree", "1"])
    assert len(doc["results"]) == 2


def test_commute_output_is_reproducible(tmp_path):
    argv = ["commute", "--f", "r^2", "--g", "re(z1)", "--degree", "6", "--m", "1.5"]
    first = tmp_path / "first.json"
    second = tmp_path / "second.json"
    assert app.main(argv + ["--output", str(first)]) == 0
    assert app.main(argv + ["--output", str(second)]) == 0
    assert first.read_bytes() == second.read_bytes()
    doc = json.loads(first.read_text())
    assert "output" not in doc["config"]


def test_csv_output(capsys):
    assert app.main(["eigenvalues", "--f", "r^2", "--degree", "3", "--format", "csv"]) == 0
    out = capsys.readouterr().out.strip().split("\n")
    comments = [line for line in out if line.startswith("# ")]
    assert "# command: \"eigenvalues\"" in comments
    assert "# degree: 3" in comments
    lines = [line for line in out if not line.startswith("# ")]
    assert lines[0] == "zeta,omega.re,omega.im"
    assert len(lines) == 5
    zeta, re, im = lines[1].split(",")
    assert zeta == "0" and abs(float(re) - 1.0) < 1e-12 and abs(float(im)) < 1e-12


def test_eigenvalues_of_polynomial_symbol(capsys):
    doc = _run_json(capsys, ["eigenvalues", "--f", "1 + r^2", "--zeta", "10"])
    # Ω(1 + r^2, ζ) = 2 + ζ on the Gaussian space
    assert abs(doc["results"][-1]["omega"]["re"] - 12.0) < 1e-10


def test_commute_sweep(capsys):
    doc = _run_json(capsys, ["commute", "--f", "r^2", "--g", "z1", "--sweep", "4,6"])
    assert [row["degree"] for row in doc["results"]] == [4, 6]
    assert all(row["commutator_residual"] >= 0.05 for row in doc["results"])
    assert doc["diagnostics"]["degrees"] == [4, 6]


def test_counterexample_command(capsys):
    doc = _run_json(capsys, ["counterexample", "--N", "8", "--degree", "14"])
    assert doc["diagnostics"]["commutes"] is True
    assert doc["diagnostics"]["rotation_invariant"] is False
    assert doc["results"][0]["N"] == 8


def test_period_scan_command(capsys):
    doc = _run_json(capsys, ["period-scan", "--f1", "r^2", "--f2", "r^2", "--n-min", "-2", "--n-max", "2"])
    assert doc["diagnostics"]["periods"] == [0]
    assert doc["diagnostics"]["classification"] == "singleton"


@pytest.mark.parametrize("argv", [
    [],
    ["moments", "--bogus"],
    ["moments", "--m", "0.5"],
    ["moments", "--format", "xml"],
    ["eigenvalues", "--f", "r^"],
    ["eigenvalues", "--f", "z1"],
    ["counterexample", "--N", "6"],
    ["kernel", "--xi", "1,2", "--zeta", "0"],
    ["eigenvalues", "--f", "r^2", "--zeta", "1+"],
    ["commute", "--f", "r^2", "--g", "z1", "--sweep", "4,2.5"],
    ["commute", "--f", "r^2", "--g", "z1", "--sweep", "4,nan"],
])
def test_validation_errors_exit_with_1(argv, capsys):
    assert app.main(argv) == 1
    assert capsys.readouterr().out == ""


def test_numerical_failure_exits_with_2(capsys):
    assert app.main(["eigenvalues", "--f", "exp(r^2)", "--degree", "2"]) == 2
    assert "grows too fast" in capsys.readouterr().err


def test_run_log_records_commands(tmp_path, monkeypatch, capsys):
    path = tmp_path / "run_log.json"
    monkeypatch.setenv("FOCKOP_RUN_LOG", str(path))
    assert app.main(["moments", "--degree", "1"]) == 0
    entries = json.loads(path.read_text())
    assert len(entries) == 1
    assert entries[0]["command"] == "moments"
    assert entries[0]["metadata"]["config"]["degree"] == 1
