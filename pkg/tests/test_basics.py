import argparse
import pytest
import sys
import os

# Add src to path
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import config
from modules.errors import (
    ConvergenceError,
    DivergenceError,
    GrowthError,
    MomentRangeError,
    ParameterError,
    SymbolParseError,
    UnsupportedDimensionError,
)
from modules.run_config import RUN_SETTINGS, RunConfig, add_run_arguments, resolve_run_config
from modules.run_log import RunLog


def _namespace(**values):
    namespace = argparse.Namespace(**{key: None for key in RUN_SETTINGS})
    for key, value in values.items():
        setattr(namespace, key, value)
    return namespace


def test_defaults_config():
    # Verify config values are reasonable
    assert config.DEFAULT_DEGREE == 10
    assert config.DEFAULT_N_R == 60
    assert config.DEFAULT_N_THETA == 64
    assert config.DEFAULT_TOL == 1e-8
    assert config.ML_TERM_BUDGET < config.ML_MAX_TERMS
    assert config.PERIOD_SCAN_GRID["re_min"] < config.PERIOD_SCAN_GRID["re_max"]
    assert list(config.MELLIN_DEGREES) == sorted(config.MELLIN_DEGREES)
    assert config.MELLIN_REL_TOL <= config.DEFAULT_TOL
    assert config.PROJECTION_MAX_N_THETA >= config.DEFAULT_N_THETA


def test_config_value_priority(monkeypatch):
    monkeypatch.setenv("FOCKOP_TEST_KEY", "from-env")
    assert config.get_config_value("FOCKOP_TEST_KEY", "default") == "from-env"
    assert config.get_config_value("FOCKOP_TEST_KEY", "default", {"FOCKOP_TEST_KEY": "cli"}) == "cli"
    monkeypatch.delenv("FOCKOP_TEST_KEY")
    assert config.get_config_value("FOCKOP_TEST_KEY", "default") == "default"


def test_thread_count(monkeypatch):
    monkeypatch.setenv("FOCKOP_THREADS", "3")
    assert config.get_thread_count() == 3
    monkeypatch.delenv("FOCKOP_THREADS")
    assert config.get_thread_count() >= 1


@pytest.mark.parametrize("raw", ["0", "-2", "many"])
def test_thread_count_rejects_bad_values(monkeypatch, raw):
    monkeypatch.setenv("FOCKOP_THREADS", raw)
    with pytest.raises(ParameterError):
        config.get_thread_count()


def test_error_exit_codes():
    assert ParameterError("x").exit_code == 1
    assert UnsupportedDimensionError("x").exit_code == 1
    assert SymbolParseError("bad", 3).exit_code == 1
    assert ConvergenceError("x").exit_code == 2
    assert GrowthError("x").exit_code == 2
    assert MomentRangeError(400).exit_code == 2
    assert isinstance(GrowthError("x"), DivergenceError)


def test_error_messages_name_the_culprit():
    assert "position 3" in str(SymbolParseError("bad", 3))
    assert "degree 400" in str(MomentRangeError(400))
    error = DivergenceError("non-finite integrand", location=[1 + 2j])
    assert "node" in str(error)
    assert error.location == [1 + 2j]


def test_run_config_defaults(monkeypatch):
    for setting in RUN_SETTINGS.values():
        if setting["env"]:
            monkeypatch.delenv(setting["env"], raising=False)
    run = resolve_run_config(_namespace())
    assert isinstance(run, RunConfig)
    assert run.degree == config.DEFAULT_DEGREE
    assert run.n_r == config.GRID_DEFAULTS[1]["n_r"]
    assert run.format == "json"
    assert run.space_params().d == 1

    run2 = resolve_run_config(_namespace(d=2))
    assert run2.n_r == config.GRID_DEFAULTS[2]["n_r"]
    assert run2.grid().n_polar == config.GRID_DEFAULTS[2]["n_polar"]


def test_run_config_priority(monkeypatch):
    monkeypatch.setenv("FOCKOP_DEGREE", "7")
    assert resolve_run_config(_namespace()).degree == 7
    assert resolve_run_config(_namespace(degree=4)).degree == 4


def test_run_config_validation(monkeypatch):
    monkeypatch.delenv("FOCKOP_M", raising=False)
    with pytest.raises(ParameterError):
        resolve_run_config(_namespace(m=0.5))
    with pytest.raises(ParameterError):
        resolve_run_config(_namespace(degree=-1))
    monkeypatch.setenv("FOCKOP_M", "abc")
    with pytest.raises(ParameterError):
        resolve_run_config(_namespace())


def test_run_config_echo_has_no_output_path():
    run = resolve_run_config(_namespace(output="out.json"))
    echo = run.as_dict()
    assert "output" not in echo
    assert list(echo)[:4] == ["d", "m", "alpha", "s"]


def test_run_arguments_and_alias():
    parser = argparse.ArgumentParser()
    add_run_arguments(parser)
    args = parser.parse_args(["--max-degree", "6", "--n-theta", "16"])
    assert args.degree == 6
    assert args.n_theta == 16
    assert args.m is None


def test_run_log(tmp_path):
    log = RunLog(tmp_path / "logs" / "run_log.json")
    assert log.load() == []
    log.log("moments", "done", "11 result rows", {"value": 1 + 2j})
    entries = log.load()
    assert len(entries) == 1
    assert entries[0]["command"] == "moments"
    assert entries[0]["metadata"]["value"] == {"re": 1.0, "im": 2.0}
    log.clear()
    assert log.load() == []


def test_run_log_disabled_by_default(monkeypatch):
    monkeypatch.delenv("FOCKOP_RUN_LOG", raising=False)
    assert RunLog.from_env() is None
