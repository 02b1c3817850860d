import json
from pathlib import Path

import pytest

import benchmarks
from gpp.config import ExperimentFile, ProbeSettings, Settings
from gpp.errors import ConfigError
from gpp.solver import resolve_problem

CONFIG_DIR = Path(__file__).resolve().parents[1] / "configs"


def test_unknown_key_is_named():
    with pytest.raises(ConfigError) as info:
        ExperimentFile.parse({"problem": "lq100", "hiden_size": 8})
    assert "hiden_size" in str(info.value)


def test_invalid_value_is_rejected():
    with pytest.raises(ConfigError) as info:
        ExperimentFile.parse({"problem": "lq100", "M": 0})
    assert "M" in str(info.value)


def test_missing_keys_come_from_defaults():
    experiment = ExperimentFile.parse({"problem": "lq100", "K": 5, "rho0": 0.1})
    config = experiment.to_run_config(benchmarks.default_config("lq100"))
    assert config.K == 5
    assert config.M == 2000 and config.N == 20 and config.hidden_size == 256
    assert config.schedule.rho0 == 0.1 and config.schedule.decay_power == 0.5
    assert config.y_index == "n_plus_1"


def test_cli_seed_and_problem_params_override():
    experiment = ExperimentFile.parse({"problem": "meanvar", "seed": 4, "problem_params": {"eta": 2.0}})
    config = experiment.to_run_config(benchmarks.default_config("meanvar"), seed=9)
    assert config.seed == 9
    assert config.problem_params == {"eta": 2.0}
    assert config.case_id == "case1"


def test_load_reports_missing_and_malformed_files(tmp_path):
    with pytest.raises(ConfigError):
        ExperimentFile.load(tmp_path / "absent.json")
    broken = tmp_path / "broken.json"
    broken.write_text("{\"problem\": ")
    with pytest.raises(ConfigError):
        ExperimentFile.load(broken)
    good = tmp_path / "good.json"
    good.write_text(json.dumps({"problem": "sine", "K": 2}))
    assert ExperimentFile.load(good).K == 2


@pytest.mark.parametrize("path", sorted(CONFIG_DIR.glob("*.json")), ids=lambda p: p.stem)
def test_shipped_configs_build(path):
    experiment = ExperimentFile.load(path)
    config = experiment.to_run_config(benchmarks.default_config(experiment.problem))
    problem = resolve_problem(config)
    assert problem.T == config.T


def test_probe_block_defaults():
    experiment = ExperimentFile.parse({"problem": "lq100", "probe": {"policy": "oracle"}})
    assert experiment.probe.n_inner == ProbeSettings().n_inner
    with pytest.raises(ConfigError):
        ExperimentFile.parse({"problem": "lq100", "probe": {"n_inner": 1}})


def test_settings_from_environment(monkeypatch, tmp_path):
    monkeypatch.setenv("PGP_THREADS", "2")
    monkeypatch.setenv("PGP_API_PORT", "9001")
    monkeypatch.setenv("PGP_OUTPUT_DIR", str(tmp_path))
    settings = Settings.from_env(dotenv=False)
    assert settings.threads == 2
    assert settings.api_port == 9001
    assert settings.output_dir == tmp_path


def test_settings_reject_bad_numbers(monkeypatch):
    monkeypatch.setenv("PGP_THREADS", "many")
    with pytest.raises(ConfigError):
        Settings.from_env(dotenv=False)
