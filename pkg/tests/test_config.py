import json
import os

import pytest

from config import (CONFIG_FILE_NAME, DEFAULT_CONFIG, apply_env_overrides, get_config_path,
                    init_config, merge_configs)


@pytest.fixture(autouse=True)
def clean_environment(monkeypatch):
    for var in ("GRADED_BUDGET", "GRADED_SEED", "GRADED_LOG_LEVEL", "GRADED_TRACE_MAX_LEN",
                "GRADED_LAMBDA_SPLIT"):
        monkeypatch.delenv(var, raising=False)


def test_defaults_without_files(tmp_path):
    config = init_config(tmp_path)
    assert config == DEFAULT_CONFIG
    assert config is not DEFAULT_CONFIG


def test_config_file_is_merged(tmp_path):
    (tmp_path / CONFIG_FILE_NAME).write_text(json.dumps({"laws": {"budget": 500}, "output": {"format": "json"}}),
                                             encoding="utf-8")
    config = init_config(tmp_path)
    assert config["laws"]["budget"] == 500
    assert config["laws"]["seed"] == DEFAULT_CONFIG["laws"]["seed"]
    assert config["output"] == {"format": "json", "indent": 2}


def test_explicit_config_path(tmp_path):
    custom = tmp_path / "custom.json"
    custom.write_text('{"trace": {"max_len": 5}}', encoding="utf-8")
    assert init_config(tmp_path, str(custom))["trace"]["max_len"] == 5


def test_broken_config_file_falls_back_to_defaults(tmp_path):
    (tmp_path / CONFIG_FILE_NAME).write_text("{not json", encoding="utf-8")
    assert init_config(tmp_path) == DEFAULT_CONFIG


def test_environment_overrides(tmp_path, monkeypatch):
    monkeypatch.setenv("GRADED_BUDGET", "1234")
    monkeypatch.setenv("GRADED_LAMBDA_SPLIT", "latent")
    config = init_config(tmp_path)
    assert config["laws"]["budget"] == 1234
    assert config["coeffects"]["lambda_split"] == "latent"


def test_dotenv_file_is_loaded(tmp_path):
    (tmp_path / ".env").write_text("GRADED_SEED=7\n", encoding="utf-8")
    try:
        config = init_config(tmp_path)
    finally:
        os.environ.pop("GRADED_SEED", None)
    assert config["laws"]["seed"] == 7


def test_invalid_override_is_ignored():
    config = apply_env_overrides({"laws": {"budget": 10}}, {"GRADED_BUDGET": "lots", "GRADED_SEED": ""})
    assert config == {"laws": {"budget": 10}}


def test_merge_keeps_new_default_fields():
    base = {"laws": {"budget": 1, "seed": 0}, "modulus": 4}
    merge_configs(base, {"laws": {"budget": 2}, "extra": True})
    assert base == {"laws": {"budget": 2, "seed": 0}, "modulus": 4, "extra": True}


def test_config_path(tmp_path):
    assert get_config_path(tmp_path) == str(tmp_path / CONFIG_FILE_NAME)
