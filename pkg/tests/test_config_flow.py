import configparser
import os
from pathlib import Path

import pytest

from cantor_rings.cantor_exception import SpecError
from cantor_rings.config_flow import (
    DEFAULT_CONFIG_PATH,
    RunConfigFlow,
    load_configuration,
    resolve,
)
from cantor_rings.const import ENV_THREADS


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "configuration.yaml"
    path.write_text(
        "logger:\n"
        "  default: WARNING\n"
        "  logs:\n"
        "    cantor_rings.certify: DEBUG\n"
        "cantor_rings:\n"
        "  samples: 256\n"
        "  max_iter: 50\n"
        "  seed: 7\n",
        "utf-8",
    )
    return path


def test_shipped_configuration():
    assert DEFAULT_CONFIG_PATH.exists()
    config = resolve({"command": "presets"}, environ={})
    assert config.samples == 4096
    assert config.exclusion == pytest.approx(1e-3)
    assert config.default_level == "info"
    assert "cantor_rings" in config.log_levels


def test_layers_override_in_order(config_file):
    config = resolve(
        {"command": "certify", "samples": 1024, "threads": None},
        config_file,
        environ={ENV_THREADS: "3"},
    )
    assert config.samples == 1024
    assert config.max_iter == 50
    assert config.seed == 7
    assert config.threads == 3
    assert config.default_level == "warning"
    assert config.log_levels == {"cantor_rings.certify": "debug"}


def test_missing_file_uses_defaults(tmp_path):
    config = resolve({}, tmp_path / "missing.yaml", environ={})
    assert config.samples == 4096
    assert config.max_iter == 1000
    assert config.threads == os.cpu_count()


def test_unknown_keys_become_options(tmp_path):
    config = resolve(
        {"command": "synth", "degrees": "5,5", "p": 1}, tmp_path / "none.yaml", environ={}
    )
    assert config.command == "synth"
    assert config.options == {"degrees": "5,5", "p": 1}


@pytest.mark.parametrize(
    "user_input, environ, field",
    [
        ({"samples": 100}, {}, "samples"),
        ({"samples": 32}, {}, "samples"),
        ({"threads": 0}, {}, "threads"),
        ({}, {ENV_THREADS: "many"}, "threads"),
        ({"exclusion": 2.0}, {}, "exclusion"),
    ],
)
def test_invalid_settings(tmp_path, user_input, environ, field):
    with pytest.raises(SpecError) as info:
        resolve(user_input, tmp_path / "none.yaml", environ=environ)
    assert info.value.field == field


def test_errors_accumulate(tmp_path):
    flow = RunConfigFlow().step_user({"samples": 100, "max_iter": 0})
    assert set(flow.errors) == {"samples", "max_iter"}
    with pytest.raises(SpecError):
        flow.create_entry()


def test_invalid_yaml(tmp_path):
    path = tmp_path / "broken.yaml"
    path.write_text("cantor_rings: [1, 2\n", "utf-8")
    with pytest.raises(SpecError) as info:
        load_configuration(path)
    assert info.value.field == "config"


def test_seeded_rng(config_file):
    first = resolve({}, config_file, environ={}).rng().uniform(size=3)
    second = resolve({}, config_file, environ={}).rng().uniform(size=3)
    assert list(first) == list(second)


def test_lint_settings_live_in_ruff_config():
    root = Path(__file__).parent.parent
    parser = configparser.ConfigParser()
    parser.read(root / "setup.cfg")
    assert "flake8" not in parser
    assert "isort" not in parser
    ruff = (root / "ruff.toml").read_text("utf-8")
    assert "line-length = 88" in ruff
    assert 'known-first-party = ["cantor_rings", "tests"]' in ruff
