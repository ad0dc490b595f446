"""Resolve a RunConfig from configuration.yaml, the environment and CLI flags."""

from __future__ import annotations

from dataclasses import dataclass, field
import logging
import os
from pathlib import Path
from typing import Any

import numpy as np
import voluptuous as vol
import yaml

from .cantor_exception import SpecError
from .const import (
    CONF_EXCLUSION,
    CONF_LOCATE_MAX_ITER,
    CONF_MAX_ITER,
    CONF_NEWTON_TOL,
    CONF_RING_CIRCLES,
    CONF_SAMPLES,
    CONF_SEED,
    CONF_THREADS,
    DEFAULT_SAMPLES,
    DOMAIN,
    ENV_THREADS,
    EXCLUSION_ANGLE,
    LOCATE_MAX_ITER,
    MAX_ITER,
    MAX_SAMPLES,
    MIN_SAMPLES,
    NEWTON_TOL,
    RING_CIRCLES,
)
from .helper import is_power_of_two

_LOGGER = logging.getLogger(__name__)

DEFAULT_CONFIG_PATH = Path(__file__).parent.parent / "config" / "configuration.yaml"


def _power_of_two(value):
    value = int(value)
    if not is_power_of_two(value):
        raise vol.Invalid(f"{value} is not a power of two")
    return value


POSITIVE_INT = vol.All(vol.Coerce(int), vol.Range(min=1))

SETTINGS_SCHEMA = vol.Schema(
    {
        vol.Optional(CONF_SAMPLES): vol.All(
            _power_of_two, vol.Range(min=MIN_SAMPLES, max=MAX_SAMPLES)
        ),
        vol.Optional(CONF_RING_CIRCLES): POSITIVE_INT,
        vol.Optional(CONF_MAX_ITER): POSITIVE_INT,
        vol.Optional(CONF_LOCATE_MAX_ITER): POSITIVE_INT,
        vol.Optional(CONF_NEWTON_TOL): vol.All(
            vol.Coerce(float), vol.Range(min=0, min_included=False)
        ),
        vol.Optional(CONF_EXCLUSION): vol.All(
            vol.Coerce(float), vol.Range(min=0, max=1, min_included=False)
        ),
        vol.Optional(CONF_THREADS): POSITIVE_INT,
        vol.Optional(CONF_SEED): vol.Coerce(int),
    }
)
SETTINGS_KEYS = {str(key) for key in SETTINGS_SCHEMA.schema}

LOGGER_SCHEMA = vol.Schema(
    {
        vol.Optional("default", default="info"): vol.Lower,
        vol.Optional("logs", default={}): {str: vol.Lower},
    }
)


@dataclass
class RunConfig:
    command: str | None = None
    spec: str | None = None
    preset: str | None = None
    out: str | None = None
    samples: int = DEFAULT_SAMPLES
    ring_circles: int = RING_CIRCLES
    max_iter: int = MAX_ITER
    locate_max_iter: int = LOCATE_MAX_ITER
    newton_tol: float = NEWTON_TOL
    exclusion: float = EXCLUSION_ANGLE
    threads: int | None = None
    seed: int = 0
    verbose: bool = False
    log_levels: dict = field(default_factory=dict)
    default_level: str = "info"
    options: dict = field(default_factory=dict)

    def rng(self):
        return np.random.default_rng(self.seed)


def load_configuration(path=None) -> dict:
    path = Path(path) if path is not None else DEFAULT_CONFIG_PATH
    if not path.exists():
        _LOGGER.debug("No configuration at %s", path)
        return {}
    try:
        return yaml.safe_load(path.read_text("utf-8")) or {}
    except yaml.YAMLError as ex:
        raise SpecError(f"Invalid configuration {path}: {ex}", field="config") from ex


class RunConfigFlow:
    """Later steps override earlier ones; errors accumulate until create_entry."""

    def __init__(self) -> None:
        self.data: dict[str, Any] = {}
        self.errors: dict[str, str] = {}

    def _merge(self, step: str, values: dict) -> None:
        try:
            self.data.update(SETTINGS_SCHEMA(values))
        except vol.MultipleInvalid as ex:
            for error in ex.errors:
                key = str(error.path[0]) if error.path else "base"
                _LOGGER.debug("Step %s rejected %s: %s", step, key, error.msg)
                self.errors[key] = error.msg

    def step_defaults(self, configuration: dict) -> RunConfigFlow:
        try:
            logger = LOGGER_SCHEMA(configuration.get("logger") or {})
            self.data["default_level"] = logger["default"]
            self.data["log_levels"] = dict(logger["logs"])
        except vol.Invalid as ex:
            self.errors["logger"] = ex.msg
        self._merge("defaults", configuration.get(DOMAIN) or {})
        return self

    def step_environment(self, environ=None) -> RunConfigFlow:
        environ = os.environ if environ is None else environ
        if environ.get(ENV_THREADS):
            self._merge("environment", {CONF_THREADS: environ[ENV_THREADS]})
        return self

    def step_user(self, user_input: dict) -> RunConfigFlow:
        user_input = {
            key: value for key, value in user_input.items() if value is not None
        }
        settings = {
            key: user_input.pop(key)
            for key in list(user_input)
            if key in SETTINGS_KEYS
        }
        self._merge("user", settings)
        self.data.update(user_input)
        return self

    def create_entry(self) -> RunConfig:
        if self.errors:
            key, message = next(iter(self.errors.items()))
            _LOGGER.error("Invalid setting %s: %s", key, message)
            raise SpecError(f"Invalid setting '{key}': {message}", field=key)
        known = RunConfig.__dataclass_fields__
        config = RunConfig(
            **{key: value for key, value in self.data.items() if key in known},
        )
        config.options.update(
            {key: value for key, value in self.data.items() if key not in known}
        )
        if config.threads is None:
            config.threads = os.cpu_count()
        return config


def resolve(user_input: dict, config_path=None, environ=None) -> RunConfig:
    return (
        RunConfigFlow()
        .step_defaults(load_configuration(config_path))
        .step_environment(environ)
        .step_user(user_input)
        .create_entry()
    )
