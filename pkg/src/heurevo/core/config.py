"""Run configuration validation and config-file loading."""

from __future__ import annotations

import math
import os
from typing import Any

from heurevo.core.types import RunConfig
from heurevo.errors import ConfigError

EXEMPLAR_MODES = ("exemplar", "exemplar_u", "random")


def default_config() -> RunConfig:
    return validate_config(RunConfig())


def validate_config(cfg: RunConfig) -> RunConfig:
    """Return cfg unchanged if every invariant holds, else raise ConfigError.

    Error messages name the offending field and its bound.
    """
    if not isinstance(cfg.population_size, int) or cfg.population_size < 2:
        raise ConfigError("population_size must be an integer >= 2")
    if not isinstance(cfg.max_evaluations, int) or cfg.max_evaluations < 1:
        raise ConfigError("max_evaluations must be an integer >= 1")
    if not isinstance(cfg.elite_k, int) or cfg.elite_k < 1:
        raise ConfigError("elite_k must be an integer >= 1")
    if cfg.elite_k > cfg.population_size:
        raise ConfigError("elite_k exceeds population_size")
    if not 0.0 <= cfg.lambda_frac <= 1.0:
        raise ConfigError("lambda_frac must lie in [0, 1]")
    if not 0.0 <= cfg.crossover_rate <= 1.0:
        raise ConfigError("crossover_rate must lie in [0, 1]")
    if not 0.0 <= cfg.mutation_rate <= 1.0:
        raise ConfigError("mutation_rate must lie in [0, 1]")
    if not 0.0 <= cfg.delta <= 1.0 / 3.0:
        raise ConfigError("delta must lie in [0, 1/3]")
    if not 0.0 < cfg.alpha < 1.0:
        raise ConfigError("alpha must lie in (0, 1)")
    if not 0.0 < cfg.beta < 1.0:
        raise ConfigError("beta must lie in (0, 1)")
    if not isinstance(cfg.n_examples, int) or cfg.n_examples < 2:
        raise ConfigError("n_examples must be an integer >= 2")
    if not math.isfinite(cfg.temperature):
        raise ConfigError("temperature must be finite")
    if not math.isfinite(cfg.init_temperature_boost):
        raise ConfigError("init_temperature_boost must be finite")
    if cfg.exemplar_mode not in EXEMPLAR_MODES:
        raise ConfigError(f"exemplar_mode must be one of {EXEMPLAR_MODES}")
    if not isinstance(cfg.rng_seed, int):
        raise ConfigError("rng_seed must be an integer")
    return cfg


def load_config_file(path: str) -> dict[str, Any]:
    """Load a TOML config file into {run, task, provider} sections.

    All sections are optional; missing ones default to {}.
    """
    try:
        import tomllib
    except ImportError:  # Python 3.10
        import tomli as tomllib
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    with open(path, "rb") as fh:
        try:
            data = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"config file {path}: {exc}") from exc
    unknown = set(data) - {"run", "task", "provider"}
    if unknown:
        raise ConfigError(f"config file {path}: unknown sections {sorted(unknown)}")
    return {
        "run": dict(data.get("run", {})),
        "task": dict(data.get("task", {})),
        "provider": dict(data.get("provider", {})),
    }


def config_from_sections(run_section: dict[str, Any]) -> RunConfig:
    """Build a validated RunConfig from the [run] section of a config file."""
    return validate_config(RunConfig.from_dict(run_section))
