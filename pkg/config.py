# config.py
import copy
import json
import logging
import os
from pathlib import Path

import dotenv

logger = logging.getLogger(__name__)

# Default configuration settings
DEFAULT_CONFIG = {
    "modulus": 4,
    "trace": {
        "max_len": 3
    },
    "algebra": {
        "enumeration_budget": 100000
    },
    "semantics": {
        "function_equality_limit": 256
    },
    "coeffects": {
        # duplicate: F = F' = body demand; latent: F = t, F' = body demand
        "lambda_split": "duplicate"
    },
    "laws": {
        "budget": 1000000,
        "seed": 0,
        "samples": 24,
        "fiber_domain_limit": 4,
        "workers": 4,
        "signature": {
            "params": {"p": "int4", "q": "int4"},
            "regions": {"r": "int4"},
            "tags": {"a": "unit", "b": "bool"}
        }
    },
    "output": {
        "format": "human",
        "indent": 2
    },
    "logging": {
        "level": "WARNING"
    }
}

CONFIG_FILE_NAME = "graded.json"

# Environment variable -> (config path, converter)
ENV_OVERRIDES = {
    "GRADED_BUDGET": (("laws", "budget"), int),
    "GRADED_SEED": (("laws", "seed"), int),
    "GRADED_LOG_LEVEL": (("logging", "level"), str),
    "GRADED_TRACE_MAX_LEN": (("trace", "max_len"), int),
    "GRADED_LAMBDA_SPLIT": (("coeffects", "lambda_split"), str),
}


def get_config_path(project_root):
    """Get the path to the config file."""
    return os.path.join(project_root, CONFIG_FILE_NAME)


def init_config(project_root=None, path=None):
    """Initialize the configuration.

    Defaults are merged with the JSON config file (if any) and then with
    GRADED_* environment variables, which may come from a .env file.
    """
    config = copy.deepcopy(DEFAULT_CONFIG)
    project_root = Path(project_root or os.getcwd())
    config_path = path or get_config_path(project_root)

    try:
        if os.path.exists(config_path):
            with open(config_path, 'r', encoding='utf-8') as f:
                merge_configs(config, json.load(f))
    except (OSError, ValueError) as e:
        # If loading fails, use default config
        logger.warning("could not load %s, using defaults: %s", config_path, e)

    env_path = project_root / ".env"
    if env_path.exists():
        dotenv.load_dotenv(env_path)
    apply_env_overrides(config)

    return config


def apply_env_overrides(config, environ=None):
    """Apply GRADED_* environment variables on top of the loaded config."""
    environ = os.environ if environ is None else environ
    for var, (keys, convert) in ENV_OVERRIDES.items():
        raw = environ.get(var)
        if raw is None or raw == "":
            continue
        try:
            value = convert(raw)
        except ValueError:
            logger.warning("ignoring %s=%r (not a valid %s)", var, raw, convert.__name__)
            continue
        section = config
        for key in keys[:-1]:
            section = section.setdefault(key, {})
        section[keys[-1]] = value
    return config


def merge_configs(default_config, loaded_config):
    """Merge loaded config with default config, preserving new default fields."""
    for key, value in loaded_config.items():
        if isinstance(value, dict) and key in default_config and isinstance(default_config[key], dict):
            merge_configs(default_config[key], value)
        else:
            default_config[key] = value
