"""
Configuration utilities for roomloc.
"""
import copy
import json
import logging
import os
from pathlib import Path
from typing import Dict, Any, Optional

from dotenv import load_dotenv

logger = logging.getLogger(__name__)

DEFAULT_CONFIG_PATH = Path(__file__).parent.parent.parent / "config" / "config.json"

DEFAULT_CONFIG: Dict[str, Any] = {
    "logging": {
        "level": "INFO",
        "file": None,
    },
    "grid": {
        "n1": 200,
        "n2": 300,
        "nk": 1,
    },
    "sensor": {
        "resolution_deg": 0.36,
        "noise_rms": 0.05,
        "max_range": None,
    },
    "analysis": {
        "trials": 500,
        "workers": 1,
    },
    "output": {
        "out_dir": "data/results",
    },
}


def load_config(config_path: Optional[str] = None) -> Dict[str, Any]:
    """
    Load configuration from file, filling omitted keys from DEFAULT_CONFIG.

    Args:
        config_path (str, optional): Path to config file. If None, uses default.

    Returns:
        dict: Configuration dictionary
    """
    if not config_path:
        config_path = str(DEFAULT_CONFIG_PATH)

    try:
        with open(config_path, "r", encoding="utf-8") as f:
            file_config = json.load(f)
    except Exception as ex:
        logger.warning(f"Error loading config from {config_path}: {ex}; using defaults")
        return copy.deepcopy(DEFAULT_CONFIG)

    return merge_configs(DEFAULT_CONFIG, file_config)


def merge_configs(base_config: Dict[str, Any], override_config: Dict[str, Any]) -> Dict[str, Any]:
    """
    Recursively merge two configuration dictionaries.

    Args:
        base_config (dict): Base configuration
        override_config (dict): Configuration to override base

    Returns:
        dict: Merged configuration; neither input is modified
    """
    result = copy.deepcopy(base_config)

    for key, value in override_config.items():
        if (
            key in result and
            isinstance(result[key], dict) and
            isinstance(value, dict)
        ):
            result[key] = merge_configs(result[key], value)
        else:
            result[key] = copy.deepcopy(value)

    return result


def _set(config: Dict[str, Any], section: str, key: str, value: Any) -> None:
    config.setdefault(section, {})[key] = value


def get_config_with_env_overrides(config: Dict[str, Any], env_file: Optional[str] = None) -> Dict[str, Any]:
    """
    Override configuration with environment variables (after loading .env).

    Recognized variables: ROOMLOC_LOG_LEVEL (or LOG_LEVEL), ROOMLOC_WORKERS
    and ROOMLOC_OUT_DIR.

    Args:
        config (dict): Base configuration
        env_file (str, optional): Explicit .env file to load

    Returns:
        dict: Configuration with environment variable overrides
    """
    load_dotenv(env_file)
    result = copy.deepcopy(config)

    level = os.environ.get("ROOMLOC_LOG_LEVEL") or os.environ.get("LOG_LEVEL")
    if level:
        _set(result, "logging", "level", level)

    workers = os.environ.get("ROOMLOC_WORKERS")
    if workers:
        try:
            _set(result, "analysis", "workers", max(1, int(workers)))
        except ValueError:
            logger.warning(f"Ignoring non-integer ROOMLOC_WORKERS={workers!r}")

    out_dir = os.environ.get("ROOMLOC_OUT_DIR")
    if out_dir:
        _set(result, "output", "out_dir", out_dir)

    return result
