"""
Tests for utility modules.
"""
import json
import logging
import os
from unittest.mock import patch

from src.utils.config_utils import DEFAULT_CONFIG, load_config, merge_configs, get_config_with_env_overrides
from src.utils.logging_utils import setup_logging


def test_merge_configs():
    """Test merging configurations."""
    base_config = {
        "logging": {
            "level": "INFO",
            "file": None
        },
        "grid": {
            "n1": 200,
            "n2": 300
        }
    }

    override_config = {
        "logging": {
            "level": "DEBUG"
        },
        "analysis": {
            "trials": 50
        }
    }

    expected = {
        "logging": {
            "level": "DEBUG",
            "file": None
        },
        "grid": {
            "n1": 200,
            "n2": 300
        },
        "analysis": {
            "trials": 50
        }
    }

    result = merge_configs(base_config, override_config)
    assert result == expected
    assert base_config["logging"]["level"] == "INFO"


def test_get_config_with_env_overrides(tmp_path):
    """Test environment variable overrides."""
    config = {"logging": {"level": "INFO"}}

    with patch.dict(os.environ, {
        "ROOMLOC_LOG_LEVEL": "DEBUG",
        "ROOMLOC_WORKERS": "4",
        "ROOMLOC_OUT_DIR": "/tmp/roomloc"
    }):
        result = get_config_with_env_overrides(config, env_file=str(tmp_path / "absent.env"))

    assert result["logging"]["level"] == "DEBUG"
    assert result["analysis"]["workers"] == 4
    assert result["output"]["out_dir"] == "/tmp/roomloc"
    assert config == {"logging": {"level": "INFO"}}


def test_env_overrides_from_dotenv(tmp_path):
    """Test values read from a .env file."""
    env_file = tmp_path / ".env"
    env_file.write_text("ROOMLOC_WORKERS=3\n")
    with patch.dict(os.environ, {}, clear=False):
        os.environ.pop("ROOMLOC_WORKERS", None)
        result = get_config_with_env_overrides({}, env_file=str(env_file))
    assert result["analysis"]["workers"] == 3


def test_env_override_ignores_bad_workers(tmp_path):
    with patch.dict(os.environ, {"ROOMLOC_WORKERS": "many"}):
        result = get_config_with_env_overrides({"analysis": {"workers": 2}}, env_file=str(tmp_path / "absent.env"))
    assert result["analysis"]["workers"] == 2


def test_load_config_merges_defaults(tmp_path):
    """Test loading a partial configuration file."""
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"grid": {"n1": 50}}))
    config = load_config(str(path))
    assert config["grid"] == {"n1": 50, "n2": 300, "nk": 1}
    assert config["sensor"]["noise_rms"] == 0.05


def test_load_config_falls_back_to_defaults(tmp_path):
    config = load_config(str(tmp_path / "missing.json"))
    assert config == DEFAULT_CONFIG
    config["grid"]["n1"] = 1
    assert DEFAULT_CONFIG["grid"]["n1"] == 200


def test_load_default_config_file():
    """Test the bundled configuration file."""
    config = load_config()
    assert config["analysis"]["trials"] == 500
    assert config["sensor"]["resolution_deg"] == 0.36


def test_setup_logging_level():
    logger = setup_logging({"logging": {"level": "DEBUG"}})
    assert logging.getLogger().level == logging.DEBUG
    assert logger.name == "roomloc"
    setup_logging({"logging": {"level": "not-a-level"}})
    assert logging.getLogger().level == logging.INFO


def test_setup_logging_file(tmp_path):
    """Test a file handler is attached when a log file is configured."""
    log_path = tmp_path / "run.log"
    setup_logging({"logging": {"level": "INFO", "file": str(log_path)}})
    logging.getLogger("roomloc.test").info("hello")
    for handler in logging.getLogger().handlers:
        handler.flush()
    assert "hello" in log_path.read_text()
    setup_logging({"logging": {"level": "WARNING"}})
