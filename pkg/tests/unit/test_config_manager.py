"""Tests for layered configuration."""

import json
import tempfile
from pathlib import Path

import pytest

from oqleval.errors import ConfigError
from oqleval.execution.config import ExecutionConfig
from oqleval.utils.config_manager import ConfigManager


@pytest.fixture
def temp_dir():
    """Create a temporary directory for testing."""
    with tempfile.TemporaryDirectory() as tmpdir:
        yield Path(tmpdir)


def test_defaults(temp_dir):
    """Test default values without a config file."""
    config = ConfigManager(temp_dir / "config.json", environ={})

    assert config.get("execution.endpoint_url") == "https://overpass-api.de"
    assert config.get("execution.retry.max_attempts") == 3
    assert config.get("harness.k") == 5
    assert config.get("refine.mode") == "off"
    assert config.get("missing.key", "fallback") == "fallback"
    assert not (temp_dir / "config.json").exists()


def test_file_values_merge_with_defaults(temp_dir):
    """Test that a partial file keeps the other defaults."""
    path = temp_dir / "config.json"
    path.write_text(json.dumps({"execution": {"max_inflight": 4}}), encoding="utf-8")
    config = ConfigManager(path, environ={})

    assert config.get("execution.max_inflight") == 4
    assert config.get("execution.request_timeout") == 180.0


@pytest.mark.parametrize("content", ["{oops", "[1, 2]"])
def test_malformed_file_is_config_error(temp_dir, content):
    """Test that a file that is not a JSON object is rejected."""
    path = temp_dir / "config.json"
    path.write_text(content, encoding="utf-8")

    with pytest.raises(ConfigError):
        ConfigManager(path, environ={})


def test_environment_variables(temp_dir):
    """Test the recognised environment variables."""
    environ = {
        "OVERPASS_ENDPOINT": "http://localhost:12345/api",
        "GEN_CLIENT_TOKEN": "tok",
        "OQLEVAL_CACHE_DIR": str(temp_dir / "cache"),
    }
    config = ConfigManager(temp_dir / "config.json", environ=environ)

    assert config.get("execution.endpoint_url") == "http://localhost:12345/api"
    assert config.get("client.token") == "tok"
    assert config.get("execution.cache_dir") == str(temp_dir / "cache")


def test_overrides_skip_missing_values(temp_dir):
    """Test command line overrides."""
    config = ConfigManager(temp_dir / "config.json", environ={})
    config.apply_overrides({"jobs": 8, "harness.k": None, "refine.mode": "all"})

    assert config.get("jobs") == 8
    assert config.get("harness.k") == 5
    assert config.get("refine.mode") == "all"


def test_set_creates_sections(temp_dir):
    """Test setting a value below a missing section."""
    config = ConfigManager(temp_dir / "config.json", environ={})
    config.set("extra.section.value", 3)

    assert config.get("extra.section.value") == 3


def test_file_bbox_reaches_execution_config(temp_dir):
    """Test that the file's bounding box becomes the executor default."""
    path = temp_dir / "config.json"
    path.write_text(
        json.dumps({"execution": {"default_bbox": [1, 2, 3, 4]}}), encoding="utf-8"
    )
    config = ConfigManager(path, environ={})

    assert config.get_default_bbox() == [1.0, 2.0, 3.0, 4.0]
    assert ExecutionConfig.from_config(config).default_bbox == (1.0, 2.0, 3.0, 4.0)


@pytest.mark.parametrize("bbox", ["49,8,50,9", [49, "north", 50, 9]])
def test_malformed_bbox_is_config_error(temp_dir, bbox):
    """Test bounding boxes that are not four numbers."""
    config = ConfigManager(temp_dir / "config.json", environ={})
    config.set("execution.default_bbox", bbox)

    with pytest.raises(ConfigError):
        ExecutionConfig.from_config(config)


def test_execution_config_from_manager(temp_dir):
    """Test building the execution settings."""
    config = ConfigManager(temp_dir / "config.json", environ={})
    config.set("execution.retry.max_attempts", 5)

    cfg = ExecutionConfig.from_config(config)
    assert cfg.retry_policy.max_attempts == 5
    assert cfg.default_bbox == (49.0, 8.0, 49.5, 8.5)
    assert cfg.cache_dir is None

    config.set("execution.request_timeout", "soon")
    with pytest.raises(ConfigError):
        ExecutionConfig.from_config(config)
