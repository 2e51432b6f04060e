"""Configuration management for oqleval."""

import json
import logging
import os
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional

from oqleval.errors import ConfigError
from oqleval.utils.constants import (
    DEFAULT_BACKOFF_SECONDS,
    DEFAULT_BBOX,
    DEFAULT_CONFIG_PATH,
    DEFAULT_ENDPOINT,
    DEFAULT_MAX_ATTEMPTS,
    DEFAULT_MAX_INFLIGHT,
    DEFAULT_MAX_LENGTH,
    DEFAULT_REQUEST_TIMEOUT,
    DEFAULT_SAMPLE_SIZE,
    DEFAULT_SHOT_COUNT,
    DEFAULT_USER_AGENT,
    ENV_CACHE_DIR,
    ENV_CLIENT_TOKEN,
    ENV_ENDPOINT,
)


class ConfigManager:
    """Manages layered configuration: flags > config file > environment > defaults."""

    def __init__(
        self,
        config_path: Optional[Path] = None,
        environ: Optional[Mapping[str, str]] = None,
    ) -> None:
        self.config_path = Path(config_path) if config_path else DEFAULT_CONFIG_PATH
        self.logger = logging.getLogger(__name__)
        self._environ = os.environ if environ is None else environ
        self._config: Dict[str, Any] = {}

        # Load configuration
        self.load_config()

    def get_default_config(self) -> Dict[str, Any]:
        """Get default configuration values."""
        return {
            "version": "1.0",
            "execution": {
                "endpoint_url": DEFAULT_ENDPOINT,
                "request_timeout": DEFAULT_REQUEST_TIMEOUT,
                "default_bbox": list(DEFAULT_BBOX),
                "max_inflight": DEFAULT_MAX_INFLIGHT,
                "retry": {
                    "max_attempts": DEFAULT_MAX_ATTEMPTS,
                    "backoff_seconds": DEFAULT_BACKOFF_SECONDS,
                },
                "cache_dir": None,
                "sample_size": DEFAULT_SAMPLE_SIZE,
                "user_agent": DEFAULT_USER_AGENT,
            },
            "geocoder": {
                "fixture": None,
                "nominatim_url": "https://nominatim.openstreetmap.org",
            },
            "harness": {
                "strategy": "retrieval_embedding",
                "k": DEFAULT_SHOT_COUNT,
                "seed": 0,
                "most_similar_last": True,
                "max_length": DEFAULT_MAX_LENGTH,
            },
            "refine": {
                "mode": "off",
                "with_feedback": False,
            },
            "client": {
                "kind": "fixture",
                "endpoint": None,
                "model": None,
                "path": None,
                "token": None,
            },
            "provider": {
                "kind": "hashing",
                "path": None,
                "url": None,
            },
            "jobs": 1,
            "out_dir": "results",
        }

    def _environment_overrides(self) -> Dict[str, Any]:
        """Translate recognised environment variables into a config fragment."""
        overrides: Dict[str, Any] = {}
        endpoint = self._environ.get(ENV_ENDPOINT)
        if endpoint:
            overrides.setdefault("execution", {})["endpoint_url"] = endpoint
        cache_dir = self._environ.get(ENV_CACHE_DIR)
        if cache_dir:
            overrides.setdefault("execution", {})["cache_dir"] = cache_dir
        token = self._environ.get(ENV_CLIENT_TOKEN)
        if token:
            overrides.setdefault("client", {})["token"] = token
        return overrides

    def load_config(self) -> None:
        """
        Load configuration from environment and file.

        Raises:
            ConfigError: the file exists but is not a readable JSON object
        """
        self._config = self.get_default_config()
        self._deep_update(self._config, self._environment_overrides())

        if not self.config_path.exists():
            self.logger.debug(f"No configuration file at {self.config_path}")
            return

        try:
            with open(self.config_path, "r", encoding="utf-8") as f:
                loaded_config = json.load(f)
        except (json.JSONDecodeError, OSError) as e:
            raise ConfigError(f"Cannot load config {self.config_path}: {e}") from e
        if not isinstance(loaded_config, dict):
            raise ConfigError(f"Config {self.config_path} must hold a JSON object")

        # Merge with defaults to ensure all keys exist
        self._deep_update(self._config, loaded_config)
        self.logger.info(f"Configuration loaded from {self.config_path}")

    def get(self, key: str, default: Any = None) -> Any:
        """Get configuration value by key path."""
        keys = key.split(".")
        value = self._config

        try:
            for k in keys:
                value = value[k]
            return value
        except (KeyError, TypeError):
            return default

    def set(self, key: str, value: Any) -> None:
        """Set configuration value by key path."""
        keys = key.split(".")
        config = self._config

        # Navigate to parent of target key
        for k in keys[:-1]:
            if k not in config or not isinstance(config[k], dict):
                config[k] = {}
            config = config[k]

        # Set the value
        config[keys[-1]] = value

    def apply_overrides(self, overrides: Mapping[str, Any]) -> None:
        """Apply dot-path overrides, skipping values that were not given."""
        for key, value in overrides.items():
            if value is not None:
                self.set(key, value)

    def get_default_bbox(self) -> List[float]:
        """Get the default bounding box as [south, west, north, east]."""
        bbox = self.get("execution.default_bbox")
        if not isinstance(bbox, list):
            raise ConfigError("execution.default_bbox must be a list of numbers")
        return [float(v) for v in bbox]

    def _deep_update(
        self, base_dict: Dict[str, Any], update_dict: Dict[str, Any]
    ) -> None:
        """Deep update base_dict with update_dict."""
        for key, value in update_dict.items():
            if (
                key in base_dict
                and isinstance(base_dict[key], dict)
                and isinstance(value, dict)
            ):
                self._deep_update(base_dict[key], value)
            else:
                base_dict[key] = value
