"""Executor configuration."""

from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Tuple

from oqleval.errors import ConfigError
from oqleval.utils.config_manager import ConfigManager
from oqleval.utils.constants import (
    DEFAULT_BACKOFF_SECONDS,
    DEFAULT_BBOX,
    DEFAULT_ENDPOINT,
    DEFAULT_MAX_ATTEMPTS,
    DEFAULT_MAX_INFLIGHT,
    DEFAULT_REQUEST_TIMEOUT,
    DEFAULT_SAMPLE_SIZE,
    DEFAULT_USER_AGENT,
    INTERPRETER_PATH,
    OUTCOME_SAMPLE_CAP,
)

BBox = Tuple[float, float, float, float]


@dataclass(frozen=True)
class RetryPolicy:
    max_attempts: int = DEFAULT_MAX_ATTEMPTS
    backoff_seconds: float = DEFAULT_BACKOFF_SECONDS


@dataclass(frozen=True)
class ExecutionConfig:
    """Where and how queries are executed."""

    endpoint_url: str = DEFAULT_ENDPOINT
    request_timeout: float = DEFAULT_REQUEST_TIMEOUT
    default_bbox: BBox = DEFAULT_BBOX
    max_inflight: int = DEFAULT_MAX_INFLIGHT
    retry_policy: RetryPolicy = RetryPolicy()
    cache_dir: Optional[Path] = None
    sample_size: int = DEFAULT_SAMPLE_SIZE
    user_agent: str = DEFAULT_USER_AGENT

    def __post_init__(self) -> None:
        self.validate()

    @property
    def interpreter_url(self) -> str:
        return self.endpoint_url.rstrip("/") + INTERPRETER_PATH

    def validate(self) -> None:
        """
        Check value ranges.

        Raises:
            ConfigError: describing the first invalid value
        """
        if not self.endpoint_url:
            raise ConfigError("endpoint_url must not be empty")
        if len(self.default_bbox) != 4:
            raise ConfigError("default_bbox needs south, west, north, east")
        south, west, north, east = self.default_bbox
        if not south < north:
            raise ConfigError(
                f"default_bbox south ({south}) must be below north ({north})"
            )
        if not (-90.0 <= south <= 90.0 and -90.0 <= north <= 90.0):
            raise ConfigError("default_bbox latitudes must lie in [-90, 90]")
        if not (-180.0 <= west <= 180.0 and -180.0 <= east <= 180.0):
            raise ConfigError("default_bbox longitudes must lie in [-180, 180]")
        if self.max_inflight < 1:
            raise ConfigError("max_inflight must be at least 1")
        if self.request_timeout <= 0:
            raise ConfigError("request_timeout must be positive")
        if self.retry_policy.max_attempts < 1:
            raise ConfigError("retry max_attempts must be at least 1")
        if self.retry_policy.backoff_seconds < 0:
            raise ConfigError("retry backoff_seconds must not be negative")
        if not 1 <= self.sample_size <= OUTCOME_SAMPLE_CAP:
            raise ConfigError(
                f"sample_size must be between 1 and {OUTCOME_SAMPLE_CAP}, "
                "the number of records kept per outcome"
            )

    @classmethod
    def from_config(cls, manager: ConfigManager) -> "ExecutionConfig":
        """Build from the `execution` section of a ConfigManager."""
        try:
            bbox = tuple(manager.get_default_bbox())
            cache_dir = manager.get("execution.cache_dir")
            return cls(
                endpoint_url=str(manager.get("execution.endpoint_url")),
                request_timeout=float(manager.get("execution.request_timeout")),
                default_bbox=bbox,  # type: ignore[arg-type]
                max_inflight=int(manager.get("execution.max_inflight")),
                retry_policy=RetryPolicy(
                    max_attempts=int(manager.get("execution.retry.max_attempts")),
                    backoff_seconds=float(
                        manager.get("execution.retry.backoff_seconds")
                    ),
                ),
                cache_dir=Path(cache_dir) if cache_dir else None,
                sample_size=int(manager.get("execution.sample_size")),
                user_agent=str(manager.get("execution.user_agent")),
            )
        except (TypeError, ValueError) as e:
            raise ConfigError(f"Invalid execution configuration: {e}") from e


def parse_bbox(text: str) -> BBox:
    """Parse `south,west,north,east`."""
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 4:
        raise ConfigError(f"Bounding box needs four comma-separated numbers: {text!r}")
    try:
        south, west, north, east = (float(p) for p in parts)
    except ValueError as e:
        raise ConfigError(f"Invalid bounding box {text!r}: {e}") from e
    return (south, west, north, east)
