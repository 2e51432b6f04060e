"""On-disk cache of deterministic execution outcomes, one JSON file per key."""

import json
import logging
import threading
from pathlib import Path
from typing import Any, Dict, Optional, Union

from oqleval.utils.file_utils import atomic_write_text, calculate_text_hash, read_text


class OutcomeCache:
    """Stores outcome records under `<dir>/<key[:2]>/<key>.json`."""

    def __init__(self, cache_dir: Union[str, Path]) -> None:
        self.cache_dir = Path(cache_dir)
        self.logger = logging.getLogger(__name__)
        self._lock = threading.Lock()
        self.hits = 0
        self.misses = 0

    @staticmethod
    def key(endpoint_url: str, expanded_query: str) -> str:
        return calculate_text_hash(endpoint_url, expanded_query)

    def _path(self, key: str) -> Path:
        return self.cache_dir / key[:2] / f"{key}.json"

    def get(self, key: str) -> Optional[Dict[str, Any]]:
        path = self._path(key)
        with self._lock:
            text = read_text(path) if path.exists() else None
            if text is None:
                self.misses += 1
                return None
            try:
                record = json.loads(text)
            except json.JSONDecodeError as e:
                self.logger.warning(f"Ignoring corrupt cache entry {path}: {e}")
                self.misses += 1
                return None
            self.hits += 1

        self.logger.debug(f"Cache hit {key[:12]}")
        return record  # type: ignore[no-any-return]

    def put(self, key: str, record: Dict[str, Any]) -> None:
        content = json.dumps(record, ensure_ascii=False, sort_keys=True)
        with self._lock:
            atomic_write_text(self._path(key), content)
