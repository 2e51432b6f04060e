"""Sentence embedding providers used for shot retrieval and difficulty scoring."""

import hashlib
import logging
import threading
from pathlib import Path
from typing import Dict, List, Optional, Protocol, Sequence, Union

import numpy as np
import requests

from oqleval.errors import ConfigError, HarnessError

DEFAULT_HASHING_DIMENSION = 512
NORM_TOLERANCE = 1e-6


class EmbeddingProvider(Protocol):
    """Maps text to a unit-norm vector of fixed dimension."""

    def embed(self, text: str, key: Optional[str] = None) -> np.ndarray:
        ...


def unit_norm(vector: np.ndarray) -> np.ndarray:
    """Scale to length 1; a zero vector cannot be normalized."""
    norm = float(np.linalg.norm(vector))
    if norm == 0.0:
        raise HarnessError("Cannot normalize a zero embedding vector")
    return vector / norm


def embedding_matrix(
    provider: EmbeddingProvider,
    texts: Sequence[str],
    keys: Optional[Sequence[str]] = None,
) -> np.ndarray:
    """Stack the embeddings of many texts row-wise."""
    if not texts:
        return np.zeros((0, 0))
    rows = [
        provider.embed(text, keys[i] if keys is not None else None)
        for i, text in enumerate(texts)
    ]
    return np.vstack(rows)


class HashingEmbeddingProvider:
    """
    Character-trigram feature hashing; deterministic and offline.

    Text is lowercased and padded with spaces so every string, the empty one
    included, has at least one trigram.
    """

    def __init__(self, dimension: int = DEFAULT_HASHING_DIMENSION) -> None:
        if dimension <= 0:
            raise ConfigError("Embedding dimension must be positive")
        self.dimension = dimension
        self.logger = logging.getLogger(__name__)

    def _bucket(self, gram: str) -> int:
        digest = hashlib.blake2b(gram.encode("utf-8"), digest_size=8).digest()
        return int.from_bytes(digest, "big") % self.dimension

    def embed(self, text: str, key: Optional[str] = None) -> np.ndarray:
        padded = f"  {' '.join(text.lower().split())} "
        buckets = [self._bucket(padded[i : i + 3]) for i in range(len(padded) - 2)]
        vector = np.zeros(self.dimension, dtype=np.float64)
        np.add.at(vector, buckets, 1.0)
        return unit_norm(vector)


class PrecomputedEmbeddingProvider:
    """
    Vectors read from a `key<TAB>v1,v2,...` file.

    Lookup is by key (instance id) first, then by the text itself.
    """

    def __init__(self, path: Union[str, Path]) -> None:
        self.path = Path(path)
        self.logger = logging.getLogger(__name__)
        self.vectors: Dict[str, np.ndarray] = {}
        self.dimension = 0
        self._load()

    def _load(self) -> None:
        if not self.path.exists():
            raise ConfigError(f"Embedding file not found: {self.path}")

        with open(self.path, "r", encoding="utf-8") as f:
            for line_no, line in enumerate(f, 1):
                line = line.rstrip("\n")
                if not line.strip():
                    continue
                key, sep, raw = line.partition("\t")
                if not sep:
                    raise ConfigError(
                        f"{self.path}:{line_no}: expected key<TAB>vector"
                    )
                try:
                    values = [float(v) for v in raw.split(",")]
                    vector = np.array(values, dtype=np.float64)
                except ValueError:
                    raise ConfigError(f"{self.path}:{line_no}: malformed vector")
                if self.dimension and len(vector) != self.dimension:
                    raise ConfigError(
                        f"{self.path}:{line_no}: dimension {len(vector)}, "
                        f"expected {self.dimension}"
                    )
                self.dimension = len(vector)
                self.vectors[key] = unit_norm(vector)

        self.logger.info(f"Loaded {len(self.vectors)} embeddings from {self.path}")

    def embed(self, text: str, key: Optional[str] = None) -> np.ndarray:
        if key is not None and key in self.vectors:
            return self.vectors[key]
        if text in self.vectors:
            return self.vectors[text]
        raise HarnessError(f"No precomputed embedding for {key or text!r}")


class HttpEmbeddingProvider:
    """Embedding service answering POST `{"text": ...}` with `{"vector": [...]}`."""

    def __init__(
        self,
        url: str,
        session: Optional[requests.Session] = None,
        timeout: float = 60.0,
    ) -> None:
        self.url = url
        self.session = session or requests.Session()
        self.timeout = timeout
        self.logger = logging.getLogger(__name__)
        self._memo: Dict[str, np.ndarray] = {}
        self._lock = threading.Lock()

    def embed(self, text: str, key: Optional[str] = None) -> np.ndarray:
        with self._lock:
            cached = self._memo.get(text)
        if cached is not None:
            return cached

        try:
            response = self.session.post(
                self.url, json={"text": text}, timeout=self.timeout
            )
            response.raise_for_status()
            values: List[float] = response.json()["vector"]
        except (requests.RequestException, ValueError, KeyError, TypeError) as e:
            raise HarnessError(f"Embedding service failed: {e}")

        vector = unit_norm(np.asarray(values, dtype=np.float64))
        with self._lock:
            self._memo[text] = vector
        return vector


def build_provider(
    kind: str, path: Optional[str] = None, url: Optional[str] = None
) -> EmbeddingProvider:
    """Provider from its configured kind: `hashing`, `file` or `http`."""
    if kind == "hashing":
        return HashingEmbeddingProvider()
    if kind == "file":
        if not path:
            raise ConfigError("provider.path is required for file embeddings")
        return PrecomputedEmbeddingProvider(path)
    if kind == "http":
        if not url:
            raise ConfigError("provider.url is required for http embeddings")
        return HttpEmbeddingProvider(url)
    raise ConfigError(f"Unknown embedding provider {kind!r}")
