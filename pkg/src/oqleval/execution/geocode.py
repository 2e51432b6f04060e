"""Geocoding of Turbo macro arguments: a TSV fixture or a Nominatim service."""

import csv
import logging
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Optional, Protocol, Union

import requests

from oqleval.errors import ConfigError
from oqleval.utils.constants import DEFAULT_USER_AGENT

GEOCODE_KINDS = ("relation", "way", "node")


@dataclass(frozen=True)
class GeocodeResult:
    """A resolved OSM object."""

    kind: str
    id: int
    lat: float
    lon: float


class GeocodeResolver(Protocol):
    def resolve(self, name: str) -> Optional[GeocodeResult]:
        """Resolve a place name, None when not found."""
        ...


class FixtureGeocoder:
    """Resolves names from a `name<TAB>kind<TAB>id<TAB>lat<TAB>lon` file."""

    def __init__(self, path: Union[str, Path]) -> None:
        self.path = Path(path)
        self.logger = logging.getLogger(__name__)
        self._entries: Dict[str, GeocodeResult] = {}
        self._load()

    def _load(self) -> None:
        try:
            with open(self.path, "r", encoding="utf-8", newline="") as f:
                for line_no, row in enumerate(csv.reader(f, delimiter="\t"), 1):
                    if not row or row[0].startswith("#"):
                        continue
                    if len(row) != 5 or row[1] not in GEOCODE_KINDS:
                        raise ConfigError(
                            f"{self.path}:{line_no}: malformed geocode row"
                        )
                    name, kind, osm_id, lat, lon = row
                    self._entries[name] = GeocodeResult(
                        kind=kind, id=int(osm_id), lat=float(lat), lon=float(lon)
                    )
        except OSError as e:
            raise ConfigError(f"Cannot read geocode fixture {self.path}: {e}") from e
        except ValueError as e:
            raise ConfigError(f"Malformed geocode fixture {self.path}: {e}") from e

        self.logger.debug(f"Loaded {len(self._entries)} geocode fixtures")

    def resolve(self, name: str) -> Optional[GeocodeResult]:
        return self._entries.get(name)


class NominatimGeocoder:
    """
    Nominatim `/search` client.

    Hits and definite misses are memoised per name; failed requests are not,
    so a later lookup of the same name asks again.
    """

    def __init__(
        self,
        base_url: str,
        session: Optional[requests.Session] = None,
        user_agent: str = DEFAULT_USER_AGENT,
        timeout: float = 30.0,
    ) -> None:
        self.base_url = base_url.rstrip("/")
        self.session = session or requests.Session()
        self.user_agent = user_agent
        self.timeout = timeout
        self.logger = logging.getLogger(__name__)
        self._memo: Dict[str, Optional[GeocodeResult]] = {}
        self._lock = threading.Lock()

    def resolve(self, name: str) -> Optional[GeocodeResult]:
        with self._lock:
            if name in self._memo:
                return self._memo[name]

        try:
            result = self._search(name)
        except (requests.RequestException, ValueError) as e:
            self.logger.warning(f"Geocoding {name!r} failed: {e}")
            return None

        with self._lock:
            self._memo[name] = result
        return result

    def _search(self, name: str) -> Optional[GeocodeResult]:
        response = self.session.get(
            f"{self.base_url}/search",
            params={"q": name, "format": "json", "limit": 1},
            headers={"User-Agent": self.user_agent},
            timeout=self.timeout,
        )
        response.raise_for_status()
        hits = response.json()

        for hit in hits:
            kind = hit.get("osm_type")
            if kind in GEOCODE_KINDS:
                return GeocodeResult(
                    kind=kind,
                    id=int(hit["osm_id"]),
                    lat=float(hit["lat"]),
                    lon=float(hit["lon"]),
                )
        self.logger.info(f"No geocoding result for {name!r}")
        return None
