"""A canned Overpass server as a `requests` transport adapter.

Mount it on `fixture://` and use an endpoint such as
`fixture://tests/data/fixture_server.json`; the fixture file maps query text
to responses:

    {"responses": [
        {"query": "node(1);out;", "status_code": 200,
         "content_type": "application/json", "body": {"elements": [...]}},
        {"query": "...", "sequence": [{"status_code": 503, "body": ""}, {...}]}
    ]}

Unknown queries get a 400 parse error page when they do not parse and an
empty JSON result otherwise.
"""

import json
import threading
import time
from collections import Counter
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Tuple, Union
from urllib.parse import parse_qs

import requests
from requests.adapters import BaseAdapter
from requests.structures import CaseInsensitiveDict

from oqleval.core.parser import parse
from oqleval.errors import ConfigError, QuerySyntaxError
from oqleval.utils.constants import INTERPRETER_PATH

FIXTURE_SCHEME = "fixture://"

_REASONS = {
    200: "OK",
    400: "Bad Request",
    429: "Too Many Requests",
    500: "Internal Server Error",
    502: "Bad Gateway",
    503: "Service Unavailable",
    504: "Gateway Timeout",
}


def parse_error_page(message: str) -> str:
    """HTML body in the shape Overpass uses for rejected queries."""
    escaped = message.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
    escaped = escaped.replace('"', "&quot;")
    return (
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        "<!DOCTYPE html>\n<html><head><title>OSM3S Response</title></head>\n<body>\n"
        "<p>The data included in this document is from www.openstreetmap.org.</p>\n"
        f'<p><strong style="color:#FF0000">Error</strong>: {escaped} </p>\n'
        "</body>\n</html>\n"
    )


class FixtureTransport(BaseAdapter):
    """Serves canned responses keyed by the posted query text."""

    def __init__(self, delay: float = 0.0) -> None:
        super().__init__()
        self.delay = delay
        self.calls: Counter = Counter()
        self.max_concurrent = 0
        self._concurrent = 0
        self._lock = threading.Lock()
        self._fixtures: Dict[str, Dict[str, Any]] = {}

    def send(  # type: ignore[override]
        self, request: requests.PreparedRequest, **kwargs: Any
    ) -> requests.Response:
        query = _posted_query(request.body)
        fixture = self._fixture(_fixture_path(request.url or ""))

        with self._lock:
            self._concurrent += 1
            self.max_concurrent = max(self.max_concurrent, self._concurrent)
            call = self.calls[query]
            self.calls[query] += 1
        try:
            if self.delay:
                time.sleep(self.delay)
            entry = fixture.get(query.strip())
            status, content_type, body = _answer(entry, query, call)
        finally:
            with self._lock:
                self._concurrent -= 1

        return _build_response(request, status, content_type, body)

    def close(self) -> None:
        pass

    def _fixture(self, path: str) -> Dict[str, Any]:
        with self._lock:
            if path not in self._fixtures:
                self._fixtures[path] = load_fixture(path)
            return self._fixtures[path]


def load_fixture(path: Union[str, Path]) -> Dict[str, Dict[str, Any]]:
    """Read a fixture file into a query -> entry map."""
    try:
        with open(path, "r", encoding="utf-8") as f:
            document = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"Cannot load Overpass fixture {path}: {e}") from e
    return {entry["query"].strip(): entry for entry in document.get("responses", [])}


def mount_fixture(session: requests.Session, delay: float = 0.0) -> FixtureTransport:
    transport = FixtureTransport(delay=delay)
    session.mount(FIXTURE_SCHEME, transport)
    return transport


def _fixture_path(url: str) -> str:
    path = url[len(FIXTURE_SCHEME) :] if url.startswith(FIXTURE_SCHEME) else url
    if path.endswith(INTERPRETER_PATH):
        path = path[: -len(INTERPRETER_PATH)]
    return path


def _posted_query(body: Optional[Union[str, bytes]]) -> str:
    if body is None:
        return ""
    text = body.decode("utf-8") if isinstance(body, bytes) else body
    values = parse_qs(text, keep_blank_values=True).get("data", [""])
    return values[0]


def _answer(
    entry: Optional[Mapping[str, Any]], query: str, call: int
) -> Tuple[int, str, str]:
    if entry is None:
        try:
            parse(query)
        except QuerySyntaxError as e:
            message = f"line {e.line}: parse error: {e.message}"
            return 400, "text/html; charset=utf-8", parse_error_page(message)
        return 200, "application/json", json.dumps({"elements": []})

    sequence: List[Mapping[str, Any]] = list(entry.get("sequence", [])) or [entry]
    step = sequence[min(call, len(sequence) - 1)]
    body = step.get("body", "")
    if not isinstance(body, str):
        body = json.dumps(body, ensure_ascii=False)
    return (
        int(step.get("status_code", 200)),
        str(step.get("content_type", "application/json")),
        body,
    )


def _build_response(
    request: requests.PreparedRequest, status: int, content_type: str, body: str
) -> requests.Response:
    response = requests.Response()
    response.status_code = status
    response.reason = _REASONS.get(status, "")
    response.headers = CaseInsensitiveDict({"Content-Type": content_type})
    response._content = body.encode("utf-8")
    response.encoding = "utf-8"
    response.url = request.url or ""
    response.request = request
    return response
