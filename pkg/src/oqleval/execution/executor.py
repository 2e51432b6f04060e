"""Executing queries against an Overpass API endpoint."""

import html
import logging
import re
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import requests

from oqleval.errors import MacroError, PayloadError, QuerySyntaxError
from oqleval.execution.cache import OutcomeCache
from oqleval.execution.config import ExecutionConfig
from oqleval.execution.fixture import FIXTURE_SCHEME, mount_fixture
from oqleval.execution.geocode import GeocodeResolver
from oqleval.execution.macros import expand_macros
from oqleval.execution.payload import detect_format, extract_elements, format_record
from oqleval.metrics.elements import ElementRef
from oqleval.utils.constants import NO_RESULTS_FEEDBACK

RETRY_STATUS_CODES = frozenset({429, 502, 503})
_SERVER_ERROR_RE = re.compile(
    r"<strong[^>]*>\s*Error\s*</strong>\s*:\s*(.*?)\s*</p>", re.DOTALL | re.IGNORECASE
)
_TAG_RE = re.compile(r"<[^>]+>")


class ExecutionStatus(str, Enum):
    OK = "ok"
    SYNTAX_ERROR = "syntax_error"
    RUNTIME_ERROR = "runtime_error"
    TIMEOUT = "timeout"
    TRANSPORT_ERROR = "transport_error"


# Outcomes that a fixed snapshot reproduces; only these are cached
CACHEABLE_STATUSES = frozenset(
    {ExecutionStatus.OK, ExecutionStatus.SYNTAX_ERROR, ExecutionStatus.RUNTIME_ERROR}
)


@dataclass(frozen=True)
class ExecutionOutcome:
    """Result of executing one query."""

    status: ExecutionStatus
    elements: Optional[frozenset] = None
    error_message: str = ""
    elapsed: float = 0.0
    returned_count: int = 0
    sample: Tuple[Dict[str, Any], ...] = field(default=(), compare=False)
    from_cache: bool = field(default=False, compare=False)

    def __post_init__(self) -> None:
        if (self.status is ExecutionStatus.OK) != (self.elements is not None):
            raise ValueError("elements are present exactly when status is ok")

    @property
    def ok(self) -> bool:
        return self.status is ExecutionStatus.OK

    def to_record(self) -> Dict[str, Any]:
        return {
            "status": self.status.value,
            "elements": sorted(
                [e.kind, e.id, e.content_hash] for e in (self.elements or ())
            )
            if self.elements is not None
            else None,
            "message": self.error_message,
            "returned_count": self.returned_count,
            "sample": list(self.sample),
        }

    @classmethod
    def from_record(cls, record: Dict[str, Any]) -> "ExecutionOutcome":
        raw = record.get("elements")
        elements = (
            frozenset(ElementRef(kind=k, id=i, content_hash=h) for k, i, h in raw)
            if raw is not None
            else None
        )
        return cls(
            status=ExecutionStatus(record["status"]),
            elements=elements,
            error_message=record.get("message", ""),
            returned_count=int(record.get("returned_count", 0)),
            sample=tuple(record.get("sample", [])),
            from_cache=True,
        )


def server_error_message(body: str) -> str:
    """The `Error: ...` lines of an Overpass error page, else the stripped body."""
    found = [
        "Error: " + html.unescape(_TAG_RE.sub("", m)).strip()
        for m in _SERVER_ERROR_RE.findall(body)
    ]
    if found:
        return "\n".join(found)
    return html.unescape(_TAG_RE.sub("", body)).strip()


class Executor:
    """
    Executes queries with bounded concurrency, retries and an outcome cache.

    Safe to call from many threads: a semaphore caps in-flight requests at
    `cfg.max_inflight`.
    """

    def __init__(
        self,
        cfg: ExecutionConfig,
        resolver: GeocodeResolver,
        session: Optional[requests.Session] = None,
        sleep: Callable[[float], None] = time.sleep,
    ) -> None:
        self.cfg = cfg
        self.resolver = resolver
        self.session = session or requests.Session()
        self.logger = logging.getLogger(__name__)
        self._sleep = sleep
        self._inflight = threading.BoundedSemaphore(cfg.max_inflight)
        self.cache = OutcomeCache(cfg.cache_dir) if cfg.cache_dir else None
        if cfg.endpoint_url.startswith(FIXTURE_SCHEME) and session is None:
            mount_fixture(self.session)

    def expand(self, text: str) -> str:
        """Expanded query text; lexically broken text is sent unchanged."""
        try:
            return expand_macros(text, self.cfg, self.resolver)
        except QuerySyntaxError:
            return text

    def execute(self, text: str) -> ExecutionOutcome:
        """
        Execute one query.

        Server and transport problems are reported through the outcome
        status; this method does not raise for them.
        """
        started = time.monotonic()
        try:
            expanded = self.expand(text)
        except MacroError as e:
            self.logger.info(f"Macro expansion failed: {e}")
            return ExecutionOutcome(
                status=ExecutionStatus.RUNTIME_ERROR,
                error_message=f"Error: {e}",
                elapsed=time.monotonic() - started,
            )

        key = OutcomeCache.key(self.cfg.endpoint_url, expanded)
        if self.cache is not None:
            record = self.cache.get(key)
            if record is not None:
                return ExecutionOutcome.from_record(record)

        outcome = self._run(expanded, started)

        if self.cache is not None and outcome.status in CACHEABLE_STATUSES:
            self.cache.put(key, outcome.to_record())
        return outcome

    def execute_many(
        self, texts: Sequence[str], jobs: int = 1
    ) -> List[ExecutionOutcome]:
        """Execute several queries; results are in input order."""
        if jobs <= 1:
            return [self.execute(t) for t in texts]
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(self.execute, texts))

    def _run(self, expanded: str, started: float) -> ExecutionOutcome:
        policy = self.cfg.retry_policy
        last_failure = ""
        for attempt in range(policy.max_attempts):
            try:
                with self._inflight:
                    response = self.session.post(
                        self.cfg.interpreter_url,
                        data={"data": expanded},
                        headers={"User-Agent": self.cfg.user_agent},
                        timeout=self.cfg.request_timeout,
                    )
            except requests.Timeout as e:
                return ExecutionOutcome(
                    status=ExecutionStatus.TIMEOUT,
                    error_message=f"Request timed out: {e}",
                    elapsed=time.monotonic() - started,
                )
            except requests.RequestException as e:
                last_failure = f"Transport error: {e}"
            else:
                if response.status_code not in RETRY_STATUS_CODES:
                    return self._classify(response, started)
                last_failure = f"HTTP {response.status_code} {response.reason}".strip()

            if attempt + 1 < policy.max_attempts:
                delay = policy.backoff_seconds * 2**attempt
                self.logger.warning(
                    f"{last_failure}; retrying in {delay:.1f}s "
                    f"(attempt {attempt + 2}/{policy.max_attempts})"
                )
                self._sleep(delay)

        return ExecutionOutcome(
            status=ExecutionStatus.TRANSPORT_ERROR,
            error_message=last_failure,
            elapsed=time.monotonic() - started,
        )

    def _classify(
        self, response: requests.Response, started: float
    ) -> ExecutionOutcome:
        elapsed = time.monotonic() - started
        status_code = response.status_code

        if status_code == 400:
            return ExecutionOutcome(
                status=ExecutionStatus.SYNTAX_ERROR,
                error_message=server_error_message(response.text),
                elapsed=elapsed,
            )
        if status_code == 504:
            return ExecutionOutcome(
                status=ExecutionStatus.TIMEOUT,
                error_message="Error: HTTP 504 Gateway Timeout",
                elapsed=elapsed,
            )
        if status_code != 200:
            return ExecutionOutcome(
                status=ExecutionStatus.RUNTIME_ERROR,
                error_message=f"Error: HTTP {status_code}: "
                f"{server_error_message(response.text)[:500]}",
                elapsed=elapsed,
            )

        body = response.content
        fmt = detect_format(response.headers.get("Content-Type", ""), body)
        try:
            payload = extract_elements(body, fmt)
        except PayloadError as e:
            return ExecutionOutcome(
                status=ExecutionStatus.RUNTIME_ERROR,
                error_message=f"Error: {e}",
                elapsed=elapsed,
            )

        if payload.remark:
            timed_out = "timed out" in payload.remark.lower()
            return ExecutionOutcome(
                status=(
                    ExecutionStatus.TIMEOUT
                    if timed_out
                    else ExecutionStatus.RUNTIME_ERROR
                ),
                error_message=payload.remark,
                elapsed=elapsed,
                returned_count=payload.returned_count,
            )

        return ExecutionOutcome(
            status=ExecutionStatus.OK,
            elements=payload.elements,
            elapsed=elapsed,
            returned_count=payload.returned_count,
            sample=payload.sample,
        )


def feedback_from_outcome(outcome: ExecutionOutcome, sample_size: int = 1) -> str:
    """
    Execution feedback for a refinement prompt.

    Failures give the error message verbatim, an empty result gives
    `No Results found.`, otherwise the first records one per line.
    """
    if not outcome.ok:
        return outcome.error_message
    if not outcome.elements:
        return NO_RESULTS_FEEDBACK
    return "\n".join(format_record(r) for r in outcome.sample[:sample_size])
