"""Exception hierarchy for oqleval."""

from typing import List, Optional, Tuple


class OqlEvalError(Exception):
    """Base class for all oqleval errors."""


class ConfigError(OqlEvalError):
    """Invalid configuration values."""


class QuerySyntaxError(OqlEvalError):
    """Base class for lexing and parsing failures."""

    def __init__(
        self,
        message: str,
        span: Tuple[int, int],
        line: int = 1,
        column: int = 1,
    ) -> None:
        super().__init__(f"line {line}, column {column}: {message}")
        self.message = message
        self.span = span
        self.line = line
        self.column = column


class LexError(QuerySyntaxError):
    """Unterminated string, regex, comment or Turbo macro."""


class ParseError(QuerySyntaxError):
    """Token stream does not form a valid OverpassQL query."""


class MacroError(OqlEvalError):
    """Overpass Turbo macro cannot be expanded."""


class MetricError(OqlEvalError):
    """A metric cannot be computed for the given inputs."""


class CorpusError(OqlEvalError):
    """Corpus file is malformed."""

    def __init__(self, problems: List[Tuple[int, str]], path: Optional[str] = None):
        self.problems = problems
        self.path = path
        where = f"{path}: " if path else ""
        details = "; ".join(f"line {line}: {msg}" for line, msg in problems[:10])
        more = f" (+{len(problems) - 10} more)" if len(problems) > 10 else ""
        super().__init__(f"{where}{details}{more}")


class GenerationError(OqlEvalError):
    """The generation client failed to produce a completion."""


class HarnessError(OqlEvalError):
    """Invalid harness request (shot count, missing provider, ...)."""


class PayloadError(OqlEvalError):
    """Overpass response body cannot be read in its declared format."""
