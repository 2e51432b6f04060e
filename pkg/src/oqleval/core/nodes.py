"""AST node types for parsed OverpassQL queries.

All nodes are frozen dataclasses holding tuples, so two parses of the same
query compare equal and nodes can be shared between threads.
"""

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, Optional, Tuple

ELEMENT_KINDS = frozenset(
    {"node", "way", "relation", "nwr", "nw", "nr", "wr", "area", "derived"}
)


class MacroKind(str, Enum):
    """Overpass Turbo macro families."""

    BBOX = "bbox"
    GEOCODE_AREA = "geocodeArea"
    GEOCODE_COORDS = "geocodeCoords"
    GEOCODE_ID = "geocodeId"
    OTHER = "other"


_MACRO_KINDS = {kind.value: kind for kind in MacroKind if kind is not MacroKind.OTHER}
_DEFINITION_RE = re.compile(r"^\s*([A-Za-z_][\w-]*)\s*=(.*)$", re.DOTALL)
_MACRO_NAME_RE = re.compile(r"^\s*([A-Za-z_][\w-]*)\s*(?::(.*))?$", re.DOTALL)


def decode_string(lexeme: str) -> str:
    """Strip quotes from a string lexeme and resolve escapes."""
    body = lexeme[1:-1]
    out = []
    i = 0
    while i < len(body):
        ch = body[i]
        if ch == "\\" and i + 1 < len(body):
            nxt = body[i + 1]
            if nxt in "\"'\\":
                out.append(nxt)
            elif nxt == "n":
                out.append("\n")
            elif nxt == "t":
                out.append("\t")
            else:
                out.append(ch + nxt)
            i += 2
            continue
        out.append(ch)
        i += 1
    return "".join(out)


def encode_string(value: str) -> str:
    """Quote a string value so that decode_string returns it unchanged."""
    escaped = (
        value.replace("\\", "\\\\")
        .replace('"', '\\"')
        .replace("\n", "\\n")
        .replace("\t", "\\t")
    )
    return f'"{escaped}"'


@dataclass(frozen=True)
class TurboMacro:
    """An Overpass Turbo `{{...}}` macro."""

    kind: MacroKind
    name: str
    argument: Optional[str] = None
    is_definition: bool = False
    raw: str = field(default="", compare=False)

    def __post_init__(self) -> None:
        if self.kind is MacroKind.GEOCODE_AREA and not self.argument:
            raise ValueError("geocodeArea macro requires an area name")

    @property
    def is_directive(self) -> bool:
        """Style/data blocks and shortcut definitions carry no query meaning."""
        return self.is_definition or self.name in ("style", "data")

    def render(self, argument: Optional[str] = None) -> str:
        """Render the macro; `argument` replaces the argument text when given."""
        if self.kind is MacroKind.OTHER and self.raw and argument is None:
            return self.raw
        if self.is_definition:
            value = argument if argument is not None else self.argument
            return f"{{{{{self.name}={value}}}}}"
        if self.argument is None:
            return f"{{{{{self.name}}}}}"
        text = argument if argument is not None else encode_string(self.argument)
        return f"{{{{{self.name}:{text}}}}}"


def parse_macro(lexeme: str) -> TurboMacro:
    """Classify a `{{...}}` lexeme."""
    inner = lexeme[2:-2]

    definition = _DEFINITION_RE.match(inner)
    if definition and ":" not in definition.group(1):
        return TurboMacro(
            kind=MacroKind.OTHER,
            name=definition.group(1),
            argument=definition.group(2).strip(),
            is_definition=True,
            raw=lexeme,
        )

    named = _MACRO_NAME_RE.match(inner)
    if not named:
        return TurboMacro(kind=MacroKind.OTHER, name=inner.strip(), raw=lexeme)

    name = named.group(1)
    argument = named.group(2)
    if argument is not None:
        argument = argument.strip()
        if len(argument) >= 2 and argument[0] == argument[-1] and argument[0] in "\"'":
            argument = decode_string(argument)

    kind = _MACRO_KINDS.get(name, MacroKind.OTHER)
    return TurboMacro(kind=kind, name=name, argument=argument, raw=lexeme)


class Matcher(str, Enum):
    """How a tag filter matches an element's tags."""

    EXISTS = "exists"
    NOT_EXISTS = "not-exists"
    EQUALS = "equals"
    NOT_EQUALS = "not-equals"
    REGEX = "regex"
    NOT_REGEX = "not-regex"
    KEY_REGEX = "key-regex"


@dataclass(frozen=True)
class TagFilter:
    """A single `[...]` tag condition; patterns are stored verbatim."""

    key: str
    matcher: Matcher
    value: Optional[str] = None
    case_insensitive: bool = False

    def __post_init__(self) -> None:
        if self.matcher in (Matcher.EXISTS, Matcher.NOT_EXISTS):
            if self.value is not None:
                raise ValueError(f"{self.matcher.value} filter carries no value")
        elif self.value is None:
            raise ValueError(f"{self.matcher.value} filter requires a value")


# ---------------------------------------------------------------------------
# Filters


class Filter:
    """Base class of query-statement filters."""


@dataclass(frozen=True)
class ByTag(Filter):
    tag: TagFilter


@dataclass(frozen=True)
class BoundingBox(Filter):
    coords: Tuple[str, ...] = ()
    macro: Optional[TurboMacro] = None


@dataclass(frozen=True)
class ByArea(Filter):
    set_name: Optional[str] = None
    area_id: Optional[str] = None


@dataclass(frozen=True)
class AreaPivot(Filter):
    set_name: Optional[str] = None


@dataclass(frozen=True)
class ByInputSet(Filter):
    set_name: str


@dataclass(frozen=True)
class ByElementId(Filter):
    ids: Tuple[str, ...] = ()
    macro: Optional[TurboMacro] = None


@dataclass(frozen=True)
class Around(Filter):
    radius: str
    set_name: Optional[str] = None
    coords: Tuple[str, ...] = ()
    macro: Optional[TurboMacro] = None


@dataclass(frozen=True)
class ByPolygon(Filter):
    points: str


@dataclass(frozen=True)
class Newer(Filter):
    date: str


@dataclass(frozen=True)
class ByDateOfChange(Filter):
    dates: Tuple[str, ...] = ()


@dataclass(frozen=True)
class ByUser(Filter):
    kind: str
    names: Tuple[str, ...]


@dataclass(frozen=True)
class RecurseBy(Filter):
    kind: str
    set_name: Optional[str] = None
    role: Optional[str] = None


@dataclass(frozen=True)
class ByWayCount(Filter):
    kind: str
    bounds: str


@dataclass(frozen=True)
class ConditionalQueryFilter(Filter):
    expression: str


# ---------------------------------------------------------------------------
# Statements


class Statement:
    """Base class of OverpassQL statements."""

    def substatements(self) -> Tuple["Statement", ...]:
        """Statements nested directly inside this one."""
        return ()


@dataclass(frozen=True)
class QueryStatement(Statement):
    kind: str
    filters: Tuple[Filter, ...] = ()
    output: Optional[str] = None

    @property
    def input_sets(self) -> Tuple[str, ...]:
        return tuple(f.set_name for f in self.filters if isinstance(f, ByInputSet))


@dataclass(frozen=True)
class Union(Statement):
    statements: Tuple[Statement, ...] = ()
    output: Optional[str] = None

    def substatements(self) -> Tuple[Statement, ...]:
        return self.statements


@dataclass(frozen=True)
class Difference(Statement):
    minuend: Statement
    subtrahend: Statement
    output: Optional[str] = None

    def substatements(self) -> Tuple[Statement, ...]:
        return (self.minuend, self.subtrahend)


@dataclass(frozen=True)
class If(Statement):
    condition: str
    then: Tuple[Statement, ...] = ()
    orelse: Optional[Tuple[Statement, ...]] = None

    def substatements(self) -> Tuple[Statement, ...]:
        return self.then + (self.orelse or ())


@dataclass(frozen=True)
class ForEach(Statement):
    body: Tuple[Statement, ...] = ()
    input_set: Optional[str] = None
    loop_set: Optional[str] = None

    def substatements(self) -> Tuple[Statement, ...]:
        return self.body


@dataclass(frozen=True)
class For(Statement):
    expression: str
    body: Tuple[Statement, ...] = ()
    input_set: Optional[str] = None
    loop_set: Optional[str] = None

    def substatements(self) -> Tuple[Statement, ...]:
        return self.body


@dataclass(frozen=True)
class Complete(Statement):
    body: Tuple[Statement, ...] = ()
    limit: Optional[str] = None
    input_set: Optional[str] = None
    output: Optional[str] = None

    def substatements(self) -> Tuple[Statement, ...]:
        return self.body


@dataclass(frozen=True)
class Retro(Statement):
    date: str
    body: Tuple[Statement, ...] = ()

    def substatements(self) -> Tuple[Statement, ...]:
        return self.body


@dataclass(frozen=True)
class Compare(Statement):
    delta: Optional[str] = None
    body: Optional[Tuple[Statement, ...]] = None
    input_set: Optional[str] = None
    output: Optional[str] = None

    def substatements(self) -> Tuple[Statement, ...]:
        return self.body or ()


@dataclass(frozen=True)
class Out(Statement):
    parameters: Tuple[str, ...] = ()
    input_set: Optional[str] = None


@dataclass(frozen=True)
class RecurseDown(Statement):
    input_set: Optional[str] = None
    output: Optional[str] = None


@dataclass(frozen=True)
class RecurseDownRelations(Statement):
    input_set: Optional[str] = None
    output: Optional[str] = None


@dataclass(frozen=True)
class RecurseUp(Statement):
    input_set: Optional[str] = None
    output: Optional[str] = None


@dataclass(frozen=True)
class RecurseUpRelations(Statement):
    input_set: Optional[str] = None
    output: Optional[str] = None


RECURSE_OPERATORS = {
    ">": RecurseDown,
    ">>": RecurseDownRelations,
    "<": RecurseUp,
    "<<": RecurseUpRelations,
}


@dataclass(frozen=True)
class IsIn(Statement):
    coords: Tuple[str, ...] = ()
    input_set: Optional[str] = None
    output: Optional[str] = None


@dataclass(frozen=True)
class Item(Statement):
    set_name: str
    output: Optional[str] = None


@dataclass(frozen=True)
class Convert(Statement):
    element_type: str
    assignments: str = ""
    input_set: Optional[str] = None
    output: Optional[str] = None


@dataclass(frozen=True)
class Make(Statement):
    element_type: str
    assignments: str = ""
    input_set: Optional[str] = None
    output: Optional[str] = None


@dataclass(frozen=True)
class Timeline(Statement):
    arguments: str
    output: Optional[str] = None


@dataclass(frozen=True)
class Local(Statement):
    mode: Optional[str] = None
    input_set: Optional[str] = None
    output: Optional[str] = None


@dataclass(frozen=True)
class Opaque(Statement):
    """A well-bracketed statement the parser does not model."""

    text: str


@dataclass(frozen=True)
class QueryAst:
    """Parsed query: header settings, statements and Turbo directives."""

    settings: Tuple[Tuple[str, str], ...] = ()
    statements: Tuple[Statement, ...] = ()
    directives: Tuple[TurboMacro, ...] = ()

    def setting(self, name: str) -> Optional[str]:
        for key, value in self.settings:
            if key == name:
                return value
        return None


def iter_statements(statements: Tuple[Statement, ...]) -> Iterator[Statement]:
    """Yield statements depth-first, parents before children."""
    for statement in statements:
        yield statement
        yield from iter_statements(statement.substatements())


def iter_filters(ast: QueryAst) -> Iterator[Filter]:
    """Yield every filter of every query statement in the query."""
    for statement in iter_statements(ast.statements):
        if isinstance(statement, QueryStatement):
            yield from statement.filters
