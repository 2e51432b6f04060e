"""Canonical text rendering of a QueryAst and template normalization."""

import re
from typing import Callable, Dict, List, Optional, Tuple, Type

from oqleval.core.nodes import (
    AreaPivot,
    Around,
    BoundingBox,
    ByArea,
    ByDateOfChange,
    ByElementId,
    ByInputSet,
    ByPolygon,
    ByTag,
    ByUser,
    ByWayCount,
    Compare,
    Complete,
    ConditionalQueryFilter,
    Convert,
    Difference,
    Filter,
    For,
    ForEach,
    If,
    IsIn,
    Item,
    Local,
    MacroKind,
    Make,
    Matcher,
    Newer,
    Opaque,
    Out,
    QueryAst,
    QueryStatement,
    RecurseBy,
    RecurseDown,
    RecurseDownRelations,
    RecurseUp,
    RecurseUpRelations,
    Retro,
    Statement,
    TagFilter,
    Timeline,
    TurboMacro,
    Union,
    encode_string,
)

KEY_PLACEHOLDER = "⟨K⟩"
VALUE_PLACEHOLDER = "⟨V⟩"
SET_PLACEHOLDER = "⟨S⟩"
NUMBER_PLACEHOLDER = "⟨N⟩"
ARGUMENT_PLACEHOLDER = "⟨A⟩"
EXPRESSION_PLACEHOLDER = "⟨E⟩"
DEFAULT_SET = "_"

_DIGITS_RE = re.compile(r"\d+(?:\.\d+)?")
_RECURSE_SYMBOLS: Dict[Type[Statement], str] = {
    RecurseDown: ">",
    RecurseDownRelations: ">>",
    RecurseUp: "<",
    RecurseUpRelations: "<<",
}
_TAG_OPERATORS = {
    Matcher.EQUALS: "=",
    Matcher.NOT_EQUALS: "!=",
    Matcher.REGEX: "~",
    Matcher.NOT_REGEX: "!~",
}


class QueryWriter:
    """
    Renders AST nodes as compact OverpassQL.

    With anonymize=True tag keys, tag values, set names, user names, macro
    arguments and free-form expression text are replaced by placeholders and
    Turbo directives are dropped.
    """

    def __init__(self, anonymize: bool = False) -> None:
        self.anonymize = anonymize
        self._statement_writers: Dict[type, Callable[[Statement], str]] = {
            QueryStatement: self._query,
            Union: self._union,
            Difference: self._difference,
            If: self._if,
            ForEach: self._foreach,
            For: self._for,
            Complete: self._complete,
            Retro: self._retro,
            Compare: self._compare,
            Out: self._out,
            IsIn: self._is_in,
            Item: self._item,
            Convert: self._convert,
            Make: self._make,
            Timeline: self._timeline,
            Local: self._local,
            Opaque: self._opaque,
        }
        self._filter_writers: Dict[type, Callable[[Filter], str]] = {
            ByTag: self._by_tag,
            BoundingBox: self._bbox,
            ByArea: self._by_area,
            AreaPivot: self._pivot,
            ByInputSet: self._input_set,
            ByElementId: self._by_id,
            Around: self._around,
            ByPolygon: self._poly,
            Newer: self._newer,
            ByDateOfChange: self._changed,
            ByUser: self._user,
            RecurseBy: self._recurse_by,
            ByWayCount: self._way_count,
            ConditionalQueryFilter: self._conditional,
        }

    def write(self, ast: QueryAst) -> str:
        parts: List[str] = []
        if ast.settings:
            parts.append("".join(f"[{name}:{value}]" for name, value in ast.settings))
            parts.append(";")
        if not self.anonymize:
            parts.extend(macro.render() for macro in ast.directives)
        parts.append(self.statements(ast.statements))
        return "".join(parts)

    def statements(self, statements: Tuple[Statement, ...]) -> str:
        return "".join(self.statement(s) for s in statements)

    def statement(self, statement: Statement) -> str:
        if isinstance(statement, tuple(_RECURSE_SYMBOLS)):
            symbol = _RECURSE_SYMBOLS[type(statement)]
            prefix = self._prefix(statement.input_set)  # type: ignore[attr-defined]
            output = self._output(statement.output)  # type: ignore[attr-defined]
            return f"{prefix}{symbol}{output};"
        writer = self._statement_writers.get(type(statement))
        if writer is None:
            raise TypeError(f"Cannot write statement {type(statement).__name__}")
        return writer(statement)

    def filter(self, item: Filter) -> str:
        return self._filter_writers[type(item)](item)

    # -- pieces ------------------------------------------------------------

    def _set(self, name: str) -> str:
        if self.anonymize and name != DEFAULT_SET:
            return SET_PLACEHOLDER
        return name

    def _output(self, name: Optional[str]) -> str:
        return f"->.{self._set(name)}" if name is not None else ""

    def _prefix(self, input_set: Optional[str]) -> str:
        return f".{self._set(input_set)} " if input_set is not None else ""

    def _suffix(self, set_name: Optional[str]) -> str:
        return f".{self._set(set_name)}" if set_name is not None else ""

    def _macro(self, macro: TurboMacro) -> str:
        if self.anonymize and macro.argument is not None:
            return macro.render(ARGUMENT_PLACEHOLDER)
        return macro.render()

    def _block(self, body: Tuple[Statement, ...]) -> str:
        return "{" + self.statements(body) + "}"

    def _tag_text(self, text: str, placeholder: str) -> str:
        if self.anonymize:
            return placeholder
        if text.startswith("{{") and text.endswith("}}"):
            return text
        return encode_string(text)

    def _expression(self, text: str) -> str:
        return EXPRESSION_PLACEHOLDER if self.anonymize else text

    # -- statements --------------------------------------------------------

    def _query(self, statement: Statement) -> str:
        assert isinstance(statement, QueryStatement)
        bare = bare_geocode_macro(statement)
        if bare is not None:
            return f"{self._macro(bare)}{self._output(statement.output)};"
        filters = "".join(self.filter(f) for f in statement.filters)
        return f"{statement.kind}{filters}{self._output(statement.output)};"

    def _union(self, statement: Statement) -> str:
        assert isinstance(statement, Union)
        body = self.statements(statement.statements)
        return f"({body}){self._output(statement.output)};"

    def _difference(self, statement: Statement) -> str:
        assert isinstance(statement, Difference)
        minuend = self.statement(statement.minuend)
        subtrahend = self.statement(statement.subtrahend)
        return f"({minuend}-{subtrahend}){self._output(statement.output)};"

    def _if(self, statement: Statement) -> str:
        assert isinstance(statement, If)
        condition = self._expression(statement.condition)
        text = f"if({condition}){self._block(statement.then)}"
        if statement.orelse is not None:
            text += f"else{self._block(statement.orelse)}"
        return text

    def _foreach(self, statement: Statement) -> str:
        assert isinstance(statement, ForEach)
        return (
            f"foreach{self._suffix(statement.input_set)}"
            f"{self._output(statement.loop_set)}{self._block(statement.body)}"
        )

    def _for(self, statement: Statement) -> str:
        assert isinstance(statement, For)
        return (
            f"for{self._suffix(statement.input_set)}{self._output(statement.loop_set)}"
            f"({statement.expression}){self._block(statement.body)}"
        )

    def _complete(self, statement: Statement) -> str:
        assert isinstance(statement, Complete)
        limit = f"({statement.limit})" if statement.limit is not None else ""
        return (
            f"complete{self._suffix(statement.input_set)}"
            f"{self._output(statement.output)}{limit}{self._block(statement.body)}"
        )

    def _retro(self, statement: Statement) -> str:
        assert isinstance(statement, Retro)
        return f"retro({statement.date}){self._block(statement.body)}"

    def _compare(self, statement: Statement) -> str:
        assert isinstance(statement, Compare)
        delta = f"(delta:{statement.delta})" if statement.delta is not None else ""
        head = (
            f"compare{self._suffix(statement.input_set)}"
            f"{self._output(statement.output)}{delta}"
        )
        if statement.body is None:
            return head + ";"
        return head + self._block(statement.body)

    def _out(self, statement: Statement) -> str:
        assert isinstance(statement, Out)
        parameters = "".join(f" {p}" for p in statement.parameters)
        return f"{self._prefix(statement.input_set)}out{parameters};"

    def _is_in(self, statement: Statement) -> str:
        assert isinstance(statement, IsIn)
        coords = f"({','.join(statement.coords)})" if statement.coords else ""
        return (
            f"{self._prefix(statement.input_set)}is_in{coords}"
            f"{self._output(statement.output)};"
        )

    def _item(self, statement: Statement) -> str:
        assert isinstance(statement, Item)
        return f".{self._set(statement.set_name)}{self._output(statement.output)};"

    def _convert(self, statement: Statement) -> str:
        assert isinstance(statement, Convert)
        return self._assigning("convert", statement)

    def _make(self, statement: Statement) -> str:
        assert isinstance(statement, Make)
        return self._assigning("make", statement)

    def _assigning(self, word: str, statement: Statement) -> str:
        assert isinstance(statement, (Convert, Make))
        assignments = (
            f" {self._expression(statement.assignments)}"
            if statement.assignments
            else ""
        )
        return (
            f"{self._prefix(statement.input_set)}{word} {statement.element_type}"
            f"{assignments}{self._output(statement.output)};"
        )

    def _timeline(self, statement: Statement) -> str:
        assert isinstance(statement, Timeline)
        return f"timeline({statement.arguments}){self._output(statement.output)};"

    def _local(self, statement: Statement) -> str:
        assert isinstance(statement, Local)
        mode = f" {statement.mode}" if statement.mode is not None else ""
        return (
            f"{self._prefix(statement.input_set)}local{mode}"
            f"{self._output(statement.output)};"
        )

    def _opaque(self, statement: Statement) -> str:
        assert isinstance(statement, Opaque)
        return f"{self._expression(statement.text)};"

    # -- filters -----------------------------------------------------------

    def _by_tag(self, item: Filter) -> str:
        assert isinstance(item, ByTag)
        return self.tag_filter(item.tag)

    def tag_filter(self, tag: TagFilter) -> str:
        key = self._tag_text(tag.key, KEY_PLACEHOLDER)
        flag = ",i" if tag.case_insensitive else ""
        if tag.matcher is Matcher.EXISTS:
            return f"[{key}]"
        if tag.matcher is Matcher.NOT_EXISTS:
            return f"[!{key}]"
        assert tag.value is not None
        value = self._tag_text(tag.value, VALUE_PLACEHOLDER)
        if tag.matcher is Matcher.KEY_REGEX:
            return f"[~{key}~{value}{flag}]"
        return f"[{key}{_TAG_OPERATORS[tag.matcher]}{value}{flag}]"

    def _bbox(self, item: Filter) -> str:
        assert isinstance(item, BoundingBox)
        if item.macro is not None:
            return f"({self._macro(item.macro)})"
        return f"({','.join(item.coords)})"

    def _by_area(self, item: Filter) -> str:
        assert isinstance(item, ByArea)
        if item.area_id is not None:
            return f"(area:{item.area_id})"
        return f"(area{self._suffix(item.set_name)})"

    def _pivot(self, item: Filter) -> str:
        assert isinstance(item, AreaPivot)
        return f"(pivot{self._suffix(item.set_name)})"

    def _input_set(self, item: Filter) -> str:
        assert isinstance(item, ByInputSet)
        return f".{self._set(item.set_name)}"

    def _by_id(self, item: Filter) -> str:
        assert isinstance(item, ByElementId)
        if item.macro is not None:
            return f"({self._macro(item.macro)})"
        if len(item.ids) == 1:
            return f"({item.ids[0]})"
        return f"(id:{','.join(item.ids)})"

    def _around(self, item: Filter) -> str:
        assert isinstance(item, Around)
        reference = list(item.coords)
        if item.macro is not None:
            reference.append(self._macro(item.macro))
        tail = "".join(f",{r}" for r in reference)
        return f"(around{self._suffix(item.set_name)}:{item.radius}{tail})"

    def _poly(self, item: Filter) -> str:
        assert isinstance(item, ByPolygon)
        return f"(poly:{encode_string(item.points)})"

    def _newer(self, item: Filter) -> str:
        assert isinstance(item, Newer)
        return f"(newer:{item.date})"

    def _changed(self, item: Filter) -> str:
        assert isinstance(item, ByDateOfChange)
        if not item.dates:
            return "(changed)"
        return f"(changed:{','.join(item.dates)})"

    def _user(self, item: Filter) -> str:
        assert isinstance(item, ByUser)
        names = item.names
        if self.anonymize:
            names = tuple(VALUE_PLACEHOLDER for _ in names)
        return f"({item.kind}:{','.join(names)})"

    def _recurse_by(self, item: Filter) -> str:
        assert isinstance(item, RecurseBy)
        role = ""
        if item.role is not None:
            text = VALUE_PLACEHOLDER if self.anonymize else encode_string(item.role)
            role = ":" + text
        return f"({item.kind}{self._suffix(item.set_name)}{role})"

    def _way_count(self, item: Filter) -> str:
        assert isinstance(item, ByWayCount)
        return f"({item.kind}:{item.bounds})"

    def _conditional(self, item: Filter) -> str:
        assert isinstance(item, ConditionalQueryFilter)
        return f"(if:{self._expression(item.expression)})"


def bare_geocode_macro(statement: QueryStatement) -> Optional[TurboMacro]:
    """The macro of a statement written as a bare `{{geocode...}}` line, if any."""
    if len(statement.filters) != 1:
        return None
    only = statement.filters[0]
    if not isinstance(only, ByElementId) or only.macro is None:
        return None
    expected = {MacroKind.GEOCODE_AREA: "area", MacroKind.GEOCODE_ID: "nwr"}
    if expected.get(only.macro.kind) == statement.kind:
        return only.macro
    return None


def serialize(ast: QueryAst) -> str:
    """Compact canonical text; parse(serialize(ast)) == ast."""
    return QueryWriter().write(ast)


def normalize_template(ast: QueryAst) -> str:
    """Query template with keys, values, set names, user names, macro
    arguments, expressions and digits replaced by placeholders."""
    return _DIGITS_RE.sub(NUMBER_PLACEHOLDER, QueryWriter(anonymize=True).write(ast))
