"""Recursive descent parser for OverpassQL with Overpass Turbo macros."""

import logging
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from oqleval.core.lexer import Token, TokenKind, join_tokens, line_column, tokenize
from oqleval.core.nodes import (
    ELEMENT_KINDS,
    RECURSE_OPERATORS,
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
    Make,
    MacroKind,
    Matcher,
    Newer,
    Opaque,
    Out,
    QueryAst,
    QueryStatement,
    RecurseBy,
    Retro,
    Statement,
    TagFilter,
    Timeline,
    TurboMacro,
    Union,
    decode_string,
    parse_macro,
)
from oqleval.errors import ParseError

logger = logging.getLogger(__name__)

KIND_ALIASES = {"rel": "relation"}
RECURSE_FILTER_KINDS = frozenset({"r", "w", "bn", "bw", "br", "bwr"})
USER_FILTER_KINDS = frozenset({"user", "uid", "user_touched", "uid_touched"})
WAY_COUNT_KINDS = frozenset({"way_cnt", "way_link"})
_TAG_OPERATORS = {
    "=": Matcher.EQUALS,
    "!=": Matcher.NOT_EQUALS,
    "~": Matcher.REGEX,
    "!~": Matcher.NOT_REGEX,
}
_NAME_KINDS = (TokenKind.IDENTIFIER, TokenKind.KEYWORD)
_OPENERS = {"(": ")", "[": "]", "{": "}"}


class Parser:
    """Builds a QueryAst from the significant tokens of a query."""

    def __init__(self, text: str) -> None:
        self.text = text
        self.tokens = [t for t in tokenize(text) if not t.is_trivia]
        self.pos = 0
        self._statement_parsers: Dict[str, Callable[[Optional[str]], Statement]] = {
            "out": self._out,
            "is_in": self._is_in,
            "if": self._if,
            "foreach": self._foreach,
            "for": self._for,
            "complete": self._complete,
            "retro": self._retro,
            "compare": self._compare,
            "timeline": self._timeline,
            "local": self._local,
            "convert": self._convert,
            "make": self._make,
        }

    # -- token helpers -----------------------------------------------------

    def _peek(self, offset: int = 0) -> Optional[Token]:
        index = self.pos + offset
        return self.tokens[index] if index < len(self.tokens) else None

    def _at(self, lexeme: str, offset: int = 0) -> bool:
        token = self._peek(offset)
        return (
            token is not None
            and token.lexeme == lexeme
            and token.kind in (TokenKind.PUNCTUATION, TokenKind.KEYWORD)
        )

    def _advance(self) -> Token:
        token = self._peek()
        if token is None:
            self._error("unexpected end of query")
        self.pos += 1
        return token  # type: ignore[return-value]

    def _expect(self, lexeme: str, context: str) -> Token:
        if not self._at(lexeme):
            self._error(f"{context}: expected '{lexeme}', found {self._describe()}")
        return self._advance()

    def _accept(self, lexeme: str) -> bool:
        if self._at(lexeme):
            self.pos += 1
            return True
        return False

    def _describe(self) -> str:
        token = self._peek()
        return "end of query" if token is None else f"'{token.lexeme}'"

    def _error(self, message: str, token: Optional[Token] = None) -> None:
        token = token or self._peek()
        offset = token.start if token is not None else len(self.text)
        end = token.end if token is not None else len(self.text)
        line, column = line_column(self.text, offset)
        raise ParseError(message, (offset, end), line, column)

    def _macro(self, token: Token) -> TurboMacro:
        try:
            return parse_macro(token.lexeme)
        except ValueError as e:
            self._error(str(e), token)
            raise  # unreachable

    def _name(self, context: str) -> str:
        token = self._peek()
        if token is None or token.kind not in _NAME_KINDS:
            self._error(f"{context}: expected a set name, found {self._describe()}")
        return self._advance().lexeme

    def _set_suffix(self) -> Optional[str]:
        """Optional `.name` directly at the cursor."""
        if self._at("."):
            self.pos += 1
            return self._name("set reference")
        return None

    def _output(self) -> Optional[str]:
        """Optional `->.name` assignment."""
        if self._accept("->"):
            self._expect(".", "output set")
            return self._name("output set")
        return None

    def _terminator(self, context: str) -> None:
        if self._accept(";"):
            return
        if self._peek() is None:
            return
        self._error(f"{context}: expected ';', found {self._describe()}")

    def _balanced(self, closers: Sequence[str], context: str) -> List[Token]:
        """Collect tokens up to (not including) a closer at bracket depth 0."""
        collected: List[Token] = []
        stack: List[str] = []
        while True:
            token = self._peek()
            if token is None:
                self._error(f"{context}: unexpected end of query")
            assert token is not None
            lexeme = token.lexeme if token.kind is TokenKind.PUNCTUATION else None
            if not stack and lexeme in closers:
                return collected
            if lexeme in _OPENERS:
                stack.append(_OPENERS[lexeme])
            elif lexeme in (")", "]", "}"):
                if not stack or stack[-1] != lexeme:
                    self._error(f"{context}: unbalanced '{lexeme}'")
                stack.pop()
            collected.append(self._advance())

    def _signed_number(self, context: str) -> str:
        sign = "-" if self._accept("-") else ""
        token = self._peek()
        if token is None or token.kind is not TokenKind.NUMBER:
            self._error(f"{context}: expected a number, found {self._describe()}")
        return sign + self._advance().lexeme

    def _string_or_word(self, context: str) -> str:
        token = self._peek()
        if token is None:
            self._error(f"{context}: unexpected end of query")
        assert token is not None
        if token.is_string:
            self.pos += 1
            return decode_string(token.lexeme)
        if token.is_word:
            self.pos += 1
            return token.lexeme
        self._error(f"{context}: expected a name or string, found {self._describe()}")
        raise AssertionError("unreachable")

    # -- query -------------------------------------------------------------

    def parse(self) -> QueryAst:
        settings = self._settings()
        statements: List[Statement] = []
        directives: List[TurboMacro] = []
        while self._peek() is not None:
            directive = self._directive()
            if directive is not None:
                directives.append(directive)
                continue
            statements.append(self._statement())
        return QueryAst(
            settings=tuple(settings),
            statements=tuple(statements),
            directives=tuple(directives),
        )

    def _settings(self) -> List[Tuple[str, str]]:
        settings: List[Tuple[str, str]] = []
        while self._at("["):
            self.pos += 1
            name = self._name("setting").lower()
            self._expect(":", f"setting '{name}'")
            value = self._balanced(("]",), f"setting '{name}'")
            self._expect("]", f"setting '{name}'")
            settings.append((name, join_tokens(value)))
            if self._accept(";") and not self._at("["):
                break
        return settings

    def _directive(self) -> Optional[TurboMacro]:
        token = self._peek()
        if token is None or token.kind is not TokenKind.MACRO:
            return None
        macro = self._macro(token)
        if not macro.is_directive:
            return None
        self.pos += 1
        self._accept(";")
        return macro

    def _statements_until(self, closer: str, context: str) -> Tuple[Statement, ...]:
        statements: List[Statement] = []
        while not self._at(closer):
            if self._peek() is None:
                self._error(f"{context}: missing '{closer}'")
            if self._directive() is not None:
                continue
            statements.append(self._statement())
        self.pos += 1
        return tuple(statements)

    def _block(self, context: str) -> Tuple[Statement, ...]:
        if self._accept("{"):
            body = self._statements_until("}", context)
        elif self._accept("("):
            body = self._statements_until(")", context)
        else:
            self._error(f"{context}: expected block, found {self._describe()}")
            raise AssertionError("unreachable")
        self._accept(";")
        return body

    def _statement(self) -> Statement:
        token = self._peek()
        assert token is not None

        if token.kind is TokenKind.MACRO:
            return self._macro_statement(token)

        input_set: Optional[str] = None
        if self._at("."):
            self.pos += 1
            input_set = self._name("input set")
            if self._at(";") or self._at("->") or self._peek() is None:
                output = self._output()
                self._terminator("item")
                return Item(set_name=input_set, output=output)

        token = self._peek()
        if token is None:
            self._error("unexpected end of query")
        assert token is not None
        lexeme = token.lexeme

        if token.kind is TokenKind.PUNCTUATION and lexeme in RECURSE_OPERATORS:
            self.pos += 1
            output = self._output()
            self._terminator("recurse")
            return RECURSE_OPERATORS[lexeme](input_set=input_set, output=output)

        if input_set is None and self._at("("):
            return self._union()

        if token.kind is TokenKind.KEYWORD:
            kind = KIND_ALIASES.get(lexeme, lexeme)
            if kind in ELEMENT_KINDS and input_set is None:
                return self._query(kind)
            parser = self._statement_parsers.get(lexeme)
            if parser is not None:
                self.pos += 1
                return parser(input_set)

        return self._opaque(input_set)

    def _opaque(self, input_set: Optional[str]) -> Statement:
        start = self._peek()
        tokens = self._balanced((";", ")", "}"), "statement")
        if not tokens:
            self._error(f"unexpected {self._describe()}", start)
        prefix = f".{input_set} " if input_set is not None else ""
        text = prefix + join_tokens(tokens)
        logger.debug(f"Preserving unrecognised statement as opaque: {text}")
        self._accept(";")
        return Opaque(text=text)

    def _macro_statement(self, token: Token) -> Statement:
        macro = self._macro(token)
        if macro.kind is MacroKind.GEOCODE_AREA:
            kind = "area"
        elif macro.kind is MacroKind.GEOCODE_ID:
            kind = "nwr"
        else:
            return self._opaque(None)
        self.pos += 1
        output = self._output()
        self._terminator("geocode statement")
        return QueryStatement(
            kind=kind, filters=(ByElementId(macro=macro),), output=output
        )

    def _union(self) -> Statement:
        open_token = self._expect("(", "union")
        before: List[Statement] = []
        after: List[Statement] = []
        is_difference = False
        while not self._at(")"):
            if self._peek() is None:
                self._error("union: missing ')'", open_token)
            if self._at("-"):
                if is_difference or len(before) != 1:
                    self._error("difference requires exactly one statement before '-'")
                self.pos += 1
                is_difference = True
                continue
            if self._directive() is not None:
                continue
            (after if is_difference else before).append(self._statement())
        self.pos += 1
        output = self._output()
        self._terminator("union")

        if is_difference:
            if len(after) != 1:
                self._error("difference requires exactly one statement after '-'")
            return Difference(minuend=before[0], subtrahend=after[0], output=output)
        return Union(statements=tuple(before), output=output)

    # -- query statement ---------------------------------------------------

    def _query(self, kind: str) -> Statement:
        self.pos += 1
        input_sets: List[Filter] = []
        filters: List[Filter] = []
        while True:
            if self._at("."):
                self.pos += 1
                input_sets.append(ByInputSet(set_name=self._name("input set")))
            elif self._at("["):
                filters.append(self._tag_filter())
            elif self._at("("):
                filters.append(self._paren_filter())
            else:
                break
        output = self._output()
        self._terminator(f"{kind} query")
        return QueryStatement(
            kind=kind, filters=tuple(input_sets + filters), output=output
        )

    def _tag_filter(self) -> Filter:
        open_token = self._expect("[", "tag filter")

        def close() -> None:
            if not self._at("]"):
                self._error(
                    f"unclosed tag filter: expected ']', found {self._describe()}",
                )
            self.pos += 1

        def value_and_flags() -> Tuple[str, bool]:
            value = self._tag_value()
            insensitive = False
            if self._accept(","):
                flag = self._peek()
                if flag is None or flag.lexeme != "i":
                    self._error("tag filter: only the 'i' flag is supported")
                self.pos += 1
                insensitive = True
            return value, insensitive

        if self._accept("!"):
            key = self._tag_key(open_token)
            close()
            return ByTag(TagFilter(key=key, matcher=Matcher.NOT_EXISTS))

        if self._accept("~"):
            key = self._tag_key(open_token)
            self._expect("~", "key regex filter")
            value, insensitive = value_and_flags()
            close()
            return ByTag(
                TagFilter(
                    key=key,
                    matcher=Matcher.KEY_REGEX,
                    value=value,
                    case_insensitive=insensitive,
                )
            )

        key = self._tag_key(open_token)
        if self._at("]"):
            self.pos += 1
            return ByTag(TagFilter(key=key, matcher=Matcher.EXISTS))

        operator = self._peek()
        if operator is None or operator.lexeme not in _TAG_OPERATORS:
            self._error(
                "unclosed tag filter: expected operator or ']', "
                f"found {self._describe()}"
            )
        assert operator is not None
        self.pos += 1
        value, insensitive = value_and_flags()
        close()
        return ByTag(
            TagFilter(
                key=key,
                matcher=_TAG_OPERATORS[operator.lexeme],
                value=value,
                case_insensitive=insensitive,
            )
        )

    def _tag_key(self, open_token: Token) -> str:
        token = self._peek()
        if token is None or not (token.is_string or token.is_word):
            self._error(
                f"unclosed tag filter: expected key, found {self._describe()}",
            )
        return self._string_or_word("tag filter")

    def _tag_value(self) -> str:
        token = self._peek()
        if token is not None and token.kind is TokenKind.MACRO:
            self.pos += 1
            return token.lexeme
        return self._string_or_word("tag filter value")

    def _paren_filter(self) -> Filter:
        open_token = self._expect("(", "filter")
        token = self._peek()
        if token is None:
            self._error("filter: unexpected end of query", open_token)
        assert token is not None

        if token.kind is TokenKind.NUMBER or self._at("-"):
            values = [self._signed_number("filter")]
            while self._accept(","):
                values.append(self._signed_number("filter"))
            self._expect(")", "filter")
            if len(values) == 4:
                return BoundingBox(coords=tuple(values))
            if len(values) == 1:
                return ByElementId(ids=tuple(values))
            self._error(f"filter: {len(values)} numbers form neither id nor bbox")

        if token.kind is TokenKind.MACRO:
            self.pos += 1
            macro = self._macro(token)
            self._expect(")", "filter")
            if macro.kind is MacroKind.BBOX:
                return BoundingBox(macro=macro)
            if macro.kind in (MacroKind.GEOCODE_ID, MacroKind.GEOCODE_AREA):
                return ByElementId(macro=macro)
            self._error(f"filter: macro '{macro.name}' cannot be used here", token)

        word = token.lexeme if token.kind in _NAME_KINDS else None
        handler = {
            "area": self._area_filter,
            "pivot": self._pivot_filter,
            "around": self._around_filter,
            "poly": self._poly_filter,
            "newer": self._newer_filter,
            "changed": self._changed_filter,
            "id": self._id_filter,
            "if": self._if_filter,
        }.get(word or "")
        if handler is None:
            if word in USER_FILTER_KINDS:
                handler = self._user_filter
            elif word in RECURSE_FILTER_KINDS:
                handler = self._recurse_filter
            elif word in WAY_COUNT_KINDS:
                handler = self._way_count_filter
            else:
                self._error(f"filter: unknown filter {self._describe()}")
        self.pos += 1
        result = handler(token.lexeme)  # type: ignore[misc]
        self._expect(")", f"{token.lexeme} filter")
        return result

    def _area_filter(self, _: str) -> Filter:
        set_name = self._set_suffix()
        if set_name is None and self._accept(":"):
            return ByArea(area_id=self._signed_number("area filter"))
        return ByArea(set_name=set_name)

    def _pivot_filter(self, _: str) -> Filter:
        return AreaPivot(set_name=self._set_suffix())

    def _around_filter(self, _: str) -> Filter:
        set_name = self._set_suffix()
        self._expect(":", "around filter")
        radius = self._signed_number("around radius")
        coords: List[str] = []
        macro: Optional[TurboMacro] = None
        while self._accept(","):
            token = self._peek()
            if token is not None and token.kind is TokenKind.MACRO:
                self.pos += 1
                macro = self._macro(token)
            else:
                coords.append(self._signed_number("around coordinates"))
        return Around(
            radius=radius, set_name=set_name, coords=tuple(coords), macro=macro
        )

    def _poly_filter(self, _: str) -> Filter:
        self._expect(":", "poly filter")
        return ByPolygon(points=self._string_or_word("poly filter"))

    def _newer_filter(self, _: str) -> Filter:
        self._expect(":", "newer filter")
        return Newer(date=join_tokens(self._balanced((")",), "newer filter")))

    def _changed_filter(self, _: str) -> Filter:
        dates: Tuple[str, ...] = ()
        if self._accept(":"):
            tokens = self._balanced((")",), "changed filter")
            dates = tuple(t.lexeme for t in tokens if t.lexeme != ",")
        return ByDateOfChange(dates=dates)

    def _id_filter(self, _: str) -> Filter:
        self._expect(":", "id filter")
        ids = [self._signed_number("id filter")]
        while self._accept(","):
            ids.append(self._signed_number("id filter"))
        return ByElementId(ids=tuple(ids))

    def _if_filter(self, _: str) -> Filter:
        self._expect(":", "conditional filter")
        tokens = self._balanced((")",), "conditional filter")
        return ConditionalQueryFilter(expression=join_tokens(tokens))

    def _user_filter(self, kind: str) -> Filter:
        self._expect(":", f"{kind} filter")
        tokens = self._balanced((")",), f"{kind} filter")
        names = tuple(t.lexeme for t in tokens if t.lexeme != ",")
        return ByUser(kind=kind, names=names)

    def _recurse_filter(self, kind: str) -> Filter:
        set_name = self._set_suffix()
        role = None
        if self._accept(":"):
            role = self._string_or_word("recurse role")
        return RecurseBy(kind=kind, set_name=set_name, role=role)

    def _way_count_filter(self, kind: str) -> Filter:
        self._expect(":", f"{kind} filter")
        bounds = join_tokens(self._balanced((")",), f"{kind} filter"))
        return ByWayCount(kind=kind, bounds=bounds)

    # -- block statements --------------------------------------------------

    def _condition(self, context: str) -> str:
        self._expect("(", context)
        tokens = self._balanced((")",), context)
        self._expect(")", context)
        return join_tokens(tokens)

    def _if(self, input_set: Optional[str]) -> Statement:
        condition = self._condition("if")
        then = self._block("if")
        orelse = None
        if self._accept("else"):
            orelse = self._block("else")
        return If(condition=condition, then=then, orelse=orelse)

    def _foreach(self, input_set: Optional[str]) -> Statement:
        input_set = self._set_suffix() or input_set
        loop_set = self._output()
        return ForEach(
            body=self._block("foreach"), input_set=input_set, loop_set=loop_set
        )

    def _for(self, input_set: Optional[str]) -> Statement:
        input_set = self._set_suffix() or input_set
        loop_set = self._output()
        expression = self._condition("for")
        return For(
            expression=expression,
            body=self._block("for"),
            input_set=input_set,
            loop_set=loop_set,
        )

    def _complete(self, input_set: Optional[str]) -> Statement:
        input_set = self._set_suffix() or input_set
        output = self._output()
        limit = None
        if self._at("(") and self._peek(1) is not None:
            following = self._peek(1)
            if following is not None and following.kind is TokenKind.NUMBER:
                self.pos += 1
                limit = self._advance().lexeme
                self._expect(")", "complete limit")
        return Complete(
            body=self._block("complete"),
            limit=limit,
            input_set=input_set,
            output=output,
        )

    def _retro(self, input_set: Optional[str]) -> Statement:
        date = self._condition("retro")
        return Retro(date=date, body=self._block("retro"))

    def _compare(self, input_set: Optional[str]) -> Statement:
        input_set = self._set_suffix() or input_set
        output = self._output()
        delta = None
        if self._at("("):
            delta = self._condition("compare")
            if delta.startswith("delta:"):
                delta = delta[len("delta:") :]
        body = None
        if self._at("{") or self._at("("):
            body = self._block("compare")
        else:
            self._terminator("compare")
        return Compare(delta=delta, body=body, input_set=input_set, output=output)

    # -- standalone statements ---------------------------------------------

    def _out(self, input_set: Optional[str]) -> Statement:
        parameters: List[str] = []
        while not self._at(";") and self._peek() is not None:
            token = self._peek()
            assert token is not None
            if self._at("("):
                self.pos += 1
                group = self._balanced((")",), "out parameters")
                self._expect(")", "out parameters")
                text = f"({join_tokens(group)})"
                if parameters and not parameters[-1].endswith(")"):
                    parameters[-1] += text
                else:
                    parameters.append(text)
            elif token.is_word:
                parameters.append(self._advance().lexeme)
            else:
                self._error(f"out: unexpected {self._describe()}")
        self._terminator("out")
        return Out(parameters=tuple(parameters), input_set=input_set)

    def _is_in(self, input_set: Optional[str]) -> Statement:
        coords: List[str] = []
        if self._accept("("):
            coords.append(self._signed_number("is_in"))
            while self._accept(","):
                coords.append(self._signed_number("is_in"))
            self._expect(")", "is_in")
        output = self._output()
        self._terminator("is_in")
        return IsIn(coords=tuple(coords), input_set=input_set, output=output)

    def _timeline(self, input_set: Optional[str]) -> Statement:
        arguments = self._condition("timeline")
        output = self._output()
        self._terminator("timeline")
        return Timeline(arguments=arguments, output=output)

    def _local(self, input_set: Optional[str]) -> Statement:
        mode = None
        token = self._peek()
        if token is not None and token.kind is TokenKind.IDENTIFIER:
            mode = self._advance().lexeme
        output = self._output()
        self._terminator("local")
        return Local(mode=mode, input_set=input_set, output=output)

    def _assignments(self, context: str) -> Tuple[str, str]:
        element_type = self._name(f"{context} element type")
        tokens = self._balanced((";", "->", ")", "}"), context)
        return element_type, join_tokens(tokens)

    def _convert(self, input_set: Optional[str]) -> Statement:
        element_type, assignments = self._assignments("convert")
        output = self._output()
        self._terminator("convert")
        return Convert(
            element_type=element_type,
            assignments=assignments,
            input_set=input_set,
            output=output,
        )

    def _make(self, input_set: Optional[str]) -> Statement:
        element_type, assignments = self._assignments("make")
        output = self._output()
        self._terminator("make")
        return Make(
            element_type=element_type,
            assignments=assignments,
            input_set=input_set,
            output=output,
        )


def parse(text: str) -> QueryAst:
    """
    Parse OverpassQL text (Turbo macros allowed) into a QueryAst.

    Raises:
        LexError: unterminated string, regex, comment or macro
        ParseError: malformed query, with line and column
    """
    return Parser(text).parse()


def try_parse(text: str) -> Optional[QueryAst]:
    """Parse, returning None instead of raising on syntax errors."""
    from oqleval.errors import QuerySyntaxError

    try:
        return parse(text)
    except QuerySyntaxError as e:
        logger.debug(f"Query does not parse: {e}")
        return None
