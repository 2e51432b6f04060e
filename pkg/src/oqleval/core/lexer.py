"""Lossless lexer for OverpassQL text, including Overpass Turbo macros.

Spans are character (code point) offsets into the input string. Joining the
lexemes of all tokens, whitespace and comments included, reproduces the input.
"""

import re
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, List, Optional, Sequence, Tuple

from oqleval.core.nodes import TurboMacro, parse_macro
from oqleval.errors import LexError


class TokenKind(str, Enum):
    KEYWORD = "keyword"
    IDENTIFIER = "identifier"
    NUMBER = "number"
    STRING = "string-literal"
    REGEX = "regex-literal"
    PUNCTUATION = "punctuation"
    MACRO = "turbo-macro"
    COMMENT = "comment"
    WHITESPACE = "whitespace"


KEYWORDS = frozenset(
    {
        "node",
        "way",
        "rel",
        "relation",
        "nwr",
        "nw",
        "nr",
        "wr",
        "area",
        "derived",
        "out",
        "is_in",
        "foreach",
        "for",
        "if",
        "else",
        "complete",
        "retro",
        "compare",
        "timeline",
        "local",
        "convert",
        "make",
        "pivot",
        "around",
        "poly",
        "newer",
        "changed",
        "user",
        "uid",
        "user_touched",
        "uid_touched",
        "id",
        "way_cnt",
        "way_link",
        "delta",
    }
)

# Longest first so that multi-character operators win
PUNCTUATION = (
    "::",
    "->",
    "!=",
    "!~",
    "==",
    "<=",
    ">=",
    "&&",
    "||",
    "<<",
    ">>",
)
MULTI_CHAR_PUNCTUATION = frozenset(PUNCTUATION) | {"//", "/*", "*/", "{{", "}}"}

_WHITESPACE_RE = re.compile(r"\s+")
_NUMBER_RE = re.compile(r"\d+(?:\.\d+)?")
_IDENTIFIER_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_REGEX_OPERATORS = ("~", "!~")
_WORD_KINDS = (TokenKind.KEYWORD, TokenKind.IDENTIFIER, TokenKind.NUMBER)


@dataclass(frozen=True)
class Token:
    """A lexeme with its kind and position."""

    kind: TokenKind
    lexeme: str
    start: int
    end: int

    @property
    def span(self) -> Tuple[int, int]:
        return (self.start, self.end)

    @property
    def is_trivia(self) -> bool:
        return self.kind in (TokenKind.WHITESPACE, TokenKind.COMMENT)

    @property
    def is_word(self) -> bool:
        return self.kind in _WORD_KINDS

    @property
    def is_string(self) -> bool:
        return self.kind in (TokenKind.STRING, TokenKind.REGEX)

    def macro(self) -> Optional[TurboMacro]:
        """Classify a turbo-macro token."""
        if self.kind is not TokenKind.MACRO:
            return None
        return parse_macro(self.lexeme)


def line_column(text: str, offset: int) -> Tuple[int, int]:
    """1-based line and column of a character offset."""
    line = text.count("\n", 0, offset) + 1
    last_newline = text.rfind("\n", 0, offset)
    return line, offset - last_newline


class Lexer:
    """Splits query text into tokens."""

    def __init__(self, text: str) -> None:
        self.text = text
        self.pos = 0
        self.tokens: List[Token] = []
        self._last_significant: Optional[Token] = None

    def tokenize(self) -> List[Token]:
        text = self.text
        while self.pos < len(text):
            ch = text[self.pos]

            if ch.isspace():
                match = _WHITESPACE_RE.match(text, self.pos)
                assert match is not None
                self._emit(TokenKind.WHITESPACE, match.end())
            elif text.startswith("//", self.pos):
                end = text.find("\n", self.pos)
                self._emit(TokenKind.COMMENT, len(text) if end < 0 else end)
            elif text.startswith("/*", self.pos):
                end = text.find("*/", self.pos + 2)
                if end < 0:
                    self._fail("unterminated comment")
                self._emit(TokenKind.COMMENT, end + 2)
            elif text.startswith("{{", self.pos):
                end = text.find("}}", self.pos + 2)
                if end < 0:
                    self._fail("unterminated Turbo macro")
                self._emit(TokenKind.MACRO, end + 2)
            elif ch in "\"'":
                self._string(ch)
            elif ch.isdigit():
                match = _NUMBER_RE.match(text, self.pos)
                assert match is not None
                self._emit(TokenKind.NUMBER, match.end())
            elif ch.isascii() and (ch.isalpha() or ch == "_"):
                match = _IDENTIFIER_RE.match(text, self.pos)
                assert match is not None
                word = match.group(0)
                kind = TokenKind.KEYWORD if word in KEYWORDS else TokenKind.IDENTIFIER
                self._emit(kind, match.end())
            else:
                width = 1
                for op in PUNCTUATION:
                    if text.startswith(op, self.pos):
                        width = len(op)
                        break
                self._emit(TokenKind.PUNCTUATION, self.pos + width)

        return self.tokens

    def _string(self, quote: str) -> None:
        text = self.text
        i = self.pos + 1
        while i < len(text):
            ch = text[i]
            if ch == "\\":
                i += 2
                continue
            if ch == quote:
                previous = self._last_significant
                is_regex = previous is not None and previous.lexeme in _REGEX_OPERATORS
                self._emit(TokenKind.REGEX if is_regex else TokenKind.STRING, i + 1)
                return
            i += 1
        kind = "regex" if (
            self._last_significant is not None
            and self._last_significant.lexeme in _REGEX_OPERATORS
        ) else "string"
        self._fail(f"unterminated {kind} literal")

    def _emit(self, kind: TokenKind, end: int) -> None:
        token = Token(kind, self.text[self.pos : end], self.pos, end)
        self.tokens.append(token)
        if not token.is_trivia:
            self._last_significant = token
        self.pos = end

    def _fail(self, message: str) -> None:
        line, column = line_column(self.text, self.pos)
        raise LexError(message, (self.pos, len(self.text)), line, column)


def tokenize(text: str) -> List[Token]:
    """Tokenize query text; whitespace and comments are kept as tokens."""
    return Lexer(text).tokenize()


def significant(tokens: Iterable[Token]) -> List[Token]:
    """Drop whitespace and comment tokens."""
    return [t for t in tokens if not t.is_trivia]


def join_tokens(tokens: Sequence[Token]) -> str:
    """Canonical text for a token run: no whitespace unless tokens would fuse."""
    parts: List[str] = []
    previous: Optional[Token] = None
    for token in tokens:
        if previous is not None and needs_space(previous, token):
            parts.append(" ")
        parts.append(token.lexeme)
        previous = token
    return "".join(parts)


def needs_space(left: Token, right: Token) -> bool:
    if left.is_word and right.is_word:
        return True
    if left.kind is TokenKind.PUNCTUATION and right.kind is TokenKind.PUNCTUATION:
        return (left.lexeme[-1] + right.lexeme[0]) in MULTI_CHAR_PUNCTUATION
    return False
