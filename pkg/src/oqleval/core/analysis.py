"""Analyses over parsed queries: tag inventories, syntax features, comments."""

import logging
from dataclasses import dataclass, field
from typing import FrozenSet, Iterable, List, Optional, Set, Tuple

from oqleval.core.features import Feature
from oqleval.core.lexer import Token, TokenKind, needs_space, tokenize
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
    For,
    ForEach,
    If,
    IsIn,
    Item,
    Local,
    Make,
    Matcher,
    Newer,
    Out,
    QueryAst,
    QueryStatement,
    RecurseBy,
    RecurseDown,
    RecurseDownRelations,
    RecurseUp,
    RecurseUpRelations,
    Retro,
    Timeline,
    Union,
    iter_filters,
    iter_statements,
)
from oqleval.errors import LexError

logger = logging.getLogger(__name__)

KvMember = Tuple[str, ...]

_SETTING_FEATURES = {
    "timeout": Feature.TIMEOUT,
    "maxsize": Feature.ELEMENT_LIMIT,
    "out": Feature.OUTPUT_FORMAT,
    "bbox": Feature.GLOBAL_BBOX,
    "date": Feature.DATE,
    "diff": Feature.DIFF,
    "adiff": Feature.DIFF,
}

_STATEMENT_FEATURES = {
    Union: Feature.UNION,
    Difference: Feature.DIFFERENCE,
    If: Feature.IF,
    ForEach: Feature.FOREACH,
    For: Feature.FOR,
    Complete: Feature.COMPLETE,
    Retro: Feature.RETRO,
    Compare: Feature.COMPARE,
    Out: Feature.OUT,
    Item: Feature.ITEM,
    RecurseUp: Feature.RECURSE_UP,
    RecurseUpRelations: Feature.RECURSE_UP_RELATIONS,
    RecurseDown: Feature.RECURSE_DOWN,
    RecurseDownRelations: Feature.RECURSE_DOWN_RELATIONS,
    IsIn: Feature.IS_IN,
    Timeline: Feature.TIMELINE,
    Local: Feature.LOCAL,
    Convert: Feature.CONVERT,
    Make: Feature.MAKE,
    QueryStatement: Feature.QUERY_STATEMENT,
}

_FILTER_FEATURES = {
    ByTag: Feature.BY_TAG,
    BoundingBox: Feature.BBOX_FILTER,
    RecurseBy: Feature.RECURSE_BY,
    ByWayCount: Feature.RECURSE_BY_WAY_COUNT,
    ByInputSet: Feature.BY_INPUT_SET,
    ByElementId: Feature.BY_ELEMENT_ID,
    Around: Feature.AROUND,
    ByPolygon: Feature.BY_POLYGON,
    Newer: Feature.NEWER,
    ByDateOfChange: Feature.BY_DATE_OF_CHANGE,
    ByUser: Feature.BY_USER,
    ByArea: Feature.BY_AREA,
    AreaPivot: Feature.AREA_PIVOT,
    ConditionalQueryFilter: Feature.CONDITIONAL_QUERY_FILTER,
}

@dataclass(frozen=True)
class KvSet:
    """Keys, values and key-value pairs used by a query's tag filters."""

    pairs: FrozenSet[Tuple[str, str]] = field(default_factory=frozenset)
    keys: FrozenSet[str] = field(default_factory=frozenset)
    values: FrozenSet[str] = field(default_factory=frozenset)

    @classmethod
    def of(
        cls, pairs: Iterable[Tuple[str, str]], keys: Iterable[str] = ()
    ) -> "KvSet":
        """Build a KvSet from pairs plus key-only entries."""
        pair_set = set(pairs)
        all_keys = set(keys) | {k for k, _ in pair_set}
        return cls(
            pairs=frozenset(pair_set),
            keys=frozenset(all_keys),
            values=frozenset(v for _, v in pair_set),
        )

    def members(self) -> FrozenSet[KvMember]:
        """Union of pairs, keys and values, each in its own namespace."""
        return frozenset(
            {("pair", k, v) for k, v in self.pairs}
            | {("key", k) for k in self.keys}
            | {("value", v) for v in self.values}
        )

    def is_empty(self) -> bool:
        return not (self.pairs or self.keys or self.values)


def extract_kv(ast: QueryAst) -> KvSet:
    """Collect every tag filter; exists-style matchers contribute the key only."""
    pairs: Set[Tuple[str, str]] = set()
    keys: Set[str] = set()
    for item in iter_filters(ast):
        if not isinstance(item, ByTag):
            continue
        tag = item.tag
        keys.add(tag.key)
        if tag.matcher not in (Matcher.EXISTS, Matcher.NOT_EXISTS):
            assert tag.value is not None
            pairs.add((tag.key, tag.value))
    return KvSet.of(pairs, keys)


def detect_features(ast: QueryAst) -> FrozenSet[Feature]:
    """
    Taxonomy features present anywhere in the query.

    Settings map by name (maxsize is the element limit, diff/adiff share one
    entry). Every statement and filter type maps to its own entry. The query
    filter is a query statement whose filters are only input sets plus at
    least one `(if:...)`. By-input-set needs a named set: a `.name` filter,
    an item statement or a statement prefixed with `.name`; the implicit `_`
    does not count.
    """
    found: Set[Feature] = set()

    for name, _ in ast.settings:
        feature = _SETTING_FEATURES.get(name)
        if feature is not None:
            found.add(feature)

    for statement in iter_statements(ast.statements):
        feature = _STATEMENT_FEATURES.get(type(statement))  # type: ignore[arg-type]
        if feature is not None:
            found.add(feature)
        if isinstance(statement, Item):
            found.add(Feature.BY_INPUT_SET)
        if getattr(statement, "input_set", None) is not None:
            found.add(Feature.BY_INPUT_SET)
        if isinstance(statement, QueryStatement) and _is_query_filter(statement):
            found.add(Feature.QUERY_FILTER)

    for item in iter_filters(ast):
        found.add(_FILTER_FEATURES[type(item)])  # type: ignore[index]

    return frozenset(found)


def _is_query_filter(statement: QueryStatement) -> bool:
    conditions = [f for f in statement.filters if isinstance(f, ConditionalQueryFilter)]
    others = [
        f
        for f in statement.filters
        if not isinstance(f, (ConditionalQueryFilter, ByInputSet))
    ]
    return bool(conditions) and not others


def extract_comments(text: str) -> List[Tuple[str, str]]:
    """
    Pair each comment with the whole query stripped of comments.

    `//` comments lose the marker and surrounding whitespace; block comments
    additionally have internal whitespace collapsed. Blank lines left behind
    by removed comments are dropped, and a comment between two tokens that
    would otherwise fuse becomes a single space.
    """
    try:
        tokens = tokenize(text)
    except LexError as e:
        logger.debug(f"Cannot extract comments: {e}")
        return []

    comments = [t.lexeme for t in tokens if t.kind is TokenKind.COMMENT]
    if not comments:
        return []

    parts: List[str] = []
    previous: Optional[Token] = None
    removed = False
    for token in tokens:
        if token.kind is TokenKind.COMMENT:
            removed = True
            continue
        # a removed comment must not fuse its neighbours
        if removed and previous is not None and needs_space(previous, token):
            parts.append(" ")
        parts.append(token.lexeme)
        previous = token
        removed = False
    code = "".join(parts)
    lines = [line.rstrip() for line in code.splitlines()]
    stripped = "\n".join(line for line in lines if line.strip()).strip()

    return [(_comment_text(c), stripped) for c in comments]


def _comment_text(lexeme: str) -> str:
    if lexeme.startswith("//"):
        return lexeme[2:].strip()
    return " ".join(lexeme[2:-2].split())
