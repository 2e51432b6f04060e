"""OverpassQL lexing, parsing and query analysis."""

from oqleval.core.analysis import KvSet, detect_features, extract_comments, extract_kv
from oqleval.core.features import FEATURE_INFO, Feature, FeatureGroup
from oqleval.core.lexer import Token, TokenKind, tokenize
from oqleval.core.nodes import QueryAst, TagFilter, TurboMacro
from oqleval.core.parser import parse, try_parse
from oqleval.core.syntax_tree import (
    SyntaxTree,
    anonymize_tree,
    count_syntactic_units,
    to_syntax_tree,
)
from oqleval.core.writer import normalize_template, serialize

__all__ = [
    "FEATURE_INFO",
    "Feature",
    "FeatureGroup",
    "KvSet",
    "QueryAst",
    "SyntaxTree",
    "TagFilter",
    "Token",
    "TokenKind",
    "TurboMacro",
    "anonymize_tree",
    "count_syntactic_units",
    "detect_features",
    "extract_comments",
    "extract_kv",
    "normalize_template",
    "parse",
    "serialize",
    "to_syntax_tree",
    "tokenize",
    "try_parse",
]
