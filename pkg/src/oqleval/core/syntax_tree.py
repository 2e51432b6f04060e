"""Labeled-tree form of a parsed query.

Mapping from AST to tree (one node per construct):

    query                      root, always present
      settings                 only if the header has settings
        setting:<name>         one per header setting
      query:<kind>             QueryStatement
        input-set              ByInputSet
        has-kv:<matcher>[:i]   ByTag
        bbox-query             BoundingBox
        area-query             ByArea
        pivot                  AreaPivot
        id-query               ByElementId
        around                 Around
        polygon-query          ByPolygon
        newer                  Newer
        changed                ByDateOfChange
        user                   ByUser
        recurse:<kind>         RecurseBy
        <way_cnt|way_link>     ByWayCount
        if-filter              ConditionalQueryFilter
      union / difference / foreach / for / complete / retro / compare
                               block statements, children are the body
      if                       then-statements, plus an `else` node
                               holding the else-branch when present
      out[:<parameters>]       Out
      recurse:down, recurse:down-relations, recurse:up,
      recurse:up-relations, is_in, item, convert, make, timeline,
      local[:<mode>], opaque   standalone statements

Turbo directives add no nodes. Labels never carry tag keys, tag values or
set names, so trees are already anonymous.
"""

import json
from collections import Counter
from dataclasses import dataclass
from typing import Dict, Iterator, List, Tuple, Type

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
    Make,
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
    Timeline,
    Union,
)


@dataclass(frozen=True)
class SyntaxTree:
    """A labeled ordered tree."""

    label: str
    children: Tuple["SyntaxTree", ...] = ()

    def iter_nodes(self) -> Iterator["SyntaxTree"]:
        """Pre-order traversal."""
        yield self
        for child in self.children:
            yield from child.iter_nodes()

    def size(self) -> int:
        return 1 + sum(child.size() for child in self.children)

    def render(self, indent: str = "  ") -> str:
        """Indented multi-line text, one label per line."""
        lines: List[str] = []

        def walk(node: "SyntaxTree", depth: int) -> None:
            lines.append(f"{indent * depth}{node.label}")
            for child in node.children:
                walk(child, depth + 1)

        walk(self, 0)
        return "\n".join(lines)


_FILTER_LABELS: Dict[Type[Filter], str] = {
    BoundingBox: "bbox-query",
    ByArea: "area-query",
    AreaPivot: "pivot",
    ByInputSet: "input-set",
    ByElementId: "id-query",
    Around: "around",
    ByPolygon: "polygon-query",
    Newer: "newer",
    ByDateOfChange: "changed",
    ByUser: "user",
    ConditionalQueryFilter: "if-filter",
}

_BLOCK_LABELS: Dict[Type[Statement], str] = {
    Union: "union",
    Difference: "difference",
    ForEach: "foreach",
    For: "for",
    Complete: "complete",
    Retro: "retro",
    Compare: "compare",
}

_STANDALONE_LABELS: Dict[Type[Statement], str] = {
    RecurseDown: "recurse:down",
    RecurseDownRelations: "recurse:down-relations",
    RecurseUp: "recurse:up",
    RecurseUpRelations: "recurse:up-relations",
    IsIn: "is_in",
    Item: "item",
    Convert: "convert",
    Make: "make",
    Timeline: "timeline",
    Opaque: "opaque",
}


def _filter_node(item: Filter) -> SyntaxTree:
    if isinstance(item, ByTag):
        label = f"has-kv:{item.tag.matcher.value}"
        if item.tag.case_insensitive:
            label += ":i"
        return SyntaxTree(label)
    if isinstance(item, RecurseBy):
        return SyntaxTree(f"recurse:{item.kind}")
    if isinstance(item, ByWayCount):
        return SyntaxTree(item.kind)
    return SyntaxTree(_FILTER_LABELS[type(item)])


def _statement_nodes(statements: Tuple[Statement, ...]) -> Tuple[SyntaxTree, ...]:
    return tuple(_statement_node(s) for s in statements)


def _statement_node(statement: Statement) -> SyntaxTree:
    if isinstance(statement, QueryStatement):
        return SyntaxTree(
            f"query:{statement.kind}",
            tuple(_filter_node(f) for f in statement.filters),
        )
    if isinstance(statement, If):
        children = _statement_nodes(statement.then)
        if statement.orelse is not None:
            children += (SyntaxTree("else", _statement_nodes(statement.orelse)),)
        return SyntaxTree("if", children)
    if isinstance(statement, Out):
        if statement.parameters:
            return SyntaxTree("out:" + " ".join(statement.parameters))
        return SyntaxTree("out")
    if isinstance(statement, Local):
        label = "local" if statement.mode is None else f"local:{statement.mode}"
        return SyntaxTree(label)
    label = _BLOCK_LABELS.get(type(statement))
    if label is not None:
        return SyntaxTree(label, _statement_nodes(statement.substatements()))
    return SyntaxTree(_STANDALONE_LABELS[type(statement)])


def to_syntax_tree(ast: QueryAst) -> SyntaxTree:
    """Map a QueryAst to its labeled tree (see module docstring)."""
    children: List[SyntaxTree] = []
    if ast.settings:
        children.append(
            SyntaxTree(
                "settings",
                tuple(SyntaxTree(f"setting:{name}") for name, _ in ast.settings),
            )
        )
    children.extend(_statement_nodes(ast.statements))
    return SyntaxTree("query", tuple(children))


def count_syntactic_units(ast: QueryAst) -> int:
    """Number of subtrees, i.e. nodes, of the query's syntax tree."""
    return to_syntax_tree(ast).size()


def anonymize_tree(tree: SyntaxTree) -> SyntaxTree:
    """Drop any `=payload` suffix from labels; trees built here are unchanged."""
    label = tree.label.split("=", 1)[0]
    return SyntaxTree(label, tuple(anonymize_tree(c) for c in tree.children))


def subtree_serializations(tree: SyntaxTree) -> List[str]:
    """Canonical text of every subtree, one per node, in post-order."""
    collected: List[str] = []

    def visit(node: SyntaxTree) -> str:
        inner = ",".join(visit(child) for child in node.children)
        text = f"{json.dumps(node.label, ensure_ascii=False)}({inner})"
        collected.append(text)
        return text

    visit(tree)
    return collected


def matching_subtrees(a: SyntaxTree, b: SyntaxTree) -> int:
    """Size of the multiset intersection of the two trees' subtrees."""
    common = Counter(subtree_serializations(a)) & Counter(subtree_serializations(b))
    return sum(common.values())
