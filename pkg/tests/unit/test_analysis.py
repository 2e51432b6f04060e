"""Tests for tag extraction, feature detection and comment extraction."""

import pytest

from oqleval.core.analysis import KvSet, detect_features, extract_comments, extract_kv
from oqleval.core.features import FEATURE_INFO, Feature, FeatureGroup, features_in_group
from oqleval.core.parser import parse

FIGURE_ONE = (
    "[out:json][timeout:200];\n"
    '{{geocodeArea:"Troms"}}->.searchArea;\n'
    'node["natural"="peak"](area.searchArea)->.peaks;\n'
    'way["highway"="cycleway"](area.searchArea)(around.peaks:500);\n'
    "out;"
)


def test_extract_kv_figure_one():
    """Test pairs, keys and values of equality filters."""
    kv = extract_kv(parse(FIGURE_ONE))

    assert kv.pairs == {("natural", "peak"), ("highway", "cycleway")}
    assert kv.keys == {"natural", "highway"}
    assert kv.values == {"peak", "cycleway"}


def test_extract_kv_exists_filter():
    """Test that an exists filter contributes only its key."""
    kv = extract_kv(parse('node["bridge"];'))

    assert kv.keys == {"bridge"}
    assert kv.pairs == frozenset()
    assert kv.values == frozenset()


def test_extract_kv_regex_value_verbatim():
    """Test that regex patterns are kept as written."""
    kv = extract_kv(parse('node["name"~"Apteka",i];'))

    assert kv.pairs == {("name", "Apteka")}


def test_extract_kv_keys_cover_pairs():
    """Test that every pair's key is among the keys."""
    kv = extract_kv(parse('node[a]["b"!="c"][!d](if:t["e"]>1);(way["f"~"g"];);'))

    assert {k for k, _ in kv.pairs} <= kv.keys
    assert kv.keys == {"a", "b", "d", "f"}


def test_kv_members_namespaces():
    """Test that a key and a value with the same text stay distinct."""
    kv = KvSet.of([("name", "name")])

    assert kv.members() == {
        ("pair", "name", "name"),
        ("key", "name"),
        ("value", "name"),
    }
    assert KvSet().is_empty()


def test_taxonomy_size():
    """Test the number of taxonomy entries per group."""
    assert len(Feature) == 41
    assert set(FEATURE_INFO) == set(Feature)
    sizes = [len(features_in_group(g)) for g in FeatureGroup]
    assert sizes == [6, 8, 13, 14]


def test_detect_features_figure_one():
    """Test the features of a multi-statement query."""
    assert detect_features(parse(FIGURE_ONE)) == {
        Feature.TIMEOUT,
        Feature.OUTPUT_FORMAT,
        Feature.QUERY_STATEMENT,
        Feature.OUT,
        Feature.BY_ELEMENT_ID,
        Feature.BY_TAG,
        Feature.BY_AREA,
        Feature.AROUND,
    }


def test_detect_features_out_only():
    """Test that a bare out statement has one feature."""
    assert detect_features(parse("out;")) == {Feature.OUT}


@pytest.mark.parametrize(
    "query,feature",
    [
        ("[maxsize:1000];out;", Feature.ELEMENT_LIMIT),
        ("[adiff:\"2020-01-01T00:00:00Z\"];out;", Feature.DIFF),
        ("[bbox:1,2,3,4];out;", Feature.GLOBAL_BBOX),
        ("(node(1);-node(2););", Feature.DIFFERENCE),
        ("foreach{out;}", Feature.FOREACH),
        ("node;>;", Feature.RECURSE_DOWN),
        ("node;<<;", Feature.RECURSE_UP_RELATIONS),
        (".a out;", Feature.BY_INPUT_SET),
        (".a;", Feature.ITEM),
        ("node.a;", Feature.BY_INPUT_SET),
        ("is_in(1,2);", Feature.IS_IN),
        ("way(bn);", Feature.RECURSE_BY),
        ("node(w);", Feature.RECURSE_BY),
        ("node(poly:\"1 2 3 4 5 6\");", Feature.BY_POLYGON),
        ("node(user:\"alice\");", Feature.BY_USER),
        ("node(area);", Feature.BY_AREA),
        ("area(pivot);", Feature.AREA_PIVOT),
        ("node({{bbox}});", Feature.BBOX_FILTER),
        ("node(1,2,3,4);", Feature.BBOX_FILTER),
        ("way(if:length()>10);", Feature.CONDITIONAL_QUERY_FILTER),
        ("make stat n=1;", Feature.MAKE),
    ],
)
def test_detect_single_feature(query, feature):
    """Test that each construct maps to its taxonomy entry."""
    assert feature in detect_features(parse(query))


def test_query_filter_needs_only_conditions():
    """Test the distinction between query filters and conditional filters."""
    assert Feature.QUERY_FILTER in detect_features(parse("way.a(if:length()>10);"))
    assert Feature.QUERY_FILTER not in detect_features(
        parse('way["highway"](if:length()>10);')
    )


def test_nested_features_detected():
    """Test that features inside blocks are found."""
    found = detect_features(parse('(node["a"="b"](around:5,1,2););out;'))

    assert {Feature.UNION, Feature.BY_TAG, Feature.AROUND} <= found


def test_extract_comments_line_comment():
    """Test pairing a line comment with the stripped query."""
    text = '//find peaks\nnode["natural"="peak"];out;'

    assert extract_comments(text) == [("find peaks", 'node["natural"="peak"];out;')]


def test_extract_comments_none():
    """Test that a query without comments yields nothing."""
    assert extract_comments('node["natural"="peak"];out;') == []


def test_extract_comments_every_comment_gets_whole_query():
    """Test that each comment is paired with the entire stripped query."""
    text = "[out:json];\n// cafes\nnode[amenity=cafe];\n/* and\n   output */\nout;"
    stripped = "[out:json];\nnode[amenity=cafe];\nout;"

    assert extract_comments(text) == [("cafes", stripped), ("and output", stripped)]


def test_extract_comments_keeps_inline_block_comment_boundary():
    """Test that removing a comment between two keywords keeps them apart."""
    text = 'node["amenity"="cafe"];out/*x*/meta;'
    stripped = 'node["amenity"="cafe"];out meta;'

    assert extract_comments(text) == [("x", stripped)]
    assert detect_features(parse(stripped)) == detect_features(parse(text))
    assert Feature.OUT in detect_features(parse(stripped))


def test_extract_comments_unlexable_text():
    """Test that text which does not tokenize yields no comments."""
    assert extract_comments('// x\nnode["open') == []
