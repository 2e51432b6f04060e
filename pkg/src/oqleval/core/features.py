"""The fixed taxonomy of major OverpassQL syntax features."""

from enum import Enum
from typing import Dict, List, NamedTuple


class FeatureGroup(str, Enum):
    SETTINGS = "Settings"
    BLOCK = "Block Statements"
    STANDALONE = "Standalone Statements"
    FILTERS = "Filters"


class Feature(str, Enum):
    # Settings
    TIMEOUT = "timeout"
    ELEMENT_LIMIT = "element_limit"
    OUTPUT_FORMAT = "output_format"
    GLOBAL_BBOX = "global_bbox"
    DATE = "date"
    DIFF = "diff"
    # Block statements
    UNION = "union"
    DIFFERENCE = "difference"
    IF = "if"
    FOREACH = "foreach"
    FOR = "for"
    COMPLETE = "complete"
    RETRO = "retro"
    COMPARE = "compare"
    # Standalone statements
    OUT = "out"
    ITEM = "item"
    RECURSE_UP = "recurse_up"
    RECURSE_UP_RELATIONS = "recurse_up_relations"
    RECURSE_DOWN = "recurse_down"
    RECURSE_DOWN_RELATIONS = "recurse_down_relations"
    IS_IN = "is_in"
    TIMELINE = "timeline"
    LOCAL = "local"
    CONVERT = "convert"
    MAKE = "make"
    QUERY_STATEMENT = "query_statement"
    QUERY_FILTER = "query_filter"
    # Filters
    BY_TAG = "by_tag"
    BBOX_FILTER = "bbox_filter"
    RECURSE_BY = "recurse_by"
    RECURSE_BY_WAY_COUNT = "recurse_by_way_count"
    BY_INPUT_SET = "by_input_set"
    BY_ELEMENT_ID = "by_element_id"
    AROUND = "around"
    BY_POLYGON = "by_polygon"
    NEWER = "newer"
    BY_DATE_OF_CHANGE = "by_date_of_change"
    BY_USER = "by_user"
    BY_AREA = "by_area"
    AREA_PIVOT = "area_pivot"
    CONDITIONAL_QUERY_FILTER = "conditional_query_filter"


class FeatureInfo(NamedTuple):
    group: FeatureGroup
    label: str


FEATURE_INFO: Dict[Feature, FeatureInfo] = {
    Feature.TIMEOUT: FeatureInfo(FeatureGroup.SETTINGS, "Timeout"),
    Feature.ELEMENT_LIMIT: FeatureInfo(FeatureGroup.SETTINGS, "Element Limit"),
    Feature.OUTPUT_FORMAT: FeatureInfo(FeatureGroup.SETTINGS, "Output Format"),
    Feature.GLOBAL_BBOX: FeatureInfo(FeatureGroup.SETTINGS, "Bounding Box"),
    Feature.DATE: FeatureInfo(FeatureGroup.SETTINGS, "Date"),
    Feature.DIFF: FeatureInfo(FeatureGroup.SETTINGS, "Diff/adiff"),
    Feature.UNION: FeatureInfo(FeatureGroup.BLOCK, "Union"),
    Feature.DIFFERENCE: FeatureInfo(FeatureGroup.BLOCK, "Difference"),
    Feature.IF: FeatureInfo(FeatureGroup.BLOCK, "if"),
    Feature.FOREACH: FeatureInfo(FeatureGroup.BLOCK, "for-each"),
    Feature.FOR: FeatureInfo(FeatureGroup.BLOCK, "for"),
    Feature.COMPLETE: FeatureInfo(FeatureGroup.BLOCK, "complete"),
    Feature.RETRO: FeatureInfo(FeatureGroup.BLOCK, "retro"),
    Feature.COMPARE: FeatureInfo(FeatureGroup.BLOCK, "compare"),
    Feature.OUT: FeatureInfo(FeatureGroup.STANDALONE, "out"),
    Feature.ITEM: FeatureInfo(FeatureGroup.STANDALONE, "Item"),
    Feature.RECURSE_UP: FeatureInfo(FeatureGroup.STANDALONE, "Recurse Up"),
    Feature.RECURSE_UP_RELATIONS: FeatureInfo(
        FeatureGroup.STANDALONE, "Recurse Up Relations"
    ),
    Feature.RECURSE_DOWN: FeatureInfo(FeatureGroup.STANDALONE, "Recurse Down"),
    Feature.RECURSE_DOWN_RELATIONS: FeatureInfo(
        FeatureGroup.STANDALONE, "Recurse Down Relations"
    ),
    Feature.IS_IN: FeatureInfo(FeatureGroup.STANDALONE, "is_in"),
    Feature.TIMELINE: FeatureInfo(FeatureGroup.STANDALONE, "timeline"),
    Feature.LOCAL: FeatureInfo(FeatureGroup.STANDALONE, "local"),
    Feature.CONVERT: FeatureInfo(FeatureGroup.STANDALONE, "convert"),
    Feature.MAKE: FeatureInfo(FeatureGroup.STANDALONE, "make"),
    Feature.QUERY_STATEMENT: FeatureInfo(FeatureGroup.STANDALONE, "Query Statement"),
    Feature.QUERY_FILTER: FeatureInfo(FeatureGroup.STANDALONE, "Query Filter"),
    Feature.BY_TAG: FeatureInfo(FeatureGroup.FILTERS, "By Tag"),
    Feature.BBOX_FILTER: FeatureInfo(FeatureGroup.FILTERS, "Bounding Box"),
    Feature.RECURSE_BY: FeatureInfo(FeatureGroup.FILTERS, "Recurse By"),
    Feature.RECURSE_BY_WAY_COUNT: FeatureInfo(
        FeatureGroup.FILTERS, "Recurse By Way Count"
    ),
    Feature.BY_INPUT_SET: FeatureInfo(FeatureGroup.FILTERS, "By Input Set"),
    Feature.BY_ELEMENT_ID: FeatureInfo(FeatureGroup.FILTERS, "By Element Id"),
    Feature.AROUND: FeatureInfo(FeatureGroup.FILTERS, "Relative to Other Elements"),
    Feature.BY_POLYGON: FeatureInfo(FeatureGroup.FILTERS, "By Polygon"),
    Feature.NEWER: FeatureInfo(FeatureGroup.FILTERS, "Newer"),
    Feature.BY_DATE_OF_CHANGE: FeatureInfo(FeatureGroup.FILTERS, "By Date of Change"),
    Feature.BY_USER: FeatureInfo(FeatureGroup.FILTERS, "By User"),
    Feature.BY_AREA: FeatureInfo(FeatureGroup.FILTERS, "By Area"),
    Feature.AREA_PIVOT: FeatureInfo(FeatureGroup.FILTERS, "Area Pivot"),
    Feature.CONDITIONAL_QUERY_FILTER: FeatureInfo(
        FeatureGroup.FILTERS, "Conditional Query Filter"
    ),
}


def features_in_group(group: FeatureGroup) -> List[Feature]:
    return [f for f in Feature if FEATURE_INFO[f].group is group]
