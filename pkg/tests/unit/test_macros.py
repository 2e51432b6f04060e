"""Tests for Turbo macro expansion and geocoding fixtures."""

import json
import tempfile
from pathlib import Path

import pytest
import requests
from requests.adapters import BaseAdapter

from oqleval.errors import ConfigError, LexError, MacroError
from oqleval.execution.config import ExecutionConfig
from oqleval.execution.geocode import FixtureGeocoder, NominatimGeocoder
from oqleval.execution.macros import expand_macros

DATA_DIR = Path(__file__).parent.parent / "data"


@pytest.fixture
def geocoder():
    return FixtureGeocoder(DATA_DIR / "geocodes.tsv")


@pytest.fixture
def temp_dir():
    """Create a temporary directory for testing."""
    with tempfile.TemporaryDirectory() as tmpdir:
        yield Path(tmpdir)


@pytest.fixture
def cfg():
    return ExecutionConfig(endpoint_url="fixture://unused")


def test_text_without_macros_is_unchanged(cfg, geocoder):
    """Test that plain OverpassQL passes through byte for byte."""
    text = 'node["amenity"="bench"] ( 1 ) ;\n// keep me\nout;'

    assert expand_macros(text, cfg, geocoder) == text


def test_bbox_macro(cfg, geocoder):
    """Test that {{bbox}} becomes the configured bounding box."""
    assert (
        expand_macros("node({{bbox}});out;", cfg, geocoder)
        == "node(49.0,8.0,49.5,8.5);out;"
    )


def test_bbox_macro_custom_box(geocoder):
    """Test a non-default bounding box."""
    cfg = ExecutionConfig(
        endpoint_url="fixture://unused", default_bbox=(1.5, 2.0, 3.0, 4.0)
    )

    assert expand_macros("node({{bbox}});", cfg, geocoder) == "node(1.5,2.0,3.0,4.0);"


def test_geocode_area_relation(cfg, geocoder):
    """Test that relations map to area ids offset by 3600000000."""
    text = '{{geocodeArea:"Troms"}}->.searchArea;'

    assert expand_macros(text, cfg, geocoder) == "area(3600407717)->.searchArea;"


def test_geocode_area_way(cfg, geocoder):
    """Test that ways map to area ids offset by 2400000000."""
    text = "{{geocodeArea:Central Park}};"

    assert expand_macros(text, cfg, geocoder) == "area(2827818536);"


def test_geocode_area_of_node_fails(cfg, geocoder):
    """Test that a node has no area."""
    with pytest.raises(MacroError):
        expand_macros('{{geocodeArea:"Eiffel Tower"}};', cfg, geocoder)


def test_geocode_id_and_coords(cfg, geocoder):
    """Test element and coordinate lookups."""
    assert expand_macros('{{geocodeId:"Eiffel Tower"}};out;', cfg, geocoder) == (
        "node(5013364);out;"
    )
    assert expand_macros(
        'node(around:100,{{geocodeCoords:"Eiffel Tower"}});', cfg, geocoder
    ) == ("node(around:100,48.8583,2.2945);")


def test_unknown_place(cfg, geocoder):
    """Test that a failed lookup is a macro error."""
    with pytest.raises(MacroError):
        expand_macros('{{geocodeArea:"Atlantis"}};', cfg, geocoder)


def test_unknown_macro(cfg, geocoder):
    """Test that undefined shortcuts are rejected."""
    with pytest.raises(MacroError):
        expand_macros("node({{nowhere}});", cfg, geocoder)


def test_shortcut_definitions(cfg, geocoder):
    """Test user-defined shortcuts and the removal of their definitions."""
    text = "{{kind=node}}\n{{kind}}(1);out;"

    assert expand_macros(text, cfg, geocoder) == "\nnode(1);out;"


def test_style_directive_removed(cfg, geocoder):
    """Test that style blocks do not reach the server."""
    text = "node(1);out;{{style: node{color:red} }}"

    assert expand_macros(text, cfg, geocoder) == "node(1);out;"


def test_center_macro(cfg, geocoder):
    """Test the center of the default bounding box."""
    assert expand_macros("{{center}}", cfg, geocoder) == "49.25,8.25"


def test_unterminated_macro_is_lex_error(cfg, geocoder):
    """Test that broken text surfaces the lexer error."""
    with pytest.raises(LexError):
        expand_macros("node({{bbox", cfg, geocoder)


def test_fixture_geocoder_rejects_malformed_rows(temp_dir):
    """Test that bad fixture rows are configuration errors."""
    path = temp_dir / "bad.tsv"
    path.write_text("Troms\tcity\t1\t0\t0\n", encoding="utf-8")

    with pytest.raises(ConfigError):
        FixtureGeocoder(path)
    with pytest.raises(ConfigError):
        FixtureGeocoder(temp_dir / "missing.tsv")


class FlakyNominatimAdapter(BaseAdapter):
    """Search endpoint that drops the first `failures` connections."""

    def __init__(self, failures, hits):
        super().__init__()
        self.failures = failures
        self.hits = hits
        self.calls = 0

    def send(self, request, **kwargs):
        self.calls += 1
        if self.calls <= self.failures:
            raise requests.ConnectionError("connection reset")
        response = requests.Response()
        response.status_code = 200
        response._content = json.dumps(self.hits).encode("utf-8")
        response.encoding = "utf-8"
        response.request = request
        return response

    def close(self):
        pass


def nominatim_with(adapter):
    session = requests.Session()
    session.mount("http://", adapter)
    return NominatimGeocoder("http://nominatim.local", session=session)


def test_nominatim_failed_request_is_not_memoised():
    """Test that a lookup after a dropped connection asks again."""
    hit = {"osm_type": "relation", "osm_id": "2555133", "lat": "55.7", "lon": "37.6"}
    adapter = FlakyNominatimAdapter(failures=1, hits=[hit])
    geocoder = nominatim_with(adapter)

    assert geocoder.resolve("Moscow") is None
    result = geocoder.resolve("Moscow")

    assert (result.kind, result.id) == ("relation", 2555133)
    assert geocoder.resolve("Moscow") == result
    assert adapter.calls == 2


def test_nominatim_definite_miss_is_memoised():
    """Test that an empty answer is remembered."""
    adapter = FlakyNominatimAdapter(failures=0, hits=[])
    geocoder = nominatim_with(adapter)

    assert geocoder.resolve("Atlantis") is None
    assert geocoder.resolve("Atlantis") is None
    assert adapter.calls == 1


def test_fixture_geocoder_lookup(geocoder):
    """Test resolving known and unknown names."""
    found = geocoder.resolve("Moscow")

    assert (found.kind, found.id) == ("relation", 2555133)
    assert geocoder.resolve("Atlantis") is None
