"""Tests for the generation and refinement prompt templates."""

from pathlib import Path

import pytest

from oqleval.corpus.dataset import Instance
from oqleval.harness.prompts import RefineShot, build_prompt, build_refine_prompt

DATA_DIR = Path(__file__).parent.parent / "data"

CASTLE_SHOTS = [
    (
        "All historic castles in Germany.",
        '[out:xml][timeout:500];area["name"="Deutschland"]["admin_level"]->.a;\n'
        '(node["historic"="castle"](area.a);way["historic"="castle"](area.a);\n'
        'relation["historic"="castle"](area.a););',
    ),
    (
        "Find every castle in Luxemburg,Neatherlands and Belgium.",
        '[out:json][timeout:120];(({{geocodeArea:"Belgium"}}->.be;'
        '{{geocodeArea:"Luxembourg"}}->.lu;\n'
        '{{geocodeArea:"Nederland"}}->.nl;)->.benelux;\n'
        '(node["historic"="castle"]["name"](area.benelux);););out center;',
    ),
    (
        "Castles in current view.",
        '[out:json][timeout:25];(node["historic"="castle"]({{bbox}});'
        'way["historic"="castle"]({{bbox}});\n'
        'relation["historic"="castle"]({{bbox}}););out;>;out skel qt;',
    ),
    (
        "Castles in current view.",
        '[out:json][timeout:25];(node["historic"="castle"]({{bbox}});\n'
        'way["historic"="castle"]({{bbox}});'
        'relation["historic"="castle"]({{bbox}}););\n'
        "out;>;out skel qt;",
    ),
    (
        "castles in Tuscany.",
        '[out:json][timeout:250];{{geocodeArea:"Tuscany"}}->.searchArea;\n'
        '(node["historic"="castle"](area.searchArea);'
        'way["historic"="castle"](area.searchArea);\n'
        'relation["historic"="castle"](area.searchArea););out;>;out skel qt;',
    ),
]

ATM_SHOTS = [
    RefineShot(
        nl="atms in Germany",
        hypothesis=(
            '[out:json][timeout:25];area["name"="Germany"]->.a;'
            '(node["amenity"="atm"](area.a);\n'
            'way["amenity"="atm"](area.a);relation["amenity"="atm"](area.a););\n'
            "out;>;out skel qt;"
        ),
        query=(
            '[out:json][timeout:25];{{geocodeArea:"Deutschland"}}->.searchArea;\n'
            '(node["amenity"="atm"](area.searchArea);'
            'way["amenity"="atm"](area.searchArea);\n'
            'relation["amenity"="atm"](area.searchArea););out center;'
        ),
    ),
    RefineShot(
        nl="ATMs and banks with ATMs in Berlin.",
        hypothesis=(
            '[out:json][timeout:25];{{geocodeArea:"Berlin"}}->.searchArea;\n'
            '(node["amenity"="atm"](area.searchArea);'
            'node["amenity"="bank"]["atm=yes"](area.searchArea););\n'
            "out;out;>;out skel qt;"
        ),
        query=(
            "[out:json][timeout:25];\n"
            'area["name"="Berlin"]->.a;(node["amenity"="bank"]["atm"="yes"](area.a);\n'
            'node["amenity"="atm"](area.a);'
            'way["amenity"="bank"]["atm"="yes"](area.a);>;\n'
            'way["amenity"="atm"](area.a);>;);out;'
        ),
    ),
]

BANK_HYPOTHESIS = (
    '[out:json][timeout:25]; {{geocodeArea:"Bürggen"}}->.searchArea;\n'
    '{{geocodeArea:"Kreis Viersen"}}->.searchArea2;\n'
    '(node["amenity"="bank"](area.searchArea)(area.searchArea2);\n'
    'node["amenity"="atm"](area.searchArea)(area.searchArea2);\n'
    'way["amenity"="bank"](area.searchArea)(area.searchArea2);\n'
    'relation["amenity"="bank"](area.searchArea)(area.searchArea2); ); '
    "out; >; out skel qt;"
)


def golden(name):
    return (DATA_DIR / name).read_text(encoding="utf-8")


def test_five_shot_prompt():
    """Test the generation prompt against the castle shots."""
    shots = [
        Instance(f"c{n}", nl, query, "train")
        for n, (nl, query) in enumerate(CASTLE_SHOTS)
    ]

    assert build_prompt(shots, "castle in Deutschland") == golden("prompt_5shot.txt")


def test_zero_shot_prompt():
    """Test that the examples header is left out without shots."""
    prompt = build_prompt([], "castle in Deutschland")

    assert "Here are a few examples" not in prompt
    assert prompt.endswith("Input:\ncastle in Deutschland\n\nOverpass Query:\n")


def test_refine_prompt_with_feedback():
    """Test the refinement prompt against the bank example."""
    prompt = build_refine_prompt(
        "Banks or ATMS in Bürggen of Kreis Viersen.",
        BANK_HYPOTHESIS,
        "No Results found.",
        ATM_SHOTS,
    )

    assert prompt == golden("prompt_refine.txt")


def test_refine_prompt_without_feedback():
    """Test that no feedback leaves out the result paragraph."""
    prompt = build_refine_prompt("Post boxes", "node;out;", None)

    assert "You will now get part of the Overpass result" not in prompt
    assert "Here are a few examples" not in prompt
    assert prompt.endswith(
        "Here is the Overpass Query Hypothesis produced by a model:\nnode;out;\n\n"
        "Improve on the Overpass Query or keep it if it is good enough:\n"
    )


def test_refine_prompt_needs_hypothesis():
    """Test that an empty hypothesis is rejected."""
    with pytest.raises(ValueError):
        build_refine_prompt("Post boxes", "  ", None)
