"""Tests for corpus loading, statistics, split validation and augmentation."""

import json
import tempfile
from pathlib import Path

import pytest

from oqleval.core.features import Feature
from oqleval.corpus import dataset
from oqleval.corpus.augment import comment_instances
from oqleval.corpus.dataset import Corpus, Instance
from oqleval.corpus.splits import (
    SplitViolation,
    normalize_input,
    query_template,
    validate_splits,
)
from oqleval.corpus.statistics import key_coverage, load_key_usage, render_stats, stats
from oqleval.errors import CorpusError

DATA_DIR = Path(__file__).parent.parent / "data"


@pytest.fixture
def temp_dir():
    """Create a temporary directory for testing."""
    with tempfile.TemporaryDirectory() as tmpdir:
        yield Path(tmpdir)


@pytest.fixture
def corpus():
    return dataset.load(DATA_DIR / "corpus.jsonl")


def test_load_corpus(corpus):
    """Test loading the sample corpus."""
    assert len(corpus) == 12
    assert corpus.split_sizes() == {"train": 6, "dev": 3, "test": 3}
    assert corpus.get("d2").nl == "Benches in view"
    assert corpus.get("missing") is None
    assert "t1" in corpus
    assert [i.id for i in corpus.split("dev")] == ["d1", "d2", "d3"]


def test_load_reports_every_problem(temp_dir):
    """Test that all malformed lines are listed with line numbers."""
    path = temp_dir / "bad.jsonl"
    lines = [
        json.dumps({"id": "a", "nl": "x", "query": "out;", "split": "train"}),
        "{not json",
        json.dumps({"id": "b", "nl": "x", "split": "train"}),
        json.dumps({"id": "a", "nl": "y", "query": "out;", "split": "dev"}),
        json.dumps({"id": "c", "nl": "x", "query": "out;", "split": "holdout"}),
        json.dumps({"id": "d", "nl": " ", "query": "out;", "split": "dev"}),
    ]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")

    with pytest.raises(CorpusError) as excinfo:
        dataset.load(path)

    assert [line for line, _ in excinfo.value.problems] == [2, 3, 4, 5, 6]
    assert "missing field(s): query" in excinfo.value.problems[1][1]
    assert "duplicate id 'a'" in excinfo.value.problems[2][1]
    assert excinfo.value.path == str(path)


def test_load_checks_expected_sizes():
    """Test the split size check."""
    with pytest.raises(CorpusError) as excinfo:
        dataset.load(DATA_DIR / "corpus.jsonl", expected_sizes={"train": 6, "dev": 4})

    assert "expected 4" in str(excinfo.value)


def test_load_missing_file(temp_dir):
    """Test that a missing corpus file is reported as such."""
    with pytest.raises(FileNotFoundError):
        dataset.load(temp_dir / "nope.jsonl")


def test_save_and_load(corpus, temp_dir):
    """Test writing a corpus and reading it back."""
    path = dataset.save(corpus, temp_dir / "out" / "corpus.jsonl")

    assert list(dataset.load(path)) == list(corpus)


def test_duplicate_ids_rejected():
    """Test that a corpus cannot hold the same id twice."""
    a = Instance("x", "input", "out;", "train")

    with pytest.raises(CorpusError):
        Corpus([a, a])


def test_predictions_io(temp_dir):
    """Test the predictions JSONL format."""
    path = dataset.save_predictions(
        {"d1": "out;", "d2": "node;\nout;"}, temp_dir / "p.jsonl"
    )

    assert dataset.load_predictions(path) == {"d1": "out;", "d2": "node;\nout;"}

    bad = temp_dir / "bad.jsonl"
    bad.write_text('{"id": "d1"}\n{"id": "d1", "query": "x"}\n', encoding="utf-8")
    with pytest.raises(CorpusError) as excinfo:
        dataset.load_predictions(bad)
    assert [line for line, _ in excinfo.value.problems] == [1]


def test_stats(corpus):
    """Test the corpus summary figures."""
    report = stats(corpus)

    assert report.instances == 12
    assert report.parsed == 12
    assert report.parse_failures == []
    assert report.distinct_keys == 6
    assert report.distinct_pairs == 11
    assert report.distinct_values == 11
    assert report.feature_counts[Feature.OUT] == 12
    assert report.prevalence(Feature.OUT) == 1.0
    assert report.feature_counts[Feature.UNION] == 2
    assert report.feature_counts[Feature.BY_AREA] == 6
    assert report.feature_counts[Feature.RECURSE_UP] == 1
    assert report.mean_input_length == pytest.approx(
        sum(len(i.nl) for i in corpus) / 12
    )


def test_stats_counts_parse_failures():
    """Test that unparsable queries are excluded but reported."""
    corpus = Corpus(
        [
            Instance("ok", "peaks", 'node["natural"="peak"];out;', "train"),
            Instance("bad", "broken", "node[;", "train"),
        ]
    )
    report = stats(corpus)

    assert report.parsed == 1
    assert report.parse_failures == [("bad", "parse error")]
    assert report.mean_query_length == pytest.approx((27 + 6) / 2)


def test_render_stats(corpus):
    """Test the text layout of the summary."""
    text = render_stats(stats(corpus))

    assert text.startswith("Instances")
    assert "Feature prevalence" in text
    assert "Standalone Statements" in text
    assert "100.0%" in text


def test_stats_of_empty_corpus():
    """Test that an empty corpus gives zeros."""
    report = stats(Corpus())

    assert report.instances == 0
    assert report.prevalence(Feature.OUT) == 0.0


def test_validate_splits_exact(corpus):
    """Test that the sample corpus has no exact overlaps."""
    assert validate_splits(corpus) == []


def test_validate_splits_near(corpus):
    """Test template-level overlaps."""
    assert validate_splits(corpus, "near") == [
        SplitViolation("t4", "d1", "query"),
        SplitViolation("t4", "d3", "query"),
    ]


def test_validate_splits_input_overlap(corpus):
    """Test that normalized inputs are compared."""
    leaked = Instance("d9", "all PEAKS in Troms!", "way;out;", "dev")

    violations = validate_splits(corpus.extended([leaked]))
    assert violations == [SplitViolation("t1", "d9", "input")]


def test_validate_splits_unknown_mode(corpus):
    """Test that an unknown mode is rejected."""
    with pytest.raises(ValueError):
        validate_splits(corpus, "fuzzy")


def test_normalizers():
    """Test input and query normalization."""
    assert normalize_input("  All peaks, in  Troms. ") == "all peaks in troms"
    assert query_template("node[;") == "node[;"
    assert query_template('node["a"="b"];') == query_template('node["c"="d"];')


def test_comment_instances(corpus):
    """Test instances derived from commented train queries."""
    extra = comment_instances(corpus)

    assert len(extra) == 1
    (instance,) = extra
    assert instance.id == "t3#comments"
    assert instance.nl == "cash machines"
    assert instance.split == "train"
    assert instance.synthetic
    assert "//" not in instance.query
    assert instance.query.startswith("[out:json];\n{{geocodeArea:")


def test_comment_instances_join_comments():
    """Test that several comments form one input."""
    corpus = Corpus(
        [
            Instance("a", "x", "// first\nnode;\n/* second */\nout;", "train"),
            Instance("b", "y", "// not train\nout;", "dev"),
        ]
    )
    extra = comment_instances(corpus)

    assert [(i.nl, i.query) for i in extra] == [("first second", "node;\nout;")]


def test_extended_corpus_saves_synthetic_flag(corpus, temp_dir):
    """Test that synthetic instances keep their flag through JSONL."""
    extended = corpus.extended(comment_instances(corpus))
    path = dataset.save(extended, temp_dir / "aug.jsonl")
    loaded = dataset.load(path)

    assert len(loaded) == 13
    assert loaded.get("t3#comments").synthetic


def test_key_coverage(corpus):
    """Test the share of key usage covered by the corpus keys."""
    usage = load_key_usage(DATA_DIR / "key_usage.tsv")

    assert usage["building"] == 1000
    assert key_coverage(corpus, usage) == pytest.approx(0.5)
    assert key_coverage(Corpus(), usage) == 0.0


def test_load_key_usage_rejects_bad_rows(temp_dir):
    """Test malformed usage tables."""
    path = temp_dir / "usage.tsv"
    path.write_text("amenity\tmany\nhighway\n", encoding="utf-8")

    with pytest.raises(CorpusError) as excinfo:
        load_key_usage(path)
    assert [line for line, _ in excinfo.value.problems] == [1, 2]
