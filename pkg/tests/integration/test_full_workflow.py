"""End-to-end tests of the oqleval command line."""

import json
import tempfile
from pathlib import Path

import pytest

from oqleval.corpus import dataset
from oqleval.harness.clients import prompt_key
from oqleval.harness.prompts import build_prompt, build_refine_prompt
from oqleval.harness.shots import ShotSelector, ShotStrategy
from oqleval.main import main

DATA_DIR = Path(__file__).parent.parent / "data"
CORPUS = str(DATA_DIR / "corpus.jsonl")
ENDPOINT = f"fixture://{DATA_DIR / 'fixture_server.json'}"
GEOCODES = str(DATA_DIR / "geocodes.tsv")


@pytest.fixture
def temp_dir():
    """Create a temporary directory for testing."""
    with tempfile.TemporaryDirectory() as tmpdir:
        yield Path(tmpdir)


@pytest.fixture
def config_file(temp_dir):
    """An empty configuration so the user's own file is never read."""
    path = temp_dir / "config.json"
    path.write_text("{}", encoding="utf-8")
    return str(path)


def run(config_file, *args):
    return main(["--config", config_file, "-q", *args])


def test_parse_command(config_file, capsys):
    """Test printing the syntax tree and the tag filters."""
    query = str(DATA_DIR / "queries" / "figure_one.oql")

    assert run(config_file, "parse", query) == 0
    tree = capsys.readouterr().out
    assert tree.startswith("query")

    assert run(config_file, "parse", query, "--format", "kv") == 0
    assert "natural=peak" in capsys.readouterr().out.splitlines()


def test_parse_syntax_error(config_file, temp_dir, capsys):
    """Test that an unparsable query exits with a failure."""
    path = temp_dir / "broken.oql"
    path.write_text("node[;out;", encoding="utf-8")

    assert run(config_file, "parse", str(path)) == 1
    assert "error" in capsys.readouterr().err


def test_score_command(config_file, capsys):
    """Test the metric breakdown of one pair."""
    assert run(config_file, "score", "out;", "out;") == 0

    lines = capsys.readouterr().out.splitlines()
    names = ["chrf", "kvs", "trees", "oqs", "em"]
    assert lines == [f"{name}\t100.0" for name in names]


def test_stats_command(config_file, temp_dir, capsys):
    """Test corpus statistics and the stats file."""
    code = run(config_file, "stats", "--corpus", CORPUS, "--out-dir", str(temp_dir))
    assert code == 0

    out = capsys.readouterr().out
    assert out.startswith("Instances")
    assert (temp_dir / "stats.txt").read_text(encoding="utf-8") == out


def test_evaluate_with_execution(config_file, temp_dir, capsys):
    """Test evaluating reference predictions against the fixture server."""
    corpus = dataset.load(CORPUS)
    predictions = dataset.save_predictions(
        {i.id: i.query for i in corpus.split("dev")}, temp_dir / "predictions.jsonl"
    )
    out_dir = temp_dir / "results"

    code = run(
        config_file,
        "evaluate",
        "--corpus", CORPUS,
        "--predictions", str(predictions),
        "--execute",
        "--endpoint", ENDPOINT,
        "--geocodes", GEOCODES,
        "--out-dir", str(out_dir),
        "--jobs", "2",
    )

    assert code == 0
    values = capsys.readouterr().out.splitlines()[1].split()
    assert values == ["100.0"] * 5 + ["0"] + ["100.0"] * 2
    assert (out_dir / "report.tsv").exists()
    assert (out_dir / "summary.txt").exists()


def test_generate_then_evaluate(config_file, temp_dir, capsys):
    """Test fixture-backed generation followed by evaluation."""
    corpus = dataset.load(CORPUS)
    selector = ShotSelector(
        corpus.split("train"), ShotStrategy(kind="retrieval_bleu", k=2)
    )
    completions = {
        prompt_key(build_prompt(selector.select(i.nl), i.nl)): f" {i.query}\n"
        for i in corpus.split("dev")
    }
    fixture = temp_dir / "completions.json"
    fixture.write_text(json.dumps(completions), encoding="utf-8")
    out_dir = temp_dir / "results"

    code = run(
        config_file,
        "generate",
        "--corpus", CORPUS,
        "--client", "fixture",
        "--client-path", str(fixture),
        "--strategy", "retrieval_bleu",
        "--k", "2",
        "--out-dir", str(out_dir),
    )
    assert code == 0
    predictions = dataset.load_predictions(out_dir / "predictions.jsonl")
    assert predictions == {i.id: i.query for i in corpus.split("dev")}

    capsys.readouterr()
    code = run(
        config_file,
        "evaluate",
        "--corpus", CORPUS,
        "--predictions", str(out_dir / "predictions.jsonl"),
        "--out-dir", str(out_dir),
    )
    assert code == 0
    assert capsys.readouterr().out.splitlines()[1].split() == ["100.0"] * 5


def test_execute_command(config_file, temp_dir, capsys):
    """Test executing one query."""
    path = temp_dir / "bench.oql"
    path.write_text('node["amenity"="bench"]({{bbox}});out;', encoding="utf-8")

    code = run(
        config_file,
        "execute",
        str(path),
        "--endpoint", ENDPOINT,
        "--geocodes", GEOCODES,
    )

    assert code == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[:2] == ["status\tok", "elements\t3"]


def test_partition_command(config_file, temp_dir, capsys):
    """Test writing a difficulty partition."""
    code = run(
        config_file,
        "partition",
        "--corpus", CORPUS,
        "--criterion", "input_length",
        "--out-dir", str(temp_dir),
    )

    assert code == 0
    assert capsys.readouterr().out.splitlines() == ["easy\t1", "medium\t1", "hard\t1"]
    assert (temp_dir / "partition_input_length.tsv").exists()


def test_prompt_command(config_file, capsys):
    """Test printing a zero-shot prompt."""
    code = run(
        config_file,
        "prompt",
        "--corpus", CORPUS,
        "--id", "d2",
        "--strategy", "random",
        "--k", "0",
    )

    assert code == 0
    out = capsys.readouterr().out
    assert out.endswith("Input:\nBenches in view\n\nOverpass Query:\n")


def test_validate_command(config_file, capsys):
    """Test split validation exit codes."""
    assert run(config_file, "validate", "--corpus", CORPUS) == 0
    assert run(config_file, "validate", "--corpus", CORPUS, "--mode", "near") == 1
    assert capsys.readouterr().out.splitlines() == ["t4\td1\tquery", "t4\td3\tquery"]


def test_augment_and_coverage(config_file, temp_dir, capsys):
    """Test comment augmentation and key coverage."""
    target = temp_dir / "augmented.jsonl"

    assert run(config_file, "augment", "--corpus", CORPUS, "--out", str(target)) == 0
    assert len(dataset.load(target)) == 13

    capsys.readouterr()
    usage = str(DATA_DIR / "key_usage.tsv")
    assert run(config_file, "coverage", "--corpus", CORPUS, "--key-usage", usage) == 0
    assert capsys.readouterr().out == "key coverage\t0.5000\n"


def test_exit_codes(config_file, temp_dir, capsys):
    """Test failure exit codes."""
    bad = temp_dir / "bad.jsonl"
    bad.write_text("{not json\n", encoding="utf-8")

    assert run(config_file, "stats", "--corpus", str(bad)) == 1
    assert run(config_file, "stats", "--corpus", str(temp_dir / "none.jsonl")) == 2
    missing_config = str(temp_dir / "none.json")
    assert main(["--config", missing_config, "stats", "--corpus", CORPUS]) == 2
    broken_config = temp_dir / "broken.json"
    broken_config.write_text("{oops", encoding="utf-8")
    assert main(["--config", str(broken_config), "stats", "--corpus", CORPUS]) == 2
    assert run(config_file, "no-such-command") == 2
    query = str(DATA_DIR / "queries" / "figure_one.oql")
    assert run(config_file, "execute", query, "--sample-size", "21") == 2


def test_refine_errors_only(config_file, temp_dir, capsys):
    """Test refining the rejected baseline predictions only."""
    corpus = dataset.load(CORPUS)
    dev = corpus.split("dev")
    baseline = {i.id: i.query for i in dev}
    baseline["d1"] = "node[;out;"
    predictions = dataset.save_predictions(baseline, temp_dir / "baseline.jsonl")

    prompt = build_refine_prompt(dev[0].nl, baseline["d1"], None)
    fixture = temp_dir / "completions.json"
    completions = {prompt_key(prompt): dev[0].query}
    fixture.write_text(json.dumps(completions), encoding="utf-8")
    out_dir = temp_dir / "results"

    code = run(
        config_file,
        "refine",
        "--corpus", CORPUS,
        "--predictions", str(predictions),
        "--refine-mode", "errors_only",
        "--client", "fixture",
        "--client-path", str(fixture),
        "--strategy", "random",
        "--k", "0",
        "--endpoint", ENDPOINT,
        "--geocodes", GEOCODES,
        "--out-dir", str(out_dir),
    )

    assert code == 0
    assert capsys.readouterr().out.startswith("Refined 1 predictions (0 failed)")
    refined = dataset.load_predictions(out_dir / "refined.jsonl")
    assert refined == {i.id: i.query for i in dev}
