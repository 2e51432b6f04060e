"""Argument parsing for the oqleval command line."""

import argparse
from typing import Any, Dict, List, Optional

from oqleval.corpus.splits import VALIDATION_MODES
from oqleval.difficulty import DifficultyCriterion
from oqleval.errors import ConfigError
from oqleval.execution.config import parse_bbox
from oqleval.harness.refine import REFINE_MODES
from oqleval.harness.shots import SHOT_KINDS
from oqleval.utils.constants import APP_NAME, APP_VERSION, SPLITS

# argparse destination -> configuration key
CONFIG_FLAGS = {
    "endpoint": "execution.endpoint_url",
    "bbox": "execution.default_bbox",
    "cache_dir": "execution.cache_dir",
    "geocodes": "geocoder.fixture",
    "provider": "provider.kind",
    "provider_path": "provider.path",
    "provider_url": "provider.url",
    "client": "client.kind",
    "client_path": "client.path",
    "client_endpoint": "client.endpoint",
    "model": "client.model",
    "strategy": "harness.strategy",
    "k": "harness.k",
    "seed": "harness.seed",
    "max_length": "harness.max_length",
    "refine_mode": "refine.mode",
    "with_feedback": "refine.with_feedback",
    "sample_size": "execution.sample_size",
    "jobs": "jobs",
    "out_dir": "out_dir",
}


def _bbox(text: str) -> List[float]:
    try:
        return list(parse_bbox(text))
    except ConfigError as e:
        raise argparse.ArgumentTypeError(str(e))


def _corpus_args(parser: argparse.ArgumentParser, split: Optional[str] = None) -> None:
    parser.add_argument("--corpus", required=True, help="Corpus JSONL file")
    if split is not None:
        parser.add_argument("--split", choices=SPLITS, default=split)


def _execution_args(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("execution")
    group.add_argument("--endpoint", help="Overpass API base URL")
    group.add_argument("--bbox", type=_bbox, help="south,west,north,east for {{bbox}}")
    group.add_argument("--geocodes", help="Geocoder fixture TSV (name kind id lat lon)")
    group.add_argument("--cache-dir", help="Execution outcome cache directory")


def _provider_args(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("embeddings")
    group.add_argument("--provider", choices=("hashing", "file", "http"))
    group.add_argument("--provider-path", help="Precomputed embedding file")
    group.add_argument("--provider-url", help="Embedding service URL")


def _harness_args(parser: argparse.ArgumentParser) -> None:
    _provider_args(parser)
    group = parser.add_argument_group("shots")
    group.add_argument("--strategy", choices=SHOT_KINDS)
    group.add_argument("--k", type=int, help="Number of shots")
    group.add_argument("--seed", type=int, help="Seed for random shot selection")


def _client_args(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("generation")
    group.add_argument("--client", choices=("completions", "fixture"))
    group.add_argument("--client-path", help="Completion fixture JSON")
    group.add_argument("--client-endpoint", help="Completions endpoint URL")
    group.add_argument("--model", help="Model name sent to the completions endpoint")
    group.add_argument("--max-length", type=int, help="Maximum completion tokens")


def _runner_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--jobs", type=int, help="Worker threads")
    parser.add_argument("--out-dir", help="Directory for reports and outputs")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=APP_NAME,
        description="OverpassQL parsing, metrics, execution and evaluation toolkit",
    )
    parser.add_argument(
        "--version", action="version", version=f"{APP_NAME} {APP_VERSION}"
    )
    parser.add_argument("--config", help="JSON configuration file")
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="Debug logging")
    verbosity.add_argument("-q", "--quiet", action="store_true", help="Warnings only")

    commands = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = commands.add_parser("parse", help="Parse a query and print its syntax tree")
    p.add_argument("query", nargs="?", default="-", help="Query file, or - for stdin")
    p.add_argument(
        "--format",
        choices=("tree", "canonical", "template", "features", "kv"),
        default="tree",
    )

    p = commands.add_parser("stats", help="Corpus statistics and feature prevalence")
    _corpus_args(p)
    p.add_argument("--out-dir", help="Also write stats.txt here")

    p = commands.add_parser("score", help="Compare a hypothesis with a reference query")
    p.add_argument("hyp", nargs="?", help="Hypothesis query text")
    p.add_argument("ref", nargs="?", help="Reference query text")
    p.add_argument("--hyp-file", help="Read the hypothesis from a file")
    p.add_argument("--ref-file", help="Read the reference from a file")

    p = commands.add_parser(
        "evaluate", help="Score predictions for an evaluation split"
    )
    _corpus_args(p, split="dev")
    p.add_argument("--predictions", required=True, help="Predictions JSONL")
    p.add_argument("--execute", action="store_true", help="Also compute EX metrics")
    _execution_args(p)
    _runner_args(p)

    p = commands.add_parser("partition", help="Difficulty partition of a split")
    _corpus_args(p, split="test")
    p.add_argument(
        "--criterion",
        required=True,
        choices=[c.value for c in DifficultyCriterion],
    )
    _provider_args(p)
    _runner_args(p)

    p = commands.add_parser("prompt", help="Print the few-shot prompt for an input")
    _corpus_args(p)
    p.add_argument("--input", help="Natural-language input")
    p.add_argument("--id", help="Use the input of this corpus instance")
    _harness_args(p)

    p = commands.add_parser("generate", help="Few-shot baseline predictions")
    _corpus_args(p, split="dev")
    _harness_args(p)
    _client_args(p)
    _runner_args(p)

    p = commands.add_parser("refine", help="One self-refinement round")
    _corpus_args(p, split="dev")
    p.add_argument("--predictions", required=True, help="Baseline predictions JSONL")
    p.add_argument(
        "--shot-hypotheses",
        help="Train-instance hypotheses JSONL (default: shots show their reference)",
    )
    p.add_argument("--refine-mode", choices=REFINE_MODES)
    p.add_argument("--with-feedback", action="store_true", default=None)
    _harness_args(p)
    _client_args(p)
    _execution_args(p)
    _runner_args(p)

    p = commands.add_parser("execute", help="Execute one query")
    p.add_argument("query", nargs="?", default="-", help="Query file, or - for stdin")
    p.add_argument(
        "--sample-size", type=int, help="Result records shown (at most 20)"
    )
    _execution_args(p)

    p = commands.add_parser("augment", help="Add instances derived from query comments")
    _corpus_args(p)
    p.add_argument("--out", help="Output JSONL (default: <out-dir>/augmented.jsonl)")
    _runner_args(p)

    p = commands.add_parser("validate", help="Check train/evaluation overlap")
    _corpus_args(p)
    p.add_argument("--mode", choices=VALIDATION_MODES, default="exact")

    p = commands.add_parser("coverage", help="Key-usage coverage of the corpus")
    _corpus_args(p)
    p.add_argument("--key-usage", required=True, help="key<TAB>count usage table")

    return parser


def config_overrides(args: argparse.Namespace) -> Dict[str, Any]:
    """Configuration values given on the command line."""
    return {key: getattr(args, dest, None) for dest, key in CONFIG_FLAGS.items()}
