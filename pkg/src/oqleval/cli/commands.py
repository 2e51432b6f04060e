"""Command implementations for the oqleval command line."""

import argparse
import logging
import sys
from pathlib import Path
from typing import Callable, Dict, List, Optional

from oqleval.core.analysis import detect_features, extract_kv
from oqleval.core.features import FEATURE_INFO
from oqleval.core.parser import parse
from oqleval.core.syntax_tree import to_syntax_tree
from oqleval.core.writer import normalize_template, serialize
from oqleval.corpus import dataset
from oqleval.corpus.augment import comment_instances
from oqleval.corpus.dataset import Corpus, Instance
from oqleval.corpus.splits import validate_splits
from oqleval.corpus.statistics import key_coverage, load_key_usage, render_stats, stats
from oqleval.difficulty import DifficultyCriterion, partition, write_partition
from oqleval.errors import ConfigError
from oqleval.execution.config import ExecutionConfig
from oqleval.execution.executor import Executor, feedback_from_outcome
from oqleval.execution.geocode import (
    FixtureGeocoder,
    GeocodeResolver,
    NominatimGeocoder,
)
from oqleval.harness.clients import GenerationClient, build_client
from oqleval.harness.embeddings import EmbeddingProvider, build_provider
from oqleval.harness.evaluation import render_report_table, run_eval, write_report
from oqleval.harness.prompts import build_prompt
from oqleval.harness.refine import RefinePolicy, generate_predictions, self_refine
from oqleval.harness.shots import ShotSelector, ShotStrategy
from oqleval.metrics.scores import em, oqs
from oqleval.utils.config_manager import ConfigManager
from oqleval.utils.constants import EXIT_FAILURE, EXIT_OK
from oqleval.utils.file_utils import atomic_write_text

logger = logging.getLogger(__name__)

PREDICTIONS_FILE = "predictions.jsonl"
REFINED_FILE = "refined.jsonl"
AUGMENTED_FILE = "augmented.jsonl"
STATS_FILE = "stats.txt"


class CommandContext:
    """Configuration plus lazily built services shared by the commands."""

    def __init__(self, config: ConfigManager) -> None:
        self.config = config
        self.logger = logging.getLogger(__name__)
        self._executor: Optional[Executor] = None

    @property
    def jobs(self) -> int:
        return max(1, int(self.config.get("jobs", 1)))

    @property
    def out_dir(self) -> Path:
        return Path(self.config.get("out_dir", "results"))

    def geocoder(self) -> GeocodeResolver:
        fixture = self.config.get("geocoder.fixture")
        if fixture:
            return FixtureGeocoder(fixture)
        return NominatimGeocoder(
            str(self.config.get("geocoder.nominatim_url")),
            user_agent=str(self.config.get("execution.user_agent")),
        )

    def executor(self) -> Executor:
        if self._executor is None:
            cfg = ExecutionConfig.from_config(self.config)
            self._executor = Executor(cfg, self.geocoder())
        return self._executor

    def provider(self) -> EmbeddingProvider:
        return build_provider(
            str(self.config.get("provider.kind")),
            path=self.config.get("provider.path"),
            url=self.config.get("provider.url"),
        )

    def client(self) -> GenerationClient:
        return build_client(
            str(self.config.get("client.kind")),
            endpoint=self.config.get("client.endpoint"),
            model=self.config.get("client.model"),
            path=self.config.get("client.path"),
            token=self.config.get("client.token"),
        )

    def strategy(self) -> ShotStrategy:
        return ShotStrategy(
            kind=str(self.config.get("harness.strategy")),
            k=int(self.config.get("harness.k")),
            seed=int(self.config.get("harness.seed")),
            most_similar_last=bool(self.config.get("harness.most_similar_last")),
        )

    def selector(self, train: List[Instance]) -> ShotSelector:
        strategy = self.strategy()
        provider = self.provider() if strategy.kind == "retrieval_embedding" else None
        return ShotSelector(train, strategy, provider)

    def refine_policy(self) -> RefinePolicy:
        return RefinePolicy(
            mode=str(self.config.get("refine.mode")),
            with_feedback=bool(self.config.get("refine.with_feedback")),
        )

    @property
    def max_length(self) -> int:
        return int(self.config.get("harness.max_length"))


def _read_query(source: Optional[str]) -> str:
    if source is None or source == "-":
        return sys.stdin.read()
    path = Path(source)
    if not path.exists():
        raise FileNotFoundError(f"Query file not found: {source}")
    return path.read_text(encoding="utf-8")


def _load_corpus(args: argparse.Namespace) -> Corpus:
    return dataset.load(args.corpus)


def _split(corpus: Corpus, name: str) -> List[Instance]:
    instances = corpus.split(name)
    logger.info(f"Using {len(instances)} instances from split {name!r}")
    return instances


def cmd_parse(args: argparse.Namespace, context: CommandContext) -> int:
    """Print the syntax tree (or another view) of a query."""
    ast = parse(_read_query(args.query))
    if args.format == "tree":
        print(to_syntax_tree(ast).render())
    elif args.format == "canonical":
        print(serialize(ast))
    elif args.format == "template":
        print(normalize_template(ast))
    elif args.format == "features":
        for feature in sorted(detect_features(ast), key=lambda f: f.value):
            print(FEATURE_INFO[feature].label)
    elif args.format == "kv":
        kv = extract_kv(ast)
        for key, value in sorted(kv.pairs):
            print(f"{key}={value}")
        for key in sorted(kv.keys - {k for k, _ in kv.pairs}):
            print(key)
    return EXIT_OK


def cmd_stats(args: argparse.Namespace, context: CommandContext) -> int:
    report = stats(_load_corpus(args))
    text = render_stats(report)
    print(text, end="")
    if args.out_dir:
        atomic_write_text(Path(args.out_dir) / STATS_FILE, text)
    return EXIT_OK


def cmd_score(args: argparse.Namespace, context: CommandContext) -> int:
    """Metric breakdown of one hypothesis against one reference."""
    hyp = _read_query(args.hyp_file) if args.hyp_file else args.hyp
    ref = _read_query(args.ref_file) if args.ref_file else args.ref
    if hyp is None or ref is None:
        raise ConfigError("score needs a hypothesis and a reference")

    breakdown = oqs(hyp, ref)
    if not breakdown.hyp_parsed:
        logger.warning("Hypothesis does not parse; KVS and TreeS are 0")
    rows = [
        ("chrf", breakdown.chrf.display),
        ("kvs", breakdown.kvs.display),
        ("trees", breakdown.trees.display),
        ("oqs", breakdown.oqs.display),
        ("em", 100.0 if em(hyp, ref) else 0.0),
    ]
    for name, value in rows:
        print(f"{name}\t{value:.1f}")
    return EXIT_OK


def cmd_evaluate(args: argparse.Namespace, context: CommandContext) -> int:
    corpus = _load_corpus(args)
    predictions = dataset.load_predictions(args.predictions)
    executor = context.executor() if args.execute else None
    report = run_eval(_split(corpus, args.split), predictions, executor, context.jobs)
    write_report(report, context.out_dir)
    print(render_report_table(report), end="")
    return EXIT_OK


def cmd_partition(args: argparse.Namespace, context: CommandContext) -> int:
    corpus = _load_corpus(args)
    criterion = DifficultyCriterion(args.criterion)
    provider = (
        context.provider()
        if criterion is DifficultyCriterion.MAX_INPUT_SIMILARITY
        else None
    )
    result = partition(
        _split(corpus, args.split),
        criterion,
        train=corpus.split("train"),
        provider=provider,
        jobs=context.jobs,
    )
    path = write_partition(result, context.out_dir / f"partition_{criterion.value}.tsv")
    for bucket, ids in result.buckets():
        print(f"{bucket}\t{len(ids)}")
    logger.info(f"Partition written to {path}")
    return EXIT_OK


def _target_instance(args: argparse.Namespace, corpus: Corpus) -> Instance:
    instance = corpus.get(args.id)
    if instance is None:
        raise ConfigError(f"No instance with id {args.id!r}")
    return instance


def cmd_prompt(args: argparse.Namespace, context: CommandContext) -> int:
    """Print the few-shot prompt for an input text or a corpus instance."""
    corpus = _load_corpus(args)
    if args.input is not None:
        nl = args.input
    elif args.id is not None:
        nl = _target_instance(args, corpus).nl
    else:
        raise ConfigError("prompt needs --input or --id")
    key = args.id if args.input is None else None
    shots = context.selector(corpus.split("train")).select(nl, key)
    print(build_prompt(shots, nl), end="")
    return EXIT_OK


def cmd_generate(args: argparse.Namespace, context: CommandContext) -> int:
    corpus = _load_corpus(args)
    result = generate_predictions(
        _split(corpus, args.split),
        context.selector(corpus.split("train")),
        context.client(),
        max_length=context.max_length,
        jobs=context.jobs,
    )
    path = dataset.save_predictions(
        result.predictions, context.out_dir / PREDICTIONS_FILE
    )
    print(f"Wrote {len(result.predictions)} predictions to {path}")
    return EXIT_FAILURE if result.failed else EXIT_OK


def cmd_refine(args: argparse.Namespace, context: CommandContext) -> int:
    corpus = _load_corpus(args)
    baseline = dataset.load_predictions(args.predictions)
    shot_hypotheses = (
        dataset.load_predictions(args.shot_hypotheses) if args.shot_hypotheses else None
    )
    policy = context.refine_policy()
    needs_executor = policy.mode == "errors_only" or policy.with_feedback
    result = self_refine(
        _split(corpus, args.split),
        baseline,
        policy,
        context.client(),
        context.executor() if needs_executor else None,
        context.selector(corpus.split("train")),
        shot_hypotheses=shot_hypotheses,
        max_length=context.max_length,
        jobs=context.jobs,
    )
    path = dataset.save_predictions(result.predictions, context.out_dir / REFINED_FILE)
    print(
        f"Refined {len(result.refined)} predictions "
        f"({len(result.failed)} failed); wrote {path}"
    )
    return EXIT_FAILURE if result.failed else EXIT_OK


def cmd_execute(args: argparse.Namespace, context: CommandContext) -> int:
    executor = context.executor()
    outcome = executor.execute(_read_query(args.query))
    count = len(outcome.elements) if outcome.elements is not None else 0
    print(f"status\t{outcome.status.value}")
    print(f"elements\t{count}")
    print(feedback_from_outcome(outcome, executor.cfg.sample_size))
    return EXIT_OK if outcome.ok else EXIT_FAILURE


def cmd_augment(args: argparse.Namespace, context: CommandContext) -> int:
    corpus = _load_corpus(args)
    extra = comment_instances(corpus)
    target = Path(args.out) if args.out else context.out_dir / AUGMENTED_FILE
    dataset.save(corpus.extended(extra), target)
    print(f"Added {len(extra)} comment instances; wrote {target}")
    return EXIT_OK


def cmd_validate(args: argparse.Namespace, context: CommandContext) -> int:
    violations = validate_splits(_load_corpus(args), args.mode)
    for v in violations:
        print(f"{v.train_id}\t{v.eval_id}\t{v.side}")
    return EXIT_FAILURE if violations else EXIT_OK


def cmd_coverage(args: argparse.Namespace, context: CommandContext) -> int:
    coverage = key_coverage(_load_corpus(args), load_key_usage(args.key_usage))
    print(f"key coverage\t{coverage:.4f}")
    return EXIT_OK


COMMANDS: Dict[str, Callable[[argparse.Namespace, CommandContext], int]] = {
    "parse": cmd_parse,
    "stats": cmd_stats,
    "score": cmd_score,
    "evaluate": cmd_evaluate,
    "partition": cmd_partition,
    "prompt": cmd_prompt,
    "generate": cmd_generate,
    "refine": cmd_refine,
    "execute": cmd_execute,
    "augment": cmd_augment,
    "validate": cmd_validate,
    "coverage": cmd_coverage,
}


def run_command(args: argparse.Namespace, context: CommandContext) -> int:
    try:
        handler = COMMANDS[args.command]
    except KeyError:
        raise ConfigError(f"Unknown command {args.command!r}")
    return handler(args, context)
