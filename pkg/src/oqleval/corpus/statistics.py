"""Dataset statistics, feature prevalence and key-usage coverage."""

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Mapping, Set, Tuple, Union

from oqleval.core.analysis import detect_features, extract_kv
from oqleval.core.features import FEATURE_INFO, Feature, FeatureGroup, features_in_group
from oqleval.core.nodes import QueryAst
from oqleval.core.parser import parse
from oqleval.core.syntax_tree import count_syntactic_units
from oqleval.core.writer import normalize_template
from oqleval.corpus.dataset import Corpus, Instance
from oqleval.errors import CorpusError, QuerySyntaxError
from oqleval.utils.constants import SPLITS

logger = logging.getLogger(__name__)


@dataclass
class StatsReport:
    """Corpus summary; parse-dependent figures cover parsed queries only."""

    split_counts: Dict[str, int] = field(default_factory=lambda: {s: 0 for s in SPLITS})
    instances: int = 0
    distinct_words: int = 0
    mean_input_length: float = 0.0
    mean_query_length: float = 0.0
    parsed: int = 0
    mean_syntactic_units: float = 0.0
    distinct_templates: int = 0
    distinct_keys: int = 0
    distinct_values: int = 0
    distinct_pairs: int = 0
    feature_counts: Dict[Feature, int] = field(
        default_factory=lambda: {f: 0 for f in Feature}
    )
    parse_failures: List[Tuple[str, str]] = field(default_factory=list)

    def prevalence(self, feature: Feature) -> float:
        """Share of all instances whose query uses the feature."""
        if self.instances == 0:
            return 0.0
        return self.feature_counts[feature] / self.instances


def _mean(values: List[float]) -> float:
    return math.fsum(values) / len(values) if values else 0.0


def _parse_logged(instance: Instance) -> Union[QueryAst, None]:
    try:
        return parse(instance.query)
    except QuerySyntaxError as e:
        logger.warning(
            f"Instance {instance.id}: query does not parse at line {e.line}, "
            f"column {e.column} (span {e.span[0]}-{e.span[1]}): {e.message}"
        )
        return None


def stats(corpus: Corpus) -> StatsReport:
    """
    Summarize a corpus.

    Lengths are in characters. Words are whitespace tokens after lowercasing.
    Unparsable queries are counted in `parse_failures` and left out of the
    parse-dependent figures.
    """
    report = StatsReport()
    report.instances = len(corpus)
    report.split_counts = corpus.split_sizes()

    words: Set[str] = set()
    templates: Set[str] = set()
    keys: Set[str] = set()
    values: Set[str] = set()
    pairs: Set[Tuple[str, str]] = set()
    units: List[float] = []

    for instance in corpus:
        words.update(instance.nl.lower().split())

        ast = _parse_logged(instance)
        if ast is None:
            report.parse_failures.append((instance.id, "parse error"))
            continue

        units.append(float(count_syntactic_units(ast)))
        templates.add(normalize_template(ast))
        kv = extract_kv(ast)
        keys |= kv.keys
        values |= kv.values
        pairs |= kv.pairs
        for feature in detect_features(ast):
            report.feature_counts[feature] += 1

    report.distinct_words = len(words)
    report.mean_input_length = _mean([float(len(i.nl)) for i in corpus])
    report.mean_query_length = _mean([float(len(i.query)) for i in corpus])
    report.parsed = len(units)
    report.mean_syntactic_units = _mean(units)
    report.distinct_templates = len(templates)
    report.distinct_keys = len(keys)
    report.distinct_values = len(values)
    report.distinct_pairs = len(pairs)
    report.parse_failures.sort()

    if report.parse_failures:
        logger.warning(
            f"{len(report.parse_failures)} of {report.instances} queries did not parse"
        )
    return report


def render_stats(report: StatsReport) -> str:
    """Aligned text summary followed by the feature prevalence table."""
    rows = [
        ("Instances", f"{report.instances}"),
        *[(f"  {split}", f"{report.split_counts.get(split, 0)}") for split in SPLITS],
        ("Parsed queries", f"{report.parsed}"),
        ("Parse failures", f"{len(report.parse_failures)}"),
        ("Distinct input words", f"{report.distinct_words}"),
        ("Mean input length (chars)", f"{report.mean_input_length:.1f}"),
        ("Mean query length (chars)", f"{report.mean_query_length:.1f}"),
        ("Mean syntactic units", f"{report.mean_syntactic_units:.1f}"),
        ("Distinct templates", f"{report.distinct_templates}"),
        ("Unique keys", f"{report.distinct_keys}"),
        ("Unique values", f"{report.distinct_values}"),
        ("Unique key-value pairs", f"{report.distinct_pairs}"),
    ]
    width = max(len(label) for label, _ in rows)
    lines = [f"{label:<{width}}  {value}" for label, value in rows]

    lines.append("")
    lines.append("Feature prevalence")
    for group in FeatureGroup:
        members = features_in_group(group)
        used = sum(1 for f in members if report.feature_counts[f] > 0)
        lines.append(f"{group.value} ({used}/{len(members)})")
        for feature in members:
            count = report.feature_counts[feature]
            share = 100.0 * report.prevalence(feature)
            label = FEATURE_INFO[feature].label
            lines.append(f"  {label:<28} {count:>6}  {share:5.1f}%")
    return "\n".join(lines) + "\n"


def load_key_usage(path: Union[str, Path]) -> Dict[str, int]:
    """
    Read a `key<TAB>count` usage table.

    Raises:
        CorpusError: malformed rows
    """
    usage: Dict[str, int] = {}
    problems: List[Tuple[int, str]] = []
    with open(path, "r", encoding="utf-8", newline="") as f:
        for line_no, row in enumerate(csv.reader(f, delimiter="\t"), 1):
            if not row or not "".join(row).strip():
                continue
            if len(row) != 2:
                problems.append((line_no, "expected key<TAB>count"))
                continue
            key, count = row
            try:
                usage[key] = int(count)
            except ValueError:
                problems.append((line_no, f"count is not an integer: {count!r}"))
    if problems:
        raise CorpusError(problems, str(path))
    return usage


def corpus_keys(corpus: Corpus) -> Set[str]:
    keys: Set[str] = set()
    for instance in corpus:
        ast = _parse_logged(instance)
        if ast is not None:
            keys |= extract_kv(ast).keys
    return keys


def key_coverage(corpus: Corpus, key_usage: Mapping[str, int]) -> float:
    """Share of total key usage accounted for by the keys the corpus uses."""
    total = sum(key_usage.values())
    if total <= 0 or len(corpus) == 0:
        return 0.0
    keys = corpus_keys(corpus)
    covered = sum(count for key, count in key_usage.items() if key in keys)
    return covered / total
