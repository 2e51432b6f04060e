"""Difficulty criteria and easy/medium/hard partitioning of evaluation instances."""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from oqleval.core.parser import parse
from oqleval.core.syntax_tree import count_syntactic_units
from oqleval.corpus.dataset import Instance
from oqleval.errors import HarnessError, MetricError, QuerySyntaxError
from oqleval.harness.embeddings import EmbeddingProvider, embedding_matrix
from oqleval.metrics.scores import oqs_profiles, profile_query
from oqleval.utils.file_utils import atomic_write_text

BUCKETS = ("easy", "medium", "hard")


class DifficultyCriterion(str, Enum):
    INPUT_LENGTH = "input_length"
    QUERY_LENGTH = "query_length"
    SYNTACTIC_UNITS = "syntactic_units"
    MAX_INPUT_SIMILARITY = "max_input_similarity"
    MAX_QUERY_OQS = "max_query_oqs"

    @property
    def is_similarity(self) -> bool:
        """Higher similarity to train means easier."""
        return self in (
            DifficultyCriterion.MAX_INPUT_SIMILARITY,
            DifficultyCriterion.MAX_QUERY_OQS,
        )


@dataclass(frozen=True)
class Partition:
    """Disjoint easy/medium/hard instance id lists, each sorted by difficulty."""

    criterion: DifficultyCriterion
    easy: Tuple[str, ...]
    medium: Tuple[str, ...]
    hard: Tuple[str, ...]
    scores: Dict[str, float] = field(default_factory=dict, compare=False)

    def buckets(self) -> List[Tuple[str, Tuple[str, ...]]]:
        return list(zip(BUCKETS, (self.easy, self.medium, self.hard)))

    def bucket_of(self, instance_id: str) -> Optional[str]:
        for name, ids in self.buckets():
            if instance_id in ids:
                return name
        return None


def partition_sizes(count: int) -> Tuple[int, int, int]:
    """Thirds; the remainder goes to easy first, then medium (1000 -> 334/333/333)."""
    base, remainder = divmod(count, 3)
    return base + (remainder >= 1), base + (remainder >= 2), base


class DifficultyScorer:
    """
    Scores instances against a training split.

    Train embeddings for `max_input_similarity` are computed once.
    """

    def __init__(
        self, train: Sequence[Instance], provider: Optional[EmbeddingProvider] = None
    ) -> None:
        self.train = list(train)
        self.provider = provider
        self.logger = logging.getLogger(__name__)
        self._matrix: Optional[np.ndarray] = None

    def score(self, instance: Instance, criterion: DifficultyCriterion) -> float:
        if criterion is DifficultyCriterion.INPUT_LENGTH:
            return float(len(instance.nl))
        elif criterion is DifficultyCriterion.QUERY_LENGTH:
            return float(len(instance.query))
        elif criterion is DifficultyCriterion.SYNTACTIC_UNITS:
            return self._syntactic_units(instance)
        elif criterion is DifficultyCriterion.MAX_INPUT_SIMILARITY:
            return self._max_input_similarity(instance)
        elif criterion is DifficultyCriterion.MAX_QUERY_OQS:
            return self._max_query_oqs(instance)
        raise ValueError(f"Unknown criterion: {criterion}")

    def _syntactic_units(self, instance: Instance) -> float:
        """Syntax tree size; a query that does not parse ranks as hardest."""
        try:
            return float(count_syntactic_units(parse(instance.query)))
        except QuerySyntaxError as e:
            self.logger.warning(f"Instance {instance.id}: query does not parse ({e})")
            return math.inf

    def _max_input_similarity(self, instance: Instance) -> float:
        if self.provider is None:
            raise HarnessError("max_input_similarity needs an embedding provider")
        if not self.train:
            raise HarnessError("max_input_similarity needs a non-empty train split")
        if self._matrix is None:
            self._matrix = embedding_matrix(
                self.provider, [t.nl for t in self.train], [t.id for t in self.train]
            )
        vector = self.provider.embed(instance.nl, instance.id)
        return float(np.max(self._matrix @ vector))

    def _max_query_oqs(self, instance: Instance) -> float:
        if not self.train:
            raise HarnessError("max_query_oqs needs a non-empty train split")
        hyp = profile_query(instance.query)
        best = 0.0
        for candidate in self.train:
            ref = profile_query(candidate.query)
            if not ref.parsed:
                continue
            try:
                best = max(best, oqs_profiles(hyp, ref).oqs.value)
            except MetricError:
                continue
            if best >= 1.0:
                break
        return best


def score(
    instance: Instance,
    criterion: DifficultyCriterion,
    train: Sequence[Instance],
    provider: Optional[EmbeddingProvider] = None,
) -> float:
    return DifficultyScorer(train, provider).score(instance, criterion)


def partition(
    instances: Sequence[Instance],
    criterion: DifficultyCriterion,
    train: Sequence[Instance] = (),
    provider: Optional[EmbeddingProvider] = None,
    jobs: int = 1,
) -> Partition:
    """
    Split instances into easy/medium/hard thirds by ascending difficulty.

    Similarity criteria sort by descending similarity. Ties are broken by
    instance id.
    """
    scorer = DifficultyScorer(train, provider)

    def score_one(instance: Instance) -> float:
        return scorer.score(instance, criterion)

    if jobs <= 1:
        values = [score_one(i) for i in instances]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            values = list(pool.map(score_one, instances))

    scores = {i.id: v for i, v in zip(instances, values)}
    sign = -1.0 if criterion.is_similarity else 1.0
    ordered = sorted(scores, key=lambda i: (sign * scores[i], i))

    easy, medium, _ = partition_sizes(len(ordered))
    return Partition(
        criterion=criterion,
        easy=tuple(ordered[:easy]),
        medium=tuple(ordered[easy : easy + medium]),
        hard=tuple(ordered[easy + medium :]),
        scores=scores,
    )


def render_partition_tsv(result: Partition) -> str:
    """`id<TAB>criterion<TAB>score<TAB>bucket`, easy first."""
    lines = []
    for bucket, ids in result.buckets():
        for instance_id in ids:
            value = result.scores.get(instance_id, 0.0)
            lines.append(
                f"{instance_id}\t{result.criterion.value}\t{value:.6f}\t{bucket}"
            )
    return "".join(f"{line}\n" for line in lines)


def write_partition(result: Partition, path: Union[str, Path]) -> Path:
    return atomic_write_text(path, render_partition_tsv(result))
