"""In-context example selection."""

import logging
import random
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from oqleval.corpus.dataset import Instance
from oqleval.errors import HarnessError
from oqleval.harness.embeddings import EmbeddingProvider, embedding_matrix
from oqleval.metrics.scores import bleu
from oqleval.utils.constants import DEFAULT_SHOT_COUNT

SHOT_KINDS = ("random", "retrieval_bleu", "retrieval_embedding")


@dataclass(frozen=True)
class ShotStrategy:
    """
    How shots are chosen.

    `most_similar_last` puts the most similar shot next to the current input;
    otherwise the prompt lists shots most similar first.
    """

    kind: str = "retrieval_embedding"
    k: int = DEFAULT_SHOT_COUNT
    seed: int = 0
    most_similar_last: bool = True

    def __post_init__(self) -> None:
        if self.kind not in SHOT_KINDS:
            raise HarnessError(f"Unknown shot strategy {self.kind!r}")
        if self.k < 0:
            raise HarnessError("Shot count must not be negative")


class ShotSelector:
    """
    Picks shots for inputs against a fixed training split.

    Train embeddings are computed once, on first use.
    """

    def __init__(
        self,
        train: Sequence[Instance],
        strategy: ShotStrategy,
        provider: Optional[EmbeddingProvider] = None,
    ) -> None:
        self.train = list(train)
        self.strategy = strategy
        self.provider = provider
        self.logger = logging.getLogger(__name__)
        self._matrix: Optional[np.ndarray] = None

        if strategy.k > len(self.train):
            raise HarnessError(
                f"Cannot select {strategy.k} shots "
                f"from {len(self.train)} train instances"
            )
        if strategy.kind == "retrieval_embedding" and provider is None:
            raise HarnessError("retrieval_embedding needs an embedding provider")

    def similarities(self, nl: str, key: Optional[str] = None) -> List[float]:
        """
        Similarity of `nl` to every train input, in train order.

        `key` is the instance id, used by providers keyed by id.
        """
        if self.strategy.kind == "retrieval_bleu":
            return [bleu(instance.nl, nl).value for instance in self.train]

        assert self.provider is not None
        if self._matrix is None:
            self._matrix = embedding_matrix(
                self.provider,
                [i.nl for i in self.train],
                [i.id for i in self.train],
            )
        scores = self._matrix @ self.provider.embed(nl, key)
        return [float(s) for s in scores]

    def select(self, nl: str, key: Optional[str] = None) -> List[Instance]:
        """
        Shots in prompt order.

        Retrieval takes the top-k by similarity (ties keep train order) and
        orders them least similar first unless `most_similar_last` is off.
        Random sampling is seeded by the strategy seed and the input.
        """
        k = self.strategy.k
        if k == 0:
            return []

        if self.strategy.kind == "random":
            rng = random.Random(f"{self.strategy.seed}\n{nl}")
            return rng.sample(self.train, k)

        scores = self.similarities(nl, key)
        top = sorted(range(len(self.train)), key=lambda i: (-scores[i], i))[:k]
        if self.strategy.most_similar_last:
            top.reverse()
        return [self.train[i] for i in top]


def select_shots(
    nl: str,
    train: Sequence[Instance],
    strategy: ShotStrategy,
    provider: Optional[EmbeddingProvider] = None,
    key: Optional[str] = None,
) -> List[Instance]:
    return ShotSelector(train, strategy, provider).select(nl, key)
