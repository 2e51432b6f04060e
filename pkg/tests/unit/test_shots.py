"""Tests for in-context example selection."""

import pytest

from oqleval.corpus.dataset import Instance
from oqleval.errors import HarnessError
from oqleval.harness.embeddings import (
    HashingEmbeddingProvider,
    PrecomputedEmbeddingProvider,
)
from oqleval.harness.shots import ShotSelector, ShotStrategy, select_shots

TRAIN = [
    Instance("a", "cafes in Oslo", 'node["amenity"="cafe"];out;', "train"),
    Instance("b", "bars in Berlin", 'node["amenity"="bar"];out;', "train"),
    Instance("c", "all cafes in Oslo", 'nwr["amenity"="cafe"];out;', "train"),
]


class CountingProvider:
    """Hashing embeddings that count how often they are asked."""

    def __init__(self):
        self.inner = HashingEmbeddingProvider()
        self.calls = 0

    def embed(self, text, key=None):
        self.calls += 1
        return self.inner.embed(text, key)


def ids(instances):
    return [i.id for i in instances]


def test_bleu_retrieval_orders_most_similar_last():
    """Test that the closest shot sits next to the input."""
    strategy = ShotStrategy(kind="retrieval_bleu", k=3)

    assert ids(select_shots("cafes in Oslo", TRAIN, strategy)) == ["b", "c", "a"]


def test_bleu_retrieval_most_similar_first():
    """Test the reversed prompt order."""
    strategy = ShotStrategy(kind="retrieval_bleu", k=2, most_similar_last=False)

    assert ids(select_shots("cafes in Oslo", TRAIN, strategy)) == ["a", "c"]


def test_embedding_retrieval():
    """Test nearest neighbours by embedding similarity."""
    strategy = ShotStrategy(kind="retrieval_embedding", k=1)
    shots = select_shots("cafes in Oslo", TRAIN, strategy, HashingEmbeddingProvider())

    assert ids(shots) == ["a"]


def test_precomputed_embeddings_by_instance_id(tmp_path):
    """Test that inputs are looked up by their instance id."""
    path = tmp_path / "vectors.tsv"
    path.write_text("a\t1,0\nb\t0,1\nc\t0.8,0.6\nq1\t0.6,0.8\n", encoding="utf-8")
    provider = PrecomputedEmbeddingProvider(path)
    strategy = ShotStrategy(kind="retrieval_embedding", k=1)
    selector = ShotSelector(TRAIN, strategy, provider)

    assert ids(selector.select("cafes near Oslo", "q1")) == ["c"]
    assert ids(select_shots("cafes near Oslo", TRAIN, strategy, provider, "q1")) == [
        "c"
    ]
    with pytest.raises(HarnessError):
        selector.select("cafes near Oslo")


def test_train_embeddings_computed_once():
    """Test that the train matrix is reused across inputs."""
    provider = CountingProvider()
    selector = ShotSelector(TRAIN, ShotStrategy(k=2), provider)

    selector.select("cafes in Oslo")
    selector.select("bars in Berlin")

    assert provider.calls == len(TRAIN) + 2


def test_similarities_follow_train_order():
    """Test the similarity vector layout."""
    selector = ShotSelector(TRAIN, ShotStrategy(k=1), HashingEmbeddingProvider())
    scores = selector.similarities("cafes in Oslo")

    assert len(scores) == 3
    assert scores[0] == pytest.approx(1.0)
    assert scores[0] > scores[2] > scores[1]


def test_random_shots_are_deterministic():
    """Test that random sampling depends only on seed and input."""
    strategy = ShotStrategy(kind="random", k=2, seed=7)
    first = select_shots("cafes in Oslo", TRAIN, strategy)

    assert first == select_shots("cafes in Oslo", TRAIN, strategy)
    assert len(set(ids(first))) == 2
    assert set(ids(first)) <= {"a", "b", "c"}


def test_zero_shots():
    """Test that k=0 selects nothing."""
    for kind in ("random", "retrieval_bleu"):
        assert select_shots("x", TRAIN, ShotStrategy(kind=kind, k=0)) == []


def test_too_many_shots():
    """Test that k beyond the train size is rejected."""
    with pytest.raises(HarnessError):
        ShotSelector(TRAIN, ShotStrategy(kind="random", k=4))


def test_strategy_validation():
    """Test unknown kinds and negative counts."""
    with pytest.raises(HarnessError):
        ShotStrategy(kind="nearest")
    with pytest.raises(HarnessError):
        ShotStrategy(kind="random", k=-1)


def test_embedding_retrieval_needs_provider():
    """Test the missing provider error."""
    with pytest.raises(HarnessError):
        ShotSelector(TRAIN, ShotStrategy(kind="retrieval_embedding", k=1))
