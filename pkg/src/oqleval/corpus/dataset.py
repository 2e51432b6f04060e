"""Corpus instances and the JSONL dataset format."""

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

from oqleval.errors import CorpusError
from oqleval.utils.constants import SPLITS
from oqleval.utils.file_utils import atomic_write_lines

logger = logging.getLogger(__name__)

REQUIRED_FIELDS = ("id", "nl", "query", "split")


@dataclass(frozen=True)
class Instance:
    """A natural-language input with its reference query."""

    id: str
    nl: str
    query: str
    split: str
    synthetic: bool = False

    def __post_init__(self) -> None:
        if not self.nl.strip():
            raise ValueError("nl must not be empty")
        if not self.query.strip():
            raise ValueError("query must not be empty")
        if self.split not in SPLITS:
            raise ValueError(f"unknown split {self.split!r}")

    def to_record(self) -> Dict[str, Any]:
        record: Dict[str, Any] = {
            "id": self.id,
            "nl": self.nl,
            "query": self.query,
            "split": self.split,
        }
        if self.synthetic:
            record["synthetic"] = True
        return record


class Corpus:
    """Ordered, id-indexed collection of instances."""

    def __init__(self, instances: Sequence[Instance] = ()) -> None:
        self.instances: Tuple[Instance, ...] = tuple(instances)
        self._by_id: Dict[str, Instance] = {}
        duplicates = []
        for instance in self.instances:
            if instance.id in self._by_id:
                duplicates.append(instance.id)
            self._by_id[instance.id] = instance
        if duplicates:
            raise CorpusError([(0, f"duplicate id {i!r}") for i in duplicates])

    def __len__(self) -> int:
        return len(self.instances)

    def __iter__(self) -> Iterator[Instance]:
        return iter(self.instances)

    def __contains__(self, instance_id: object) -> bool:
        return instance_id in self._by_id

    def get(self, instance_id: str) -> Optional[Instance]:
        return self._by_id.get(instance_id)

    def split(self, name: str) -> List[Instance]:
        return [i for i in self.instances if i.split == name]

    def split_sizes(self) -> Dict[str, int]:
        sizes = {name: 0 for name in SPLITS}
        for instance in self.instances:
            sizes[instance.split] += 1
        return sizes

    def extended(self, extra: Sequence[Instance]) -> "Corpus":
        return Corpus(self.instances + tuple(extra))


def load(
    path: Union[str, Path], expected_sizes: Optional[Mapping[str, int]] = None
) -> Corpus:
    """
    Read a corpus JSONL file (`id`, `nl`, `query`, `split` per line).

    Raises:
        CorpusError: listing every malformed line, duplicate id and split size
            mismatch
        FileNotFoundError: the file does not exist
    """
    path = Path(path)
    problems: List[Tuple[int, str]] = []
    instances: List[Instance] = []
    seen: Dict[str, int] = {}

    with open(path, "r", encoding="utf-8") as f:
        for line_no, line in enumerate(f, 1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as e:
                problems.append((line_no, f"invalid JSON: {e.msg}"))
                continue
            if not isinstance(record, dict):
                problems.append((line_no, "record is not a JSON object"))
                continue

            missing = [k for k in REQUIRED_FIELDS if k not in record]
            if missing:
                problems.append((line_no, f"missing field(s): {', '.join(missing)}"))
                continue

            instance_id = str(record["id"])
            if instance_id in seen:
                first = seen[instance_id]
                problems.append(
                    (line_no, f"duplicate id {instance_id!r} (first on line {first})")
                )
                continue

            try:
                instance = Instance(
                    id=instance_id,
                    nl=str(record["nl"]),
                    query=str(record["query"]),
                    split=str(record["split"]),
                    synthetic=bool(record.get("synthetic", False)),
                )
            except ValueError as e:
                problems.append((line_no, str(e)))
                continue

            seen[instance_id] = line_no
            instances.append(instance)

    corpus = Corpus(instances)
    if expected_sizes:
        actual = corpus.split_sizes()
        for split, expected in expected_sizes.items():
            if actual.get(split, 0) != expected:
                found = actual.get(split, 0)
                problems.append(
                    (0, f"split {split!r} has {found} instances, expected {expected}")
                )

    if problems:
        raise CorpusError(problems, str(path))

    logger.info(f"Loaded {len(corpus)} instances from {path}")
    return corpus


def save(corpus: Corpus, path: Union[str, Path]) -> Path:
    """Write a corpus as JSONL, atomically."""
    lines = (json.dumps(i.to_record(), ensure_ascii=False) for i in corpus)
    return atomic_write_lines(path, lines)


def load_predictions(path: Union[str, Path]) -> Dict[str, str]:
    """
    Read predictions JSONL (`id`, `query` per line) into an id -> query map.

    Raises:
        CorpusError: malformed lines or duplicate ids
    """
    predictions: Dict[str, str] = {}
    problems: List[Tuple[int, str]] = []
    with open(path, "r", encoding="utf-8") as f:
        for line_no, line in enumerate(f, 1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as e:
                problems.append((line_no, f"invalid JSON: {e.msg}"))
                continue
            if not isinstance(record, dict) or not {"id", "query"} <= record.keys():
                problems.append((line_no, "prediction needs `id` and `query`"))
                continue
            instance_id = str(record["id"])
            if instance_id in predictions:
                problems.append((line_no, f"duplicate id {instance_id!r}"))
                continue
            predictions[instance_id] = str(record["query"])

    if problems:
        raise CorpusError(problems, str(path))
    return predictions


def save_predictions(predictions: Mapping[str, str], path: Union[str, Path]) -> Path:
    lines = (
        json.dumps({"id": i, "query": q}, ensure_ascii=False)
        for i, q in predictions.items()
    )
    return atomic_write_lines(path, lines)
