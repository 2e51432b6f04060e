"""Train/evaluation overlap checks."""

import logging
import re
from dataclasses import dataclass
from typing import Callable, Dict, List

from oqleval.core.parser import try_parse
from oqleval.core.writer import normalize_template
from oqleval.corpus.dataset import Corpus, Instance
from oqleval.utils.constants import EVAL_SPLITS

logger = logging.getLogger(__name__)

VALIDATION_MODES = ("exact", "near")
_PUNCTUATION_RE = re.compile(r"[^\w\s]")


@dataclass(frozen=True, order=True)
class SplitViolation:
    """A train instance duplicating an evaluation instance on one side."""

    train_id: str
    eval_id: str
    side: str  # "input" or "query"


def normalize_input(text: str) -> str:
    """Lowercase, drop punctuation, collapse whitespace."""
    return " ".join(_PUNCTUATION_RE.sub(" ", text.lower()).split())


def normalize_query(text: str) -> str:
    return " ".join(text.split())


def query_template(text: str) -> str:
    """Template of a parsable query, else its whitespace-normalized text."""
    ast = try_parse(text)
    return normalize_template(ast) if ast is not None else normalize_query(text)


def validate_splits(corpus: Corpus, mode: str = "exact") -> List[SplitViolation]:
    """
    Report train/evaluation pairs that duplicate each other.

    Inputs are compared after `normalize_input`. Queries are compared by
    whitespace-normalized text in `exact` mode and by template in `near` mode.
    """
    if mode not in VALIDATION_MODES:
        raise ValueError(f"Unknown validation mode {mode!r}")
    query_key: Callable[[str], str] = (
        normalize_query if mode == "exact" else query_template
    )

    train = corpus.split("train")
    evaluation = [i for i in corpus if i.split in EVAL_SPLITS]
    if not train or not evaluation:
        return []

    violations: List[SplitViolation] = []
    sides: Dict[str, Callable[[Instance], str]] = {
        "input": lambda i: normalize_input(i.nl),
        "query": lambda i: query_key(i.query),
    }
    for side, key_of in sides.items():
        index: Dict[str, List[str]] = {}
        for instance in train:
            index.setdefault(key_of(instance), []).append(instance.id)
        for instance in evaluation:
            for train_id in index.get(key_of(instance), []):
                violations.append(SplitViolation(train_id, instance.id, side))

    violations.sort()
    if violations:
        logger.warning(f"Found {len(violations)} train/evaluation overlaps ({mode})")
    return violations
