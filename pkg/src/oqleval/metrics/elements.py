"""Execution-level metrics over returned OSM element sets."""

import logging
from dataclasses import dataclass
from typing import AbstractSet, Iterable, Optional

from oqleval.metrics.scores import Score

logger = logging.getLogger(__name__)

OSM_KINDS = frozenset({"node", "way", "relation", "area"})
DERIVED = "derived"


@dataclass(frozen=True, order=True)
class ElementRef:
    """Identity of one returned element: (kind, id), or a content hash when derived."""

    kind: str
    id: Optional[int] = None
    content_hash: Optional[str] = None

    def __post_init__(self) -> None:
        if self.kind == DERIVED:
            if not self.content_hash:
                raise ValueError("derived elements are identified by content hash")
            if self.id is not None:
                raise ValueError("derived elements carry no id")
        elif self.kind in OSM_KINDS:
            if self.id is None or self.id < 0:
                raise ValueError(f"{self.kind} requires a non-negative id")
            if self.content_hash is not None:
                raise ValueError(f"{self.kind} is identified by id only")
        else:
            raise ValueError(f"Unknown element kind: {self.kind}")

    @classmethod
    def derived(cls, content_hash: str) -> "ElementRef":
        return cls(kind=DERIVED, content_hash=content_hash)

    def __str__(self) -> str:
        if self.kind == DERIVED:
            return f"derived:{self.content_hash}"
        return f"{self.kind}/{self.id}"


ElementSet = AbstractSet[ElementRef]


def element_set(refs: Iterable[ElementRef]) -> frozenset:
    """Collapse duplicates."""
    return frozenset(refs)


def ex(generated: ElementSet, reference: ElementSet) -> bool:
    """Exact match of the two returned element sets."""
    return set(generated) == set(reference)


def ex_soft(generated: ElementSet, reference: ElementSet) -> Score:
    """Shared elements over the larger set; two empty sets score 1.0."""
    if not generated and not reference:
        logger.debug("EX_soft of two empty element sets scored 1.0")
        return Score(1.0)
    shared = len(set(generated) & set(reference))
    return Score(shared / max(len(generated), len(reference)))
