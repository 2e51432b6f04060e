"""Extra training instances from query comments."""

import logging
from typing import List

from oqleval.core.analysis import extract_comments
from oqleval.corpus.dataset import Corpus, Instance
from oqleval.utils.constants import SYNTHETIC_ID_SUFFIX

logger = logging.getLogger(__name__)


def comment_instances(corpus: Corpus) -> List[Instance]:
    """
    One synthetic train instance per commented train query.

    The query's comments, joined by a space, become the input; the query
    without comments becomes the reference. Blank comments are ignored.
    """
    created: List[Instance] = []
    for instance in corpus.split("train"):
        extracted = extract_comments(instance.query)
        texts = [text for text, _ in extracted if text.strip()]
        if not texts:
            continue
        stripped = extracted[0][1]
        if not stripped:
            continue
        created.append(
            Instance(
                id=f"{instance.id}{SYNTHETIC_ID_SUFFIX}",
                nl=" ".join(texts),
                query=stripped,
                split="train",
                synthetic=True,
            )
        )

    logger.info(f"Derived {len(created)} instances from query comments")
    return created
