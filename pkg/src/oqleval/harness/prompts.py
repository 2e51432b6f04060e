"""Few-shot generation and refinement prompt templates."""

from dataclasses import dataclass
from typing import List, Optional, Sequence

from oqleval.corpus.dataset import Instance

PREAMBLE = (
    "The OverpassQL language allows one to formulate questions to the "
    "OpenStreetMap database."
)
REFINE_GOAL = (
    "Your goal is, given an Input and a Hypothesis, to produce a improved "
    "version of the Hypothesis.\n"
    "If the Hypothesis is already good enough, do not try to improve it."
)
EXAMPLES_HEADER = "Here are a few examples:"
FEEDBACK_FRAMING = (
    "You will now get part of the Overpass result produced after using the "
    "generated Overpass Query Hypothesis. An error means that you should "
    "definitely improve on the Hypothesis. A normal result could mean that the "
    "Overpass Query is good enough, if the output fits to the asked query:"
)
REFINE_INSTRUCTION = "Improve on the Overpass Query or keep it if it is good enough:"


@dataclass(frozen=True)
class RefineShot:
    """A refinement example: input, a model hypothesis, and the reference."""

    nl: str
    hypothesis: str
    query: str


def _examples(blocks: List[str]) -> str:
    if not blocks:
        return ""
    return f"{EXAMPLES_HEADER}\n\n" + "".join(blocks)


def build_prompt(shots: Sequence[Instance], nl: str) -> str:
    """Few-shot prompt ending where the model continues with a query."""
    blocks = [f"Input:\n{s.nl}\n\nOverpass Query:\n{s.query}\n\n" for s in shots]
    return (
        f"{PREAMBLE}\n\n"
        + _examples(blocks)
        + f"Input:\n{nl}\n\nOverpass Query:\n"
    )


def build_refine_prompt(
    nl: str,
    hypothesis: str,
    feedback: Optional[str],
    shots: Sequence[RefineShot] = (),
) -> str:
    """
    Refinement prompt for one hypothesis.

    With `feedback=None` the execution feedback paragraph is left out.
    """
    if not hypothesis.strip():
        raise ValueError("hypothesis must not be empty")

    blocks = [
        f"Input:\n{s.nl}\n\n"
        f"Hypothesis:\n{s.hypothesis}\n\n"
        f"Overpass Query:\n{s.query}\n\n"
        for s in shots
    ]
    prompt = (
        f"{PREAMBLE}\n{REFINE_GOAL}\n\n"
        + _examples(blocks)
        + f"Here is an Input:\n{nl}\n\n"
        + "Here is the Overpass Query Hypothesis produced by a model:\n"
        + f"{hypothesis}\n\n"
    )
    if feedback is not None:
        prompt += f"{FEEDBACK_FRAMING}\n{feedback}\n\n"
    return prompt + f"{REFINE_INSTRUCTION}\n"
