"""Baseline few-shot generation and one round of self-refinement."""

import logging
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Set, TypeVar

from oqleval.corpus.dataset import Instance
from oqleval.errors import GenerationError, HarnessError
from oqleval.execution.executor import (
    ExecutionOutcome,
    ExecutionStatus,
    Executor,
    feedback_from_outcome,
)
from oqleval.harness.clients import GenerationClient
from oqleval.harness.prompts import RefineShot, build_prompt, build_refine_prompt
from oqleval.harness.shots import ShotSelector
from oqleval.utils.constants import (
    DEFAULT_MAX_LENGTH,
    DEFAULT_SAMPLE_SIZE,
    STOP_SEQUENCE,
)

REFINE_MODES = ("off", "errors_only", "all")

_FENCE_OPEN_RE = re.compile(r"^```[\w-]*[ \t]*\n?")
_FENCE_CLOSE_RE = re.compile(r"\n?```\s*$")

T = TypeVar("T")
R = TypeVar("R")


@dataclass(frozen=True)
class RefinePolicy:
    """Which instances get a refinement round, and whether feedback is shown."""

    mode: str = "off"
    with_feedback: bool = False

    def __post_init__(self) -> None:
        if self.mode not in REFINE_MODES:
            raise HarnessError(f"Unknown refine mode {self.mode!r}")


@dataclass
class GenerationResult:
    predictions: Dict[str, str] = field(default_factory=dict)
    failed: List[str] = field(default_factory=list)


@dataclass
class RefineResult:
    """Refined predictions plus which instances were refined or failed."""

    predictions: Dict[str, str] = field(default_factory=dict)
    refined: List[str] = field(default_factory=list)
    failed: List[str] = field(default_factory=list)
    baseline_status: Dict[str, ExecutionStatus] = field(default_factory=dict)


def clean_completion(text: str) -> str:
    """Strip surrounding whitespace and a wrapping code fence."""
    text = text.strip()
    if text.startswith("```"):
        text = _FENCE_OPEN_RE.sub("", text, count=1)
        text = _FENCE_CLOSE_RE.sub("", text)
    return text.strip()


def _map(function: Callable[[T], R], items: Sequence[T], jobs: int) -> List[R]:
    if jobs <= 1:
        return [function(item) for item in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(function, items))


def generate_predictions(
    instances: Sequence[Instance],
    selector: ShotSelector,
    client: GenerationClient,
    max_length: int = DEFAULT_MAX_LENGTH,
    jobs: int = 1,
) -> GenerationResult:
    """
    Few-shot baseline predictions.

    A failing client call leaves an empty prediction and is listed in `failed`.
    """
    logger = logging.getLogger(__name__)

    def generate(instance: Instance) -> Optional[str]:
        shots = selector.select(instance.nl, instance.id)
        prompt = build_prompt(shots, instance.nl)
        try:
            completion = client.generate(prompt, [STOP_SEQUENCE], max_length)
            return clean_completion(completion)
        except GenerationError as e:
            logger.warning(f"Generation failed for {instance.id}: {e}")
            return None

    result = GenerationResult()
    for instance, completion in zip(instances, _map(generate, instances, jobs)):
        if completion is None:
            result.failed.append(instance.id)
            completion = ""
        result.predictions[instance.id] = completion

    logger.info(
        f"Generated {len(result.predictions)} predictions ({len(result.failed)} failed)"
    )
    return result


class SelfRefiner:
    """
    Runs one refinement round over baseline predictions.

    Refinement shots are the generation shots. A shot's hypothesis comes from
    `shot_hypotheses` (train id -> model hypothesis); shots without one show
    their reference query as a hypothesis that needs no change.
    """

    def __init__(
        self,
        policy: RefinePolicy,
        client: GenerationClient,
        executor: Optional[Executor],
        selector: ShotSelector,
        shot_hypotheses: Optional[Mapping[str, str]] = None,
        sample_size: int = DEFAULT_SAMPLE_SIZE,
        max_length: int = DEFAULT_MAX_LENGTH,
    ) -> None:
        executes = policy.mode == "errors_only" or policy.with_feedback
        if executes and policy.mode != "off":
            if executor is None:
                raise HarnessError(f"Refine mode {policy.mode!r} needs an executor")
        self.policy = policy
        self.client = client
        self.executor = executor
        self.selector = selector
        self.shot_hypotheses = dict(shot_hypotheses or {})
        self.sample_size = sample_size
        self.max_length = max_length
        self.logger = logging.getLogger(__name__)

    def refine_shots(self, nl: str, key: Optional[str] = None) -> List[RefineShot]:
        return [
            RefineShot(
                nl=s.nl,
                hypothesis=self.shot_hypotheses.get(s.id, s.query),
                query=s.query,
            )
            for s in self.selector.select(nl, key)
        ]

    def _needs_execution(self) -> bool:
        return self.policy.mode == "errors_only" or self.policy.with_feedback

    def refine_one(
        self, instance: Instance, hypothesis: str, outcome: Optional[ExecutionOutcome]
    ) -> str:
        """
        Refined query for one instance.

        Raises:
            GenerationError: the client failed
        """
        feedback = None
        if self.policy.with_feedback and outcome is not None:
            feedback = feedback_from_outcome(outcome, self.sample_size)
        prompt = build_refine_prompt(
            instance.nl,
            hypothesis,
            feedback,
            self.refine_shots(instance.nl, instance.id),
        )
        completion = self.client.generate(prompt, [STOP_SEQUENCE], self.max_length)
        return clean_completion(completion)

    def run(
        self,
        instances: Sequence[Instance],
        baseline: Mapping[str, str],
        jobs: int = 1,
    ) -> RefineResult:
        result = RefineResult(
            predictions={i.id: baseline.get(i.id, "") for i in instances}
        )
        if self.policy.mode == "off":
            return result

        outcomes: Dict[str, ExecutionOutcome] = {}
        if self._needs_execution():
            assert self.executor is not None
            texts = [result.predictions[i.id] for i in instances]
            executed = self.executor.execute_many(texts, jobs)
            outcomes = {i.id: o for i, o in zip(instances, executed)}
            result.baseline_status = {k: o.status for k, o in outcomes.items()}

        if self.policy.mode == "errors_only":
            targets = [
                i
                for i in instances
                if outcomes[i.id].status is ExecutionStatus.SYNTAX_ERROR
            ]
        else:
            targets = list(instances)

        skipped: Set[str] = {
            i.id for i in targets if not result.predictions[i.id].strip()
        }
        for instance_id in sorted(skipped):
            self.logger.warning(f"Not refining {instance_id}: empty hypothesis")
        targets = [i for i in targets if i.id not in skipped]

        def refine(instance: Instance) -> Optional[str]:
            try:
                return self.refine_one(
                    instance, result.predictions[instance.id], outcomes.get(instance.id)
                )
            except GenerationError as e:
                self.logger.warning(f"Refinement failed for {instance.id}: {e}")
                return None

        for instance, refined in zip(targets, _map(refine, targets, jobs)):
            if refined is None:
                result.failed.append(instance.id)
                continue
            result.predictions[instance.id] = refined
            result.refined.append(instance.id)

        self.logger.info(
            f"Refined {len(result.refined)} of {len(targets)} targeted instances "
            f"({self.policy.mode}, "
            f"feedback={'on' if self.policy.with_feedback else 'off'})"
        )
        return result


def self_refine(
    instances: Sequence[Instance],
    baseline: Mapping[str, str],
    policy: RefinePolicy,
    client: GenerationClient,
    executor: Optional[Executor],
    selector: ShotSelector,
    shot_hypotheses: Optional[Mapping[str, str]] = None,
    max_length: int = DEFAULT_MAX_LENGTH,
    jobs: int = 1,
) -> RefineResult:
    """One refinement round; instances not targeted keep their baseline text."""
    sample_size = executor.cfg.sample_size if executor else DEFAULT_SAMPLE_SIZE
    refiner = SelfRefiner(
        policy, client, executor, selector, shot_hypotheses, sample_size, max_length
    )
    return refiner.run(instances, baseline, jobs)
