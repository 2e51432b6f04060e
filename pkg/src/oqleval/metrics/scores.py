"""Query-level similarity metrics: chrF, BLEU, EM, KVS, TreeS and OQS."""

import logging
import unicodedata
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, List, Optional, Tuple

from sacrebleu.metrics import BLEU, CHRF

from oqleval.core.analysis import KvSet, extract_kv
from oqleval.core.nodes import QueryAst
from oqleval.core.parser import try_parse
from oqleval.core.syntax_tree import SyntaxTree, matching_subtrees, to_syntax_tree
from oqleval.errors import MetricError
from oqleval.utils.constants import BLEU_MAX_ORDER, CHRF_BETA, CHRF_CHAR_ORDER

logger = logging.getLogger(__name__)

FLAG_KVS_BOTH_EMPTY = "kvs-both-empty"
FLAG_KVS_ONE_EMPTY = "kvs-one-empty"
FLAG_HYP_UNPARSED = "hyp-unparsed"


@dataclass(frozen=True)
class Score:
    """A metric value in [0, 1]."""

    value: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.value <= 1.0:
            raise MetricError(f"Score out of range: {self.value}")

    @classmethod
    def clamped(cls, value: float) -> "Score":
        """Absorb floating point drift just outside [0, 1]."""
        return cls(min(1.0, max(0.0, value)))

    @property
    def percent(self) -> float:
        return 100.0 * self.value

    @property
    def display(self) -> float:
        return round(100.0 * self.value, 1)


@lru_cache(maxsize=None)
def _chrf_scorer() -> CHRF:
    return CHRF(
        char_order=CHRF_CHAR_ORDER,
        word_order=0,
        beta=CHRF_BETA,
        whitespace=True,
        eps_smoothing=False,
    )


@lru_cache(maxsize=None)
def _bleu_scorer() -> BLEU:
    return BLEU(
        tokenize="none",
        smooth_method="add-k",
        smooth_value=1,
        max_ngram_order=BLEU_MAX_ORDER,
        effective_order=True,
    )


def chrf(hyp: str, ref: str) -> Score:
    """Character 6-gram F-score with beta 2; whitespace counts as characters."""
    if hyp == ref:
        return Score(1.0)
    if not hyp or not ref:
        return Score(0.0)
    result = _chrf_scorer().sentence_score(hyp, [ref])
    return Score.clamped(result.score / 100.0)


def bleu(hyp: str, ref: str) -> Score:
    """Sentence BLEU over whitespace tokens, add-one smoothing above unigrams."""
    if hyp == ref:
        return Score(1.0)
    if not hyp.split() or not ref.split():
        return Score(0.0)
    result = _bleu_scorer().sentence_score(hyp, [ref])
    return Score.clamped(result.score / 100.0)


def em(hyp: str, ref: str) -> bool:
    """Exact match after NFC normalization and trimming outer whitespace."""
    return _normalize(hyp) == _normalize(ref)


def _normalize(text: str) -> str:
    return unicodedata.normalize("NFC", text).strip()


def kvs(a: KvSet, b: KvSet) -> Score:
    """Shared keys, values and pairs over the larger inventory."""
    members_a = a.members()
    members_b = b.members()
    if not members_a and not members_b:
        logger.debug("KVS of two empty inventories scored 1.0")
        return Score(1.0)
    if not members_a or not members_b:
        logger.debug("KVS with one empty inventory scored 0.0")
        return Score(0.0)
    shared = len(members_a & members_b)
    return Score(shared / max(len(members_a), len(members_b)))


def trees(a: SyntaxTree, b: SyntaxTree) -> Score:
    """Matching subtrees over the larger subtree count."""
    return Score(matching_subtrees(a, b) / max(a.size(), b.size()))


@dataclass(frozen=True)
class QueryProfile:
    """Parse-derived inputs of the structural metrics for one query text."""

    text: str
    ast: Optional[QueryAst]
    kv: Optional[KvSet]
    tree: Optional[SyntaxTree]

    @property
    def parsed(self) -> bool:
        return self.ast is not None


@lru_cache(maxsize=65536)
def profile_query(text: str) -> QueryProfile:
    """Parse once and keep the KvSet and tree; cached by text."""
    ast = try_parse(text) if text.strip() else None
    if ast is None:
        return QueryProfile(text=text, ast=None, kv=None, tree=None)
    return QueryProfile(
        text=text, ast=ast, kv=extract_kv(ast), tree=to_syntax_tree(ast)
    )


@dataclass(frozen=True)
class OqsBreakdown:
    """OQS with its three components."""

    chrf: Score
    kvs: Score
    trees: Score
    oqs: Score
    hyp_parsed: bool = True
    flags: Tuple[str, ...] = ()


def oqs(hyp: str, ref: str) -> OqsBreakdown:
    """
    Mean of chrF, KVS and TreeS.

    An unparsable hypothesis keeps its chrF and scores 0 on the structural
    components.

    Raises:
        MetricError: the reference does not parse
    """
    return oqs_profiles(profile_query(hyp), profile_query(ref))


def oqs_profiles(hyp: QueryProfile, ref: QueryProfile) -> OqsBreakdown:
    if not ref.parsed:
        raise MetricError(f"Reference query does not parse: {ref.text[:80]!r}")
    assert ref.kv is not None and ref.tree is not None

    chrf_score = chrf(hyp.text, ref.text)
    flags: List[str] = []

    if not hyp.parsed:
        flags.append(FLAG_HYP_UNPARSED)
        kvs_score = Score(0.0)
        trees_score = Score(0.0)
    else:
        assert hyp.kv is not None and hyp.tree is not None
        if hyp.kv.is_empty() and ref.kv.is_empty():
            flags.append(FLAG_KVS_BOTH_EMPTY)
        elif hyp.kv.is_empty() or ref.kv.is_empty():
            flags.append(FLAG_KVS_ONE_EMPTY)
        kvs_score = kvs(hyp.kv, ref.kv)
        trees_score = trees(hyp.tree, ref.tree)

    mean = (chrf_score.value + kvs_score.value + trees_score.value) / 3.0
    return OqsBreakdown(
        chrf=chrf_score,
        kvs=kvs_score,
        trees=trees_score,
        oqs=Score.clamped(mean),
        hyp_parsed=hyp.parsed,
        flags=tuple(flags),
    )


def oqs_many(pairs: Iterable[Tuple[str, str]]) -> List[OqsBreakdown]:
    """OQS for many (hyp, ref) pairs; repeated texts are parsed once."""
    return [oqs_profiles(profile_query(h), profile_query(r)) for h, r in pairs]
