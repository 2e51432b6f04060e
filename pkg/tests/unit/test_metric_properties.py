"""Seeded property checks of the metrics against brute-force oracles."""

import math
import random
from collections import Counter

import pytest

from oqleval.core.analysis import extract_kv
from oqleval.core.nodes import ByTag, Matcher, iter_filters
from oqleval.core.parser import parse
from oqleval.core.syntax_tree import to_syntax_tree
from oqleval.metrics.elements import ElementRef, ex, ex_soft
from oqleval.metrics.scores import bleu, chrf, kvs, oqs, trees

SEED = 20240612
PAIRS = 2000

TAGS = [
    ("amenity", "atm"),
    ("amenity", "bank"),
    ("shop", "bakery"),
    ("natural", "peak"),
    ("name", "Troms"),
]
KINDS = ["node", "way", "rel", "nwr"]
OUTS = ["out;", "out geom;", "out center;", ">;", "out skel qt;"]


def random_statement(rng):
    kind = rng.choice(KINDS)
    filters = []
    for _ in range(rng.randint(0, 3)):
        key, value = rng.choice(TAGS)
        form = rng.randint(0, 3)
        if form == 0:
            filters.append(f'["{key}"]')
        elif form == 1:
            filters.append(f'["{key}"="{value}"]')
        elif form == 2:
            filters.append(f'["{key}"~"{value}"]')
        else:
            filters.append(f'["{key}"!="{value}"]')
    extra = rng.choice(["", "({{bbox}})", "(area.a)", "(1,2,3,4)", "(around:50)"])
    return f"{kind}{''.join(filters)}{extra};"


def random_query(rng):
    statements = [random_statement(rng) for _ in range(rng.randint(1, 3))]
    if rng.random() < 0.3:
        statements = ["(" + "".join(statements) + ");"]
    header = rng.choice(["", "[out:json];", "[out:json][timeout:25];"])
    return header + "".join(statements) + rng.choice(OUTS)


def random_text(rng):
    alphabet = "ab;[]"
    inner = "".join(rng.choice(alphabet + " ") for _ in range(rng.randint(0, 9)))
    return inner.strip()


def chrf_oracle(hyp, ref, order=6, beta=2.0):
    if hyp == ref:
        return 1.0
    precisions, recalls = [], []
    for n in range(1, order + 1):
        h = Counter(hyp[i : i + n] for i in range(len(hyp) - n + 1))
        r = Counter(ref[i : i + n] for i in range(len(ref) - n + 1))
        if not h or not r:
            continue
        match = sum((h & r).values())
        precisions.append(match / sum(h.values()))
        recalls.append(match / sum(r.values()))
    if not precisions:
        return 0.0
    p = sum(precisions) / len(precisions)
    r = sum(recalls) / len(recalls)
    if p + r == 0:
        return 0.0
    factor = beta**2
    return (1 + factor) * p * r / (factor * p + r)


def bleu_oracle(hyp, ref, order=4):
    h, r = hyp.split(), ref.split()
    if hyp == ref:
        return 1.0
    if not h or not r:
        return 0.0
    log_sum = 0.0
    for n in range(1, order + 1):
        hg = Counter(tuple(h[i : i + n]) for i in range(len(h) - n + 1))
        rg = Counter(tuple(r[i : i + n]) for i in range(len(r) - n + 1))
        correct = sum((hg & rg).values())
        total = sum(hg.values())
        if n > 1:
            correct += 1
            total += 1
        if correct == 0:
            return 0.0
        log_sum += math.log(correct / total)
    brevity = 1.0 if len(h) >= len(r) else math.exp(1 - len(r) / len(h))
    return brevity * math.exp(log_sum / order)


def kvs_oracle(hyp_text, ref_text):
    def members(text):
        found = set()
        for item in iter_filters(parse(text)):
            if not isinstance(item, ByTag):
                continue
            found.add(("key", item.tag.key))
            if item.tag.matcher not in (Matcher.EXISTS, Matcher.NOT_EXISTS):
                found.add(("pair", item.tag.key, item.tag.value))
                found.add(("value", item.tag.value))
        return found

    a, b = members(hyp_text), members(ref_text)
    if not a and not b:
        return 1.0
    if not a or not b:
        return 0.0
    return len(a & b) / max(len(a), len(b))


def trees_oracle(a, b):
    remaining = list(b.iter_nodes())
    matched = 0
    for node in a.iter_nodes():
        for i, candidate in enumerate(remaining):
            if candidate == node:
                matched += 1
                del remaining[i]
                break
    return matched / max(a.size(), b.size())


@pytest.fixture(scope="module")
def query_pairs():
    rng = random.Random(SEED)
    return [(random_query(rng), random_query(rng)) for _ in range(PAIRS)]


def test_kvs_matches_oracle(query_pairs):
    """Test KVS against set arithmetic on the raw tag filters."""
    for hyp, ref in query_pairs:
        expected = kvs_oracle(hyp, ref)
        actual = kvs(extract_kv(parse(hyp)), extract_kv(parse(ref))).value
        assert actual == pytest.approx(expected), (hyp, ref)


def test_trees_matches_oracle(query_pairs):
    """Test TreeS against greedy structural matching."""
    for hyp, ref in query_pairs:
        a, b = to_syntax_tree(parse(hyp)), to_syntax_tree(parse(ref))
        assert trees(a, b).value == pytest.approx(trees_oracle(a, b)), (hyp, ref)


def test_structural_metrics_symmetric(query_pairs):
    """Test that KVS and TreeS do not depend on argument order."""
    for hyp, ref in query_pairs:
        kv_h, kv_r = extract_kv(parse(hyp)), extract_kv(parse(ref))
        t_h, t_r = to_syntax_tree(parse(hyp)), to_syntax_tree(parse(ref))
        assert kvs(kv_h, kv_r) == kvs(kv_r, kv_h)
        assert trees(t_h, t_r) == trees(t_r, t_h)


def test_oqs_bounds_and_identity(query_pairs):
    """Test that OQS stays in range and is 1.0 on identical queries."""
    for hyp, ref in query_pairs:
        value = oqs(hyp, ref).oqs.value
        assert 0.0 <= value <= 1.0
        assert oqs(ref, ref).oqs.value == 1.0


def test_chrf_matches_oracle():
    """Test chrF on random short strings against a direct computation."""
    rng = random.Random(SEED + 1)
    for _ in range(PAIRS):
        hyp, ref = random_text(rng), random_text(rng)
        assert chrf(hyp, ref).value == pytest.approx(
            chrf_oracle(hyp, ref), abs=1e-9
        ), (hyp, ref)


def test_bleu_matches_oracle():
    """Test BLEU on random token sequences against a direct computation."""
    rng = random.Random(SEED + 2)
    words = ["all", "peaks", "in", "near", "Troms", "cafes"]
    for _ in range(PAIRS):
        hyp = " ".join(rng.choice(words) for _ in range(rng.randint(3, 8)))
        ref = " ".join(rng.choice(words) for _ in range(rng.randint(3, 8)))
        assert bleu(hyp, ref).value == pytest.approx(
            bleu_oracle(hyp, ref), abs=1e-9
        ), (hyp, ref)


def test_ex_soft_properties():
    """Test EX_soft bounds and its agreement with EX."""
    rng = random.Random(SEED + 3)
    for _ in range(PAIRS):
        a = {ElementRef("node", rng.randint(0, 6)) for _ in range(rng.randint(0, 4))}
        b = {ElementRef("node", rng.randint(0, 6)) for _ in range(rng.randint(0, 4))}
        soft = ex_soft(a, b).value
        assert 0.0 <= soft <= 1.0
        assert soft == ex_soft(b, a).value
        assert ex(a, b) == (soft == 1.0)
