import random

import pytest

from rbe.corpus import Corpus, Document
from rbe.rules import Rule, Ruleset, parse_expr


@pytest.fixture
def four_doc_corpus():
    return Corpus([
        Document(id="d1", text="i hate women", label=1, split="train"),
        Document(id="d2", text="the weather is lovely", label=0, split="train"),
        Document(id="d3", text="i hate and loathe immigrants", label=1, split="train"),
        Document(id="d4", text="we welcome immigrants", label=0, split="train"),
    ])


@pytest.fixture
def two_rule_set():
    return Ruleset([
        Rule("A", parse_expr('contains("hate")')),
        Rule("B", parse_expr('contains("loathe")')),
    ])


def random_expr(rng: random.Random, depth: int = 0):
    """Random normalized AST over a small word pool, for round-trip checks."""
    from rbe.rules import And, Contains, Not, Or, Regex, normalize_expr

    pool = ["hate", "loathe", "women", "trash", "kind", "words", "people"]
    roll = rng.random()
    if depth >= 3 or roll < 0.45:
        n = rng.choice([1, 2, 3])
        return Contains(tuple(rng.sample(pool, n)))
    if roll < 0.55:
        return Regex(rng.choice([r"hate\w*", r"tra+sh", r"\bwomen\b"]))
    if roll < 0.70:
        return normalize_expr(Not(random_expr(rng, depth + 1)))
    cls = And if roll < 0.85 else Or
    kids = tuple(random_expr(rng, depth + 1) for _ in range(rng.choice([2, 3])))
    return normalize_expr(cls(kids))


def random_text(rng: random.Random) -> str:
    pool = ["hate", "loathe", "women", "trash", "kind", "words", "people",
            "the", "a", "very", "Trash", "HATE"]
    return " ".join(rng.choice(pool) for _ in range(rng.randint(0, 12)))
