import random

import pytest

from rbe.corpus import Corpus, Document
from rbe.encoder import CLS_ID, SEP_ID, tokenize
from rbe.errors import ValidationError
from rbe.exemplars import ExemplarMap, build_rule_input, select_exemplars
from rbe.rules import Rule, Ruleset, parse_expr


def corpus(*docs):
    return Corpus(list(docs))


@pytest.fixture
def shared_doc_setup():
    # one positive doc fires both rules; injectivity forces a conflict
    corp = corpus(
        Document("p1", "hate and loathe", label=1, split="train"),
        Document("p2", "pure hate here", label=1, split="train"),
        Document("n1", "nothing at all", label=0, split="train"),
    )
    rs = Ruleset([
        Rule("A", parse_expr('contains("hate")')),
        Rule("B", parse_expr('contains("loathe")')),
    ])
    return corp, rs


def test_first_rule_claims_shared_doc(shared_doc_setup):
    corp, rs = shared_doc_setup
    # force rule A to pick the shared doc across seeds; B has only p1 -> dropped
    for seed in range(20):
        emap = select_exemplars(rs, corp, n=2, seed=seed)
        assert set(emap.pairs["A"]) == {"p1", "p2"}
        assert "B" not in emap.pairs


def test_reverse_map_is_function(shared_doc_setup):
    corp, rs = shared_doc_setup
    emap = select_exemplars(rs, corp, n=1, seed=3)
    seen = {}
    for rule_id, doc_ids in emap.pairs.items():
        for doc_id in doc_ids:
            assert doc_id not in seen
            seen[doc_id] = rule_id
    assert seen == emap.reverse


def test_rule_without_correct_firings_absent():
    corp = corpus(
        Document("n1", "hate speech", label=0, split="train"),
        Document("p1", "loathe this", label=1, split="train"),
    )
    rs = Ruleset([
        Rule("A", parse_expr('contains("hate")')),
        Rule("B", parse_expr('contains("loathe")')),
    ])
    emap = select_exemplars(rs, corp, n=1, seed=0)
    assert "A" not in emap.pairs  # fires only on a negative
    assert emap.pairs["B"] == ["p1"]


def test_exemplars_come_from_train_split():
    corp = corpus(
        Document("t1", "hate in train", label=1, split="train"),
        Document("v1", "hate in val", label=1, split="val"),
    )
    rs = Ruleset([Rule("A", parse_expr('contains("hate")'))])
    emap = select_exemplars(rs, corp, n=5, seed=0)
    assert emap.pairs["A"] == ["t1"]


def test_injectivity_enforced_at_construction():
    with pytest.raises(ValidationError):
        ExemplarMap({"A": ["d1"], "B": ["d1"]})


def test_build_rule_input_block_order_and_sep(shared_doc_setup):
    corp, rs = shared_doc_setup
    emap = ExemplarMap({"A": ["p2"], "B": ["p1"]})
    doc = Document("x", "hate loathe everything")
    ri = build_rule_input(doc, ["B", "A"], emap, rs, corp, random.Random(0))
    # blocks follow ruleset order (A then B) regardless of fired order
    expected = [CLS_ID] + tokenize("pure hate here") + [SEP_ID] + tokenize("hate and loathe")
    assert ri.token_sequence == expected
    assert ri.exemplar_doc_ids == ["p2", "p1"]


def test_build_rule_input_single_rule_no_interior_sep(shared_doc_setup):
    corp, rs = shared_doc_setup
    emap = ExemplarMap({"A": ["p2"]})
    doc = Document("x", "hate")
    ri = build_rule_input(doc, ["A"], emap, rs, corp, random.Random(0))
    assert SEP_ID not in ri.token_sequence
    assert ri.token_sequence[0] == CLS_ID


def test_fallback_deterministic_given_seed(shared_doc_setup):
    corp, rs = shared_doc_setup
    emap = ExemplarMap({"A": ["p2"], "B": ["p1"]})
    doc = Document("x", "no rule fires on this")
    a = build_rule_input(doc, [], emap, rs, corp, random.Random(11))
    b = build_rule_input(doc, [], emap, rs, corp, random.Random(11))
    assert a.token_sequence == b.token_sequence
    assert len(a.exemplar_doc_ids) == 1


def test_truncation(shared_doc_setup):
    corp, rs = shared_doc_setup
    emap = ExemplarMap({"A": ["p2"]})
    doc = Document("x", "hate")
    ri = build_rule_input(doc, ["A"], emap, rs, corp, random.Random(0), max_len=2)
    assert len(ri.token_sequence) == 2


def test_empty_map_rejected(shared_doc_setup):
    corp, rs = shared_doc_setup
    with pytest.raises(ValidationError):
        build_rule_input(Document("x", "t"), [], ExemplarMap({}), rs, corp,
                         random.Random(0))


def test_roundtrip_through_ruleset(shared_doc_setup):
    corp, rs = shared_doc_setup
    emap = select_exemplars(rs, corp, n=1, seed=0)
    emap.write_into(rs)
    again = ExemplarMap.from_ruleset(rs)
    assert again.pairs == emap.pairs
