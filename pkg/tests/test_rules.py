import random

import pytest

from conftest import random_expr, random_text
from rbe.corpus import Document
from rbe.errors import RuleSyntaxError, ValidationError
from rbe.rules import (And, Contains, Not, Or, Rule, Ruleset, apply_ruleset,
                       eval_expr, parse_expr, to_dsl, weak_label)
from rbe.textutil import normalize, words

MISOGYNY_RULE = '(contains("hate") OR contains("loathe")) AND contains("women")'


def test_parse_conjunctive_rule_shape():
    expr = parse_expr(MISOGYNY_RULE)
    assert isinstance(expr, And)
    inner, women = expr.children
    assert isinstance(inner, Or)
    assert inner.children == (Contains(("hate",)), Contains(("loathe",)))
    assert women == Contains(("women",))


def test_parse_empty_is_syntax_error():
    with pytest.raises(RuleSyntaxError):
        parse_expr("")
    with pytest.raises(RuleSyntaxError):
        parse_expr("   ")


def test_syntax_error_carries_offset():
    with pytest.raises(RuleSyntaxError) as err:
        parse_expr('contains("hate") AND ???')
    assert err.value.offset == 21


def test_bad_regex_rejected():
    with pytest.raises(RuleSyntaxError):
        parse_expr('regex("[unclosed")')


def test_contains_arity_limits():
    with pytest.raises(RuleSyntaxError):
        parse_expr('contains("one two three four")')
    with pytest.raises(RuleSyntaxError):
        parse_expr('contains("")')


def test_not_not_normalized():
    assert parse_expr('NOT NOT contains("hate")') == Contains(("hate",))


def test_roundtrip_200_random_asts():
    rng = random.Random(42)
    for _ in range(200):
        expr = random_expr(rng)
        printed = to_dsl(expr)
        assert parse_expr(printed) == expr, printed


def test_evaluate_conjunctive_rule():
    rule = Rule("misogyny", parse_expr(MISOGYNY_RULE))
    assert rule.fires("i hate women")
    assert rule.fires("I LOATHE women!")
    assert not rule.fires("i hate mondays")


def test_contains_false_on_empty_text():
    rule = Rule("r", parse_expr('contains("hate") OR contains("women")'))
    assert not rule.fires("")


def test_contains_is_token_level_not_substring():
    # "class" must not fire a contains("ass") rule
    rule = Rule("r", parse_expr('contains("ass")'))
    assert not rule.fires("my class is great")
    assert rule.fires("what an ass")


def test_regex_matches_raw_lowercased_string():
    rule = Rule("r", parse_expr('regex("cla+ss")'))
    assert rule.fires("CLAASS dismissed")


def brute_force_eval(expr, text):
    """Independent oracle: exhaustive token-window scan, recursive booleans."""
    toks = words(text)
    if isinstance(expr, Contains):
        n = len(expr.ngram)
        return any(
            tuple(toks[i:i + n]) == expr.ngram
            for i in range(max(0, len(toks) - n + 1))
        )
    if isinstance(expr, (And, Or)):
        op = all if isinstance(expr, And) else any
        return op(brute_force_eval(c, text) for c in expr.children)
    if isinstance(expr, Not):
        return not brute_force_eval(expr.child, text)
    import re

    return re.search(expr.pattern, normalize(text)) is not None


def test_evaluate_agrees_with_brute_force_oracle():
    rng = random.Random(7)
    for _ in range(1000):
        expr = random_expr(rng)
        text = random_text(rng)
        got = eval_expr(expr, tuple(words(text)), normalize(text))
        assert got == brute_force_eval(expr, text), (to_dsl(expr), text)


def test_boolean_decomposition_properties():
    rng = random.Random(3)
    for _ in range(300):
        a, b = random_expr(rng), random_expr(rng)
        text = random_text(rng)
        toks, raw = tuple(words(text)), normalize(text)
        ea, eb = eval_expr(a, toks, raw), eval_expr(b, toks, raw)
        assert eval_expr(And((a, b)), toks, raw) == (ea and eb)
        assert eval_expr(Or((a, b)), toks, raw) == (ea or eb)
        assert eval_expr(Not(a), toks, raw) == (not ea)


def test_apply_ruleset_hand_fixture(four_doc_corpus):
    rs = Ruleset([
        Rule("A", parse_expr('contains("hate")')),
        Rule("B", parse_expr('contains("loathe")')),
    ])
    covers, fired = apply_ruleset(rs, four_doc_corpus)
    assert covers[0].doc_ids == ["d1", "d3"]
    assert covers[1].doc_ids == ["d3"]
    assert fired["d3"] == ["A", "B"]  # ruleset order
    assert fired["d2"] == []
    assert covers[0].label_agreement == 1.0


def test_apply_empty_ruleset(four_doc_corpus):
    covers, fired = apply_ruleset(Ruleset([]), four_doc_corpus)
    assert covers == []
    assert all(v == [] for v in fired.values())


def test_tautology_rule_covers_everything(four_doc_corpus):
    rs = Ruleset([Rule("T", parse_expr('NOT contains("zzzzz")'))])
    covers, _ = apply_ruleset(rs, four_doc_corpus)
    assert covers[0].doc_ids == sorted(d.id for d in four_doc_corpus)


def test_apply_invariant_under_permutation(four_doc_corpus, two_rule_set):
    docs = list(four_doc_corpus)
    covers_fwd, _ = apply_ruleset(two_rule_set, docs)
    covers_rev, _ = apply_ruleset(two_rule_set, docs[::-1])
    assert [(c.rule_id, c.doc_ids) for c in covers_fwd] == \
           [(c.rule_id, c.doc_ids) for c in covers_rev]


def test_weak_label_matches_cover_union(four_doc_corpus, two_rule_set):
    labels = weak_label(two_rule_set, four_doc_corpus)
    covers, _ = apply_ruleset(two_rule_set, four_doc_corpus)
    union = set().union(*[set(c.doc_ids) for c in covers])
    for doc in four_doc_corpus:
        assert (labels[doc.id] == 1) == (doc.id in union)
        assert labels[doc.id] in (1, None)


def test_duplicate_rule_ids_rejected():
    with pytest.raises(ValidationError):
        Ruleset([
            Rule("A", parse_expr('contains("x")')),
            Rule("A", parse_expr('contains("y")')),
        ])


def test_ruleset_roundtrip(tmp_path, two_rule_set):
    from rbe.rules import load_ruleset, save_ruleset

    two_rule_set.rules[0].exemplar_ids = ["d1"]
    path = tmp_path / "rules.jsonl"
    save_ruleset(two_rule_set, path)
    loaded = load_ruleset(path)
    assert [r.id for r in loaded] == ["A", "B"]
    assert loaded.rules[0].exemplar_ids == ["d1"]
    assert loaded.rules[0].expr == two_rule_set.rules[0].expr


def test_evaluation_is_pure():
    rule = Rule("r", parse_expr(MISOGYNY_RULE))
    doc = Document(id="x", text="i hate women")
    assert all(rule.fires(doc.text) for _ in range(5))
