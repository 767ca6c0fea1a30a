from collections import Counter

import pytest

from rbe.corpus import Corpus, Document
from rbe.errors import ValidationError
from rbe.induction import Rationale, extract_ngrams, induce_ruleset, load_rationales
from rbe.rules import Contains


def corpus_of(texts):
    return Corpus([
        Document(id=f"d{i}", text=t, label=1) for i, t in enumerate(texts)
    ])


def test_extract_ngrams_hand_enumeration():
    corp = corpus_of(["those dumb people again"])
    rat = Rationale(doc_id="d0", spans=[(1, 3)], group="g")
    grams = extract_ngrams(rat, corp)
    assert grams == Counter({
        ("dumb",): 1, ("people",): 1, ("dumb", "people"): 1,
    })


def test_extract_ngrams_empty_spans():
    corp = corpus_of(["anything"])
    assert extract_ngrams(Rationale("d0", [], "g"), corp) == Counter()


def test_extract_ngrams_single_token_span():
    corp = corpus_of(["one idiot here"])
    grams = extract_ngrams(Rationale("d0", [(1, 2)], "g"), corp)
    assert grams == Counter({("idiot",): 1})


def test_extract_ngrams_unknown_doc():
    corp = corpus_of(["x y"])
    with pytest.raises(ValidationError):
        extract_ngrams(Rationale("nope", [(0, 1)], "g"), corp)


def test_extract_ngrams_span_out_of_bounds():
    corp = corpus_of(["two words"])
    with pytest.raises(ValidationError):
        extract_ngrams(Rationale("d0", [(1, 5)], "g"), corp)


def test_induce_top1_single_group():
    corp = corpus_of(["idiot idiot fool", "idiot person"])
    rats = [
        Rationale("d0", [(0, 3)], "g1"),
        Rationale("d1", [(0, 1)], "g1"),
    ]
    rs = induce_ruleset(rats, corp, top_n=1)
    assert len(rs) == 1
    assert rs.rules[0].expr == Contains(("idiot",))
    assert rs.rules[0].provenance == "induced"


def test_induce_two_groups_disjoint_vocab():
    corp = corpus_of(["aa bb cc", "dd ee ff"])
    rats = [
        Rationale("d0", [(0, 3)], "g1"),
        Rationale("d1", [(0, 3)], "g2"),
    ]
    rs = induce_ruleset(rats, corp, top_n=3)
    assert len(rs) <= 6


def test_cross_group_duplicates_merge():
    corp = corpus_of(["slur", "slur"])
    rats = [
        Rationale("d0", [(0, 1)], "g1"),
        Rationale("d1", [(0, 1)], "g2"),
    ]
    rs = induce_ruleset(rats, corp, top_n=1)
    assert len(rs) == 1


def test_ties_break_lexicographically():
    corp = corpus_of(["zebra apple"])
    rats = [Rationale("d0", [(0, 1)], "g"), Rationale("d0", [(1, 2)], "g")]
    rs = induce_ruleset(rats, corp, top_n=1)
    # both 1-grams appear once; "apple" sorts first
    assert rs.rules[0].expr == Contains(("apple",))


def test_no_rationales_gives_empty_ruleset():
    rs = induce_ruleset([], corpus_of(["x"]), top_n=5)
    assert len(rs) == 0


def test_induced_bound_and_determinism():
    corp = corpus_of(["a b c d", "b c d e", "c d e f"])
    rats = [
        Rationale("d0", [(0, 4)], "g1"),
        Rationale("d1", [(0, 4)], "g2"),
        Rationale("d2", [(0, 4)], "g1"),
    ]
    rs1 = induce_ruleset(rats, corp, top_n=4)
    rs2 = induce_ruleset(rats, corp, top_n=4)
    assert len(rs1) <= 4 * 2
    assert [r.id for r in rs1] == [r.id for r in rs2]
    # every induced n-gram occurs in at least one rationale span
    all_grams = Counter()
    for rat in rats:
        all_grams += extract_ngrams(rat, corp)
    for rule in rs1:
        assert rule.expr.ngram in all_grams


def test_min_df_filters_rare_grams():
    corp = corpus_of(["common common rare"])
    rats = [Rationale("d0", [(0, 3)], "g")]
    rs = induce_ruleset(rats, corp, top_n=10, min_df=2)
    assert [r.expr for r in rs] == [Contains(("common",))]


def test_load_rationales_roundtrip(tmp_path):
    path = tmp_path / "rat.jsonl"
    path.write_text('{"doc_id": "d0", "spans": [[0, 2]], "group": "g1"}\n')
    rats = load_rationales(path)
    assert rats == [Rationale("d0", [(0, 2)], "g1")]
    bad = tmp_path / "bad.jsonl"
    bad.write_text('{"doc_id": "d0"}\n')
    with pytest.raises(ValidationError):
        load_rationales(bad)
