"""Walk through the rule layer: parse a rule, apply a ruleset, weak-label.

Run with:  python3 demos/rules_and_weak_labels.py
"""

from rbe.corpus import make_synthetic
from rbe.metrics import confusion, metrics
from rbe.rules import Rule, apply_ruleset, parse_expr, to_dsl

# A rule is a boolean expression over token n-grams.  The printer emits a
# canonical form that parses back to the identical expression.
expr = parse_expr('(contains("hate") OR contains("loathe")) AND contains("women")')
rule = Rule("demo", expr)
print("canonical form:", to_dsl(expr))
for text in ("I hate women", "i LOATHE women!", "i hate mondays"):
    print(f"  fires({text!r}) = {rule.fires(text)}")

# The synthetic corpus ships with two deliberately imperfect rules: one
# over-general (fires on benign docs) and one fragile (misses paraphrases).
corpus, ruleset = make_synthetic(seed=7)
covers, fired = apply_ruleset(ruleset, corpus)
print(f"\ncorpus: {len(corpus)} docs, {len(ruleset)} planted rules")
for cover in covers:
    print(f"  {cover.rule_id}: covers {len(cover.doc_ids)} docs, "
          f"label agreement {cover.label_agreement:.2f}")

# Weak labels from rules alone: positive iff at least one rule fires.
test_docs = corpus.split("test")
golds = {d.id: d.label for d in test_docs}
preds = {d.id: int(bool(fired[d.id])) for d in test_docs}
m = metrics(confusion(preds, golds))
print(f"\nrules-only test metrics: macro-F1 {m['macro_f1']:.3f}, "
      f"precision {m['precision']:.3f}, recall {m['recall']:.3f}")
print("(the trained encoder closes this gap; see train_and_ground.py)")
