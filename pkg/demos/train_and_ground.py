"""Train the dual encoder on the synthetic corpus and ground its predictions.

Run with:  python3 demos/train_and_ground.py   (about 20 s on one core)
"""

from rbe.corpus import make_synthetic
from rbe.exemplars import select_exemplars
from rbe.inference import (build_index, calibrate_threshold, ground,
                           score_document)
from rbe.metrics import confusion, metrics
from rbe.training import TrainConfig, train

corpus, ruleset = make_synthetic(seed=7)

# Pair each rule with a correctly-fired training exemplar (injective: no
# document may serve two rules).
emap = select_exemplars(ruleset, corpus, n=1, seed=0)
for rule_id, exemplar_ids in emap.pairs.items():
    for ex in exemplar_ids:
        print(f"{rule_id} <- {ex}: {corpus.get(ex).text!r}")

# Contrastive training pulls covered documents toward their rule's exemplar
# block and pushes uncovered ones past the margin.
result = train(corpus, ruleset, emap, TrainConfig(seed=0, lr=0.005))
print(f"\ntrained {result.steps} steps; "
      f"best val macro-F1 {result.best_val_macro_f1:.3f}")

val_docs = [d for d in corpus.split("val") if d.label is not None]
tau = calibrate_threshold(result.params_r, result.params_t, ruleset, emap,
                          corpus, val_docs)
print(f"calibrated threshold tau = {tau:.3f}")

index = build_index(result.params_r, emap, corpus)
test_docs = corpus.split("test")
preds = {}
for doc in test_docs:
    score, fired = score_document(result.params_r, result.params_t, ruleset,
                                  emap, corpus, doc, index)
    preds[doc.id] = int(score >= tau)
golds = {d.id: d.label for d in test_docs}
m = metrics(confusion(preds, golds))
print(f"test macro-F1 {m['macro_f1']:.3f} "
      f"(compare rules_and_weak_labels.py for the rules-only baseline)")

# Every prediction is grounded: the fired rules plus the nearest exemplars
# in embedding space, so a reviewer can see *why* the label was assigned.
doc = test_docs[0]
score, fired = score_document(result.params_r, result.params_t, ruleset,
                              emap, corpus, doc, index)
gp = ground(doc, int(score >= tau), score, fired, index, result.params_t,
            ruleset, k=2)
print(f"\ngrounding for {doc.id!r}: {doc.text!r}")
print(f"  label {gp.label}, score {gp.score:.3f}, fired rules {gp.fired_rules}")
for exemplar_id, rule_id, sim in gp.nearest:
    print(f"  nearest exemplar {exemplar_id} (rule {rule_id}), sim {sim:.3f}")
