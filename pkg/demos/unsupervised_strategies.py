"""Compare the three unsupervised weak-label strategies on the synthetic set.

Run with:  python3 demos/unsupervised_strategies.py   (about 20 s on one core)
"""

import numpy as np

from rbe.corpus import make_synthetic
from rbe.exemplars import select_exemplars
from rbe.metrics import confusion, metrics
from rbe.rules import apply_ruleset
from rbe.training import TrainConfig, train
from rbe.weaklabel import (distance_filter, label_by_similarity,
                           populate_cache, rule_embedding_concat,
                           rule_embedding_mean)

corpus, ruleset = make_synthetic(seed=7)
emap = select_exemplars(ruleset, corpus, n=2, seed=0)
result = train(corpus, ruleset, emap, TrainConfig(seed=0, lr=0.005))

# Embed every document (and each rule's concatenated exemplar text) once;
# all three strategies read from this cache.
cache = populate_cache(result.params_t, corpus, emap)
doc_ids = [d.id for d in corpus]
golds = {d.id: d.label for d in corpus if d.label is not None}


def score(labels):
    preds = {i: labels[i] for i in golds}
    m = metrics(confusion(preds, golds))
    return m["precision"], m["recall"], m["macro_f1"]


# Mean / Concat: label positive when similarity to any rule embedding
# clears the threshold k.  Positives shrink monotonically as k rises.
for name, vecs in (
    ("mean", {r.id: rule_embedding_mean(r, emap, cache)
              for r in ruleset if r.id in emap.pairs}),
    ("concat", {r.id: rule_embedding_concat(r, emap, corpus, cache)
                for r in ruleset if r.id in emap.pairs}),
):
    print(f"{name}:")
    for k in np.linspace(0.0, 0.9, 4):
        wls = label_by_similarity(vecs, doc_ids, cache, k, name)
        p, r, f1 = score(wls.labels)
        print(f"  k={k:.2f}: {sum(wls.labels.values()):3d} positives, "
              f"precision {p:.3f}, recall {r:.3f}, macro-F1 {f1:.3f}")

# Distance: eliminate rules whose covered documents are dispersed in
# embedding space (a symptom of over-generality), then flip the labels the
# eliminated rules were solely responsible for.
covers, fired = apply_ruleset(ruleset, corpus)
baseline = {d: int(bool(fired[d])) for d in doc_ids}
p0, r0, f0 = score(baseline)
print(f"\nrules-only: precision {p0:.3f}, recall {r0:.3f}, macro-F1 {f0:.3f}")
for k in (1.0, 0.1, 0.001):
    wls = distance_filter(ruleset, covers, doc_ids, cache, k)
    p, r, f1 = score(wls.labels)
    gone = ", ".join(wls.eliminated_rules) or "none"
    print(f"distance k={k:.1f}: eliminated [{gone}], "
          f"precision {p:.3f}, recall {r:.3f}, macro-F1 {f1:.3f}")
