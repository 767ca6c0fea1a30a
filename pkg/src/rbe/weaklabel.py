"""Unsupervised rule-quality strategies over a fixed embedding cache.

Three strategies produce weak labels for an unlabeled corpus:

  * mean     — rule vector = mean of its exemplar embeddings, then
               similarity thresholding;
  * concat   — rule vector = embedding of the exemplars concatenated into
               one text, then similarity thresholding;
  * distance — rules whose cover-set embeddings are dispersed (average
               consecutive-pair cosine distance >= k) are eliminated and
               their exclusive weak positives flipped to 0.

Embeddings arrive via a JSONL cache file so any external sentence embedder
can be used; the internal text encoder can populate the same cache.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .corpus import Corpus
from .encoder import EncoderParams, cosine_sim, encode, tokenize
from .errors import ValidationError
from .exemplars import ExemplarMap
from .rules import CoverSet, Rule, Ruleset

log = logging.getLogger(__name__)

STRATEGIES = ("mean", "concat", "distance")


@dataclass
class EmbeddingCache:
    vectors: dict[str, np.ndarray]
    dim: int
    source: str = "external"

    def get(self, key: str) -> np.ndarray:
        try:
            return self.vectors[key]
        except KeyError:
            raise ValidationError(f"embedding cache has no entry for {key!r}") from None

    def put(self, key: str, vec: np.ndarray) -> None:
        if vec.shape != (self.dim,):
            raise ValidationError(
                f"embedding for {key!r} has dimension {vec.shape}, expected ({self.dim},)"
            )
        self.vectors[key] = vec


@dataclass
class WeakLabelSet:
    labels: dict[str, int]
    strategy: str
    threshold: float
    eliminated_rules: list[str] = field(default_factory=list)


def concat_key(texts: Iterable[str]) -> str:
    """Cache key for a concatenated exemplar string; order-sensitive."""
    joined = " ".join(texts)
    return "concat:" + hashlib.sha256(joined.encode("utf-8")).hexdigest()


def load_embedding_cache(path) -> EmbeddingCache:
    vectors: dict[str, np.ndarray] = {}
    dim: Optional[int] = None
    source = "external"
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                key, vec = obj["id"], np.asarray(obj["vec"], dtype=np.float64)
            except (json.JSONDecodeError, KeyError, ValueError) as exc:
                raise ValidationError(f"{path}:{lineno}: bad cache entry: {exc}") from exc
            if obj.get("source"):
                source = obj["source"]
            if vec.ndim != 1:
                raise ValidationError(f"{path}:{lineno}: vector for {key!r} is not 1-D")
            if dim is None:
                dim = vec.shape[0]
            elif vec.shape[0] != dim:
                raise ValidationError(
                    f"{path}:{lineno}: dimension mismatch for {key!r}: "
                    f"{vec.shape[0]} != {dim}"
                )
            vectors[key] = vec
    if dim is None:
        raise ValidationError(f"{path}: empty embedding cache")
    return EmbeddingCache(vectors, dim, source)


def save_embedding_cache(cache: EmbeddingCache, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for key in cache.vectors:
            fh.write(json.dumps({
                "id": key,
                "vec": [float(x) for x in cache.vectors[key]],
                "source": cache.source,
            }, sort_keys=True) + "\n")


def populate_cache(params_t: EncoderParams, corpus: Corpus,
                   emap: Optional[ExemplarMap] = None) -> EmbeddingCache:
    """Embed every document (and, given a map, each rule's concatenated
    exemplar text) with the internal text encoder."""
    cache = EmbeddingCache({}, dim=params_t.dim, source="internal")
    for doc in corpus:
        cache.put(doc.id, encode(params_t, tokenize(doc.text)))
    if emap is not None:
        for rule_id in emap.pairs:
            texts = [corpus.get(d).text for d in emap.pairs[rule_id]]
            cache.put(concat_key(texts), encode(params_t, tokenize(" ".join(texts))))
    return cache


def rule_embedding_mean(rule: Rule, emap: ExemplarMap,
                        cache: EmbeddingCache) -> np.ndarray:
    doc_ids = emap.pairs.get(rule.id)
    if not doc_ids:
        raise ValidationError(f"rule {rule.id!r} has no exemplars")
    vec = np.mean([cache.get(d) for d in doc_ids], axis=0)
    if np.linalg.norm(vec) < 1e-12:
        log.warning("rule %s: degenerate (near-zero) mean exemplar embedding", rule.id)
    return vec


def rule_embedding_concat(rule: Rule, emap: ExemplarMap, corpus: Corpus,
                          cache: EmbeddingCache) -> np.ndarray:
    doc_ids = emap.pairs.get(rule.id)
    if not doc_ids:
        raise ValidationError(f"rule {rule.id!r} has no exemplars")
    texts = [corpus.get(d).text for d in doc_ids]
    return cache.get(concat_key(texts))


def label_by_similarity(rule_vecs: dict[str, np.ndarray], doc_ids: Iterable[str],
                        cache: EmbeddingCache, k: float, strategy: str) -> WeakLabelSet:
    """1 iff the best cosine similarity over all rule vectors reaches k."""
    if not -1.0 <= k <= 1.0:
        raise ValidationError("similarity threshold must lie in [-1, 1]")
    labels: dict[str, int] = {}
    for doc_id in doc_ids:
        vec = cache.get(doc_id)
        best = max(
            (cosine_sim(rv, vec) for rv in rule_vecs.values()), default=-1.0
        )
        labels[doc_id] = int(best >= k)
    return WeakLabelSet(labels, strategy, k)


def avg_dist(cover_doc_ids: Iterable[str], cache: EmbeddingCache,
             all_pairs: bool = False) -> float:
    """Average cosine distance over the cover set, taken between consecutive
    documents in doc-id order (or over all pairs when requested).

    Covers smaller than 2 score 0 so the rule is kept.
    """
    ids = sorted(cover_doc_ids)
    if len(ids) < 2:
        log.info("cover of size %d: average distance defined as 0", len(ids))
        return 0.0
    vecs = [cache.get(d) for d in ids]
    if all_pairs:
        dists = [
            1.0 - cosine_sim(vecs[i], vecs[j])
            for i in range(len(vecs)) for j in range(i + 1, len(vecs))
        ]
    else:
        dists = [1.0 - cosine_sim(a, b) for a, b in zip(vecs, vecs[1:])]
    return float(np.mean(dists))


def distance_filter(rs: Ruleset, covers: list[CoverSet], doc_ids: Iterable[str],
                    cache: EmbeddingCache, k: float,
                    all_pairs: bool = False) -> WeakLabelSet:
    """Eliminate dispersed rules and flip their exclusive weak positives to 0.

    Starting from the rule weak labels (1 on any cover), a document stays
    positive only if a surviving rule covers it; positives are therefore
    always a subset of the rule weak-label positives.
    """
    if k < 0:
        raise ValidationError("distance threshold must be >= 0")
    cover_by_rule = {c.rule_id: c.doc_ids for c in covers}
    eliminated = [
        rule.id for rule in rs
        if avg_dist(cover_by_rule.get(rule.id, []), cache, all_pairs) >= k
    ]
    kept_covered: set[str] = set()
    for c in covers:
        if c.rule_id not in eliminated:
            kept_covered.update(c.doc_ids)
    labels = {doc_id: int(doc_id in kept_covered) for doc_id in doc_ids}
    return WeakLabelSet(labels, "distance", k, eliminated_rules=eliminated)
