"""Threshold-based prediction, threshold calibration, and rule-grounded traces."""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .corpus import Corpus, Document
from .encoder import CLS_ID, SEP_ID, EncoderParams, cosine_sim, encode, tokenize
from .errors import StaleIndexError, ValidationError
from .exemplars import ExemplarMap, build_rule_input
from .metrics import confusion, metrics
from .rules import Ruleset


@dataclass
class IndexEntry:
    exemplar_id: str
    rule_id: str
    vec: np.ndarray


@dataclass
class ExemplarIndex:
    entries: list[IndexEntry]
    params_digest: str


@dataclass
class GroundedPrediction:
    doc_id: str
    label: int
    score: float
    fired_rules: list[str]
    nearest: list[tuple[str, str, float]]  # (exemplar id, rule id, similarity)


def build_index(params_r: EncoderParams, emap: ExemplarMap,
                corpus: Corpus) -> ExemplarIndex:
    """Embed every mapped exemplar alone under the rule encoder."""
    entries = []
    for rule_id in emap.pairs:
        for doc_id in emap.pairs[rule_id]:
            tokens = [CLS_ID] + tokenize(corpus.get(doc_id).text)
            entries.append(IndexEntry(doc_id, rule_id, encode(params_r, tokens)))
    return ExemplarIndex(entries, params_r.digest())


def _nearest_entries(index: ExemplarIndex, text_vec: np.ndarray,
                     k: int) -> list[tuple[IndexEntry, float]]:
    scored = [(e, cosine_sim(e.vec, text_vec)) for e in index.entries]
    scored.sort(key=lambda es: (-es[1], es[0].exemplar_id))
    return scored[:k]


def score_document(
    params_r: EncoderParams,
    params_t: EncoderParams,
    rs: Ruleset,
    emap: ExemplarMap,
    corpus: Corpus,
    doc: Document,
    index: Optional[ExemplarIndex] = None,
    fallback: str = "nearest",
    fallback_n: int = 1,
    rng: Optional[random.Random] = None,
) -> tuple[float, list[str]]:
    """Cosine similarity between the rule-side input and the text, plus fired rules.

    Fallback when no mapped rule fires: "nearest" (default, deterministic)
    picks the index entries closest to the text embedding; "random" samples
    from the whole map with the caller's RNG, matching training behavior.
    """
    if not emap.pairs:
        raise ValidationError("exemplar map is empty")
    fired = [r.id for r in rs if r.fires(doc.text)]
    text_vec = encode(params_t, tokenize(doc.text))
    active = [rid for rid in fired if rid in emap.pairs]
    if active or fallback == "random":
        rng = rng if rng is not None else random.Random(0)
        rule_input = build_rule_input(doc, fired, emap, rs, corpus, rng,
                                      fallback_n=fallback_n)
        rule_vec = encode(params_r, rule_input.token_sequence)
    else:
        if index is None:
            index = build_index(params_r, emap, corpus)
        # Each chosen exemplar forms its own block, [SEP]-separated.
        chosen = _nearest_entries(index, text_vec, fallback_n)
        tokens = [CLS_ID]
        for i, (entry, _) in enumerate(chosen):
            if i > 0:
                tokens.append(SEP_ID)
            tokens.extend(tokenize(corpus.get(entry.exemplar_id).text))
        rule_vec = encode(params_r, tokens[:256])
    return cosine_sim(rule_vec, text_vec), fired


def predict(
    params_r: EncoderParams,
    params_t: EncoderParams,
    rs: Ruleset,
    emap: ExemplarMap,
    corpus: Corpus,
    doc: Document,
    tau: float,
    index: Optional[ExemplarIndex] = None,
) -> tuple[int, float]:
    if not -1.0 <= tau <= 1.0:
        raise ValidationError("threshold must lie in [-1, 1]")
    score, _ = score_document(params_r, params_t, rs, emap, corpus, doc, index)
    return (1 if score >= tau else 0), score


def best_threshold(scores: Sequence[float], golds: Sequence[int]) -> float:
    """Threshold maximizing macro-F1 over the observed score midpoints.

    Candidates are the minimum score (labels everything positive) and the
    midpoints between consecutive distinct scores; ties prefer the lower
    threshold.
    """
    if len(scores) != len(golds) or not scores:
        raise ValidationError("scores and gold labels must align and be non-empty")
    if len(set(golds)) < 2:
        raise ValidationError("threshold calibration needs both classes present")
    distinct = sorted(set(scores))
    candidates = [distinct[0]]
    candidates += [(a + b) / 2.0 for a, b in zip(distinct, distinct[1:])]
    candidates.append(distinct[-1] + 1e-9)
    best_tau, best_f1 = candidates[0], -1.0
    ids = [str(i) for i in range(len(scores))]
    gold_map = dict(zip(ids, golds))
    for tau in candidates:
        preds = {i: int(s >= tau) for i, s in zip(ids, scores)}
        f1 = metrics(confusion(preds, gold_map))["macro_f1"]
        if f1 > best_f1:
            best_tau, best_f1 = tau, f1
    return float(np.clip(best_tau, -1.0, 1.0))


def calibrate_threshold(
    params_r: EncoderParams,
    params_t: EncoderParams,
    rs: Ruleset,
    emap: ExemplarMap,
    corpus: Corpus,
    val_docs: Sequence[Document],
    index: Optional[ExemplarIndex] = None,
) -> float:
    if index is None:
        index = build_index(params_r, emap, corpus)
    scores = []
    golds = []
    for doc in val_docs:
        if doc.label is None:
            continue
        s, _ = score_document(params_r, params_t, rs, emap, corpus, doc, index)
        scores.append(s)
        golds.append(doc.label)
    return best_threshold(scores, golds)


def ground(
    doc: Document,
    label: int,
    score: float,
    fired_rules: list[str],
    index: ExemplarIndex,
    params_t: EncoderParams,
    rs: Ruleset,
    k: int = 3,
    expect_digest: Optional[str] = None,
) -> GroundedPrediction:
    """Trace a prediction to its fired rules and nearest exemplars."""
    if expect_digest is not None and index.params_digest != expect_digest:
        raise StaleIndexError(
            "exemplar index was built from a different checkpoint; rebuild it"
        )
    for rule_id in fired_rules:
        if rs.get(rule_id) is None:
            raise ValidationError(f"fired rule {rule_id!r} not in ruleset")
    text_vec = encode(params_t, tokenize(doc.text))
    nearest = [
        (e.exemplar_id, e.rule_id, float(sim))
        for e, sim in _nearest_entries(index, text_vec, k)
    ]
    return GroundedPrediction(
        doc_id=doc.id,
        label=label,
        score=score,
        fired_rules=list(fired_rules),
        nearest=nearest,
    )
