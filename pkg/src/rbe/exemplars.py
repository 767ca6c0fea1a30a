"""Exemplar selection under the injectivity constraint and rule-side input assembly."""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass, field

from .corpus import Corpus, Document
from .encoder import CLS_ID, SEP_ID, tokenize
from .errors import ValidationError
from .rules import Ruleset, apply_ruleset

log = logging.getLogger(__name__)

DEFAULT_MAX_LEN = 256


@dataclass
class ExemplarMap:
    pairs: dict[str, list[str]]  # rule_id -> exemplar doc ids
    reverse: dict[str, str] = field(init=False)  # doc_id -> owning rule_id

    def __post_init__(self):
        self.reverse = {}
        for rule_id, doc_ids in self.pairs.items():
            for doc_id in doc_ids:
                if doc_id in self.reverse:
                    raise ValidationError(
                        f"exemplar {doc_id!r} claimed by both "
                        f"{self.reverse[doc_id]!r} and {rule_id!r}"
                    )
                self.reverse[doc_id] = rule_id

    def __len__(self):
        return len(self.pairs)

    def all_exemplar_ids(self) -> list[str]:
        out: list[str] = []
        for doc_ids in self.pairs.values():
            out.extend(doc_ids)
        return out

    @classmethod
    def from_ruleset(cls, rs: Ruleset) -> "ExemplarMap":
        return cls({r.id: list(r.exemplar_ids) for r in rs if r.exemplar_ids})

    def write_into(self, rs: Ruleset) -> None:
        for rule in rs:
            rule.exemplar_ids = list(self.pairs.get(rule.id, []))


@dataclass
class RuleInput:
    doc_id: str
    exemplar_doc_ids: list[str]
    token_sequence: list[int]  # [CLS] block [SEP] block ..., truncated


def select_exemplars(rs: Ruleset, train: Corpus, n: int = 1,
                     seed: int = 0) -> ExemplarMap:
    """Pick n exemplars per rule from its correct cover set on the train split.

    A correct firing is a train document with gold label 1 that the rule
    fires on.  Rules claim documents in ruleset order and no document may
    serve two rules; rules left with nothing to claim are dropped.
    """
    if n < 1:
        raise ValidationError("exemplar count must be >= 1")
    train_docs = [d for d in train.split("train")]
    _, fired = apply_ruleset(rs, train_docs)
    rng = random.Random(seed)
    claimed: set[str] = set()
    pairs: dict[str, list[str]] = {}
    for rule in rs:
        candidates = [
            d.id for d in train_docs
            if d.label == 1 and rule.id in fired[d.id] and d.id not in claimed
        ]
        if not candidates:
            log.warning("rule %s has no unclaimed correct firings; dropped", rule.id)
            continue
        chosen = rng.sample(candidates, min(n, len(candidates)))
        claimed.update(chosen)
        pairs[rule.id] = sorted(chosen)
    return ExemplarMap(pairs)


def build_rule_input(
    doc: Document,
    fired_rules: list[str],
    emap: ExemplarMap,
    rs: Ruleset,
    corpus: Corpus,
    rng: random.Random,
    fallback_n: int = 1,
    max_len: int = DEFAULT_MAX_LEN,
) -> RuleInput:
    """Assemble the rule-side token sequence for one document.

    Exemplar blocks of the fired rules appear in ruleset order, separated by
    [SEP].  When no mapped rule fired, fallback_n exemplars are sampled
    uniformly from the whole map using the caller's RNG.
    """
    if not emap.pairs:
        raise ValidationError("exemplar map is empty")
    ruleset_order = [r.id for r in rs]
    active = [rid for rid in ruleset_order if rid in fired_rules and rid in emap.pairs]
    if active:
        blocks = [emap.pairs[rid] for rid in active]
    else:
        pool = sorted(emap.all_exemplar_ids())
        chosen = rng.sample(pool, min(fallback_n, len(pool)))
        blocks = [[doc_id] for doc_id in chosen]

    tokens = [CLS_ID]
    exemplar_ids: list[str] = []
    for i, block in enumerate(blocks):
        if i > 0:
            tokens.append(SEP_ID)
        for doc_id in block:
            exemplar_ids.append(doc_id)
            tokens.extend(tokenize(corpus.get(doc_id).text))
    return RuleInput(
        doc_id=doc.id,
        exemplar_doc_ids=exemplar_ids,
        token_sequence=tokens[:max_len],
    )
