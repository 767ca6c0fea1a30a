"""Automatic ruleset generation from annotator rationales.

Rationale spans are token index ranges over a document; every contiguous
1-, 2-, and 3-gram inside a span is counted per demographic group, and the
most frequent n-grams per group become contains() rules.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
import json

from .corpus import Corpus
from .errors import ValidationError
from .rules import Contains, Rule, Ruleset
from .textutil import words


@dataclass
class Rationale:
    doc_id: str
    spans: list[tuple[int, int]]  # [start, end) token ranges
    group: str

    def __post_init__(self):
        if not self.group:
            raise ValidationError("rationale group must be non-empty")


def extract_ngrams(rationale: Rationale, corpus: Corpus) -> Counter:
    """Multiset of all 1/2/3-grams inside each rationale span, lowercased."""
    tokens = words(corpus.get(rationale.doc_id).text)
    grams: Counter = Counter()
    for start, end in rationale.spans:
        if not (0 <= start <= end <= len(tokens)):
            raise ValidationError(
                f"rationale span [{start},{end}) out of bounds for "
                f"document {rationale.doc_id!r} ({len(tokens)} tokens)"
            )
        span = tokens[start:end]
        for n in (1, 2, 3):
            for i in range(len(span) - n + 1):
                grams[tuple(span[i:i + n])] += 1
    return grams


def induce_ruleset(rationales: list[Rationale], corpus: Corpus, top_n: int,
                   min_df: int = 1) -> Ruleset:
    """Top-N n-grams per group, one contains() rule each.

    Ties break lexicographically; the same n-gram surfacing in several
    groups becomes a single rule.
    """
    if top_n < 1:
        raise ValidationError("top_n must be >= 1")
    by_group: dict[str, Counter] = {}
    for rat in rationales:
        by_group.setdefault(rat.group, Counter()).update(extract_ngrams(rat, corpus))

    chosen: list[tuple[str, ...]] = []
    seen: set[tuple[str, ...]] = set()
    for group in sorted(by_group):
        counts = by_group[group]
        ranked = sorted(
            (g for g, c in counts.items() if c >= min_df),
            key=lambda g: (-counts[g], g),
        )
        for gram in ranked[:top_n]:
            if gram not in seen:
                seen.add(gram)
                chosen.append(gram)

    rules = [
        Rule(id=f"induced-{i:04d}-{'_'.join(gram)}", expr=Contains(gram),
             provenance="induced")
        for i, gram in enumerate(chosen)
    ]
    return Ruleset(rules)


def load_rationales(path) -> list[Rationale]:
    out: list[Rationale] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                out.append(Rationale(
                    doc_id=obj["doc_id"],
                    spans=[(int(a), int(b)) for a, b in obj["spans"]],
                    group=obj["group"],
                ))
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise ValidationError(f"{path}:{lineno}: bad rationale: {exc}") from exc
    return out
