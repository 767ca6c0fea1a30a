"""Corpus ingestion, validation, persistence, and the synthetic fixture generator."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from typing import Optional

from .errors import ValidationError
from .rules import Rule, Ruleset, parse_expr

SPLITS = ("train", "val", "test")


@dataclass
class Document:
    id: str
    text: str
    label: Optional[int] = None  # 1 hateful, 0 non-hateful, None unlabeled
    split: str = "train"


@dataclass
class Corpus:
    docs: list[Document]
    index: dict[str, int] = field(init=False)

    def __post_init__(self):
        self.index = {}
        for i, d in enumerate(self.docs):
            if d.id in self.index:
                raise ValidationError(f"duplicate document id {d.id!r}")
            self.index[d.id] = i

    def __len__(self):
        return len(self.docs)

    def __iter__(self):
        return iter(self.docs)

    def get(self, doc_id: str) -> Document:
        try:
            return self.docs[self.index[doc_id]]
        except KeyError:
            raise ValidationError(f"unknown document id {doc_id!r}") from None

    def split(self, name: str) -> list[Document]:
        return [d for d in self.docs if d.split == name]

    def split_counts(self) -> dict[str, int]:
        counts = {s: 0 for s in SPLITS}
        for d in self.docs:
            counts[d.split] += 1
        return counts


def _parse_doc(obj: dict, where: str) -> Document:
    for key in ("id", "text"):
        if key not in obj:
            raise ValidationError(f"{where}: missing field {key!r}")
    text = obj["text"]
    if not isinstance(text, str) or not text.strip():
        raise ValidationError(f"{where}: empty text")
    label = obj.get("label")
    if label not in (0, 1, None):
        raise ValidationError(f"{where}: bad label {label!r} (expected 0, 1, or null)")
    split = obj.get("split", "train")
    if split not in SPLITS:
        raise ValidationError(f"{where}: bad split {split!r}")
    import unicodedata

    return Document(
        id=str(obj["id"]),
        text=unicodedata.normalize("NFC", text),
        label=label,
        split=split,
    )


def load_corpus(path) -> Corpus:
    docs: list[Document] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            where = f"{path}:{lineno}"
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValidationError(f"{where}: bad JSON: {exc}") from exc
            doc = _parse_doc(obj, where)
            if doc.id in seen:
                raise ValidationError(f"{where}: duplicate document id {doc.id!r}")
            seen.add(doc.id)
            docs.append(doc)
    return Corpus(docs)


def save_corpus(corpus: Corpus, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for d in corpus:
            fh.write(json.dumps({
                "id": d.id, "text": d.text, "label": d.label, "split": d.split,
            }, sort_keys=True) + "\n")


# --------------------------------------------------------------------------
# Synthetic fixture corpus
#
# The generator plants both rule failure modes on purpose:
#   * an over-general rule, contains("trash"), whose keyword also occurs in
#     benign chatter, so its cover-set precision is low by construction;
#   * a fragile rule, contains("hate"), that misses the paraphrased hateful
#     documents, so its recall over the hateful class is low by construction.

_TARGETS = ["women", "immigrants", "migrants", "foreigners", "outsiders"]
_PARA_VERBS = ["despise", "detest", "resent"]
_BENIGN_VERBS = ["admire", "respect", "support", "welcome"]

_HATE_COVERED = [
    "i hate {t}",
    "we hate {t} so much",
    "i really hate those {t}",
    "everyone should hate {t}",
]
_HATE_TRASH = [
    "those {t} are trash",
    "{t} are complete trash",
    "all {t} are worthless trash",
]
_HATE_PARA = [
    "i {pv} {t}",
    "we {pv} every single one of those {t}",
    "{t} disgust me completely",
    "those {t} make me sick",
]
_BENIGN_TRASH = [
    "take out the trash before dinner",
    "that movie was total trash honestly",
    "my first draft is trash so i rewrote it",
    "the trash truck comes on monday morning",
]
_BENIGN_TARGET = [
    "i {bv} {t}",
    "{t} are welcome in our town",
    "we {bv} the {t} in our community",
]
_BENIGN_FILLER = [
    "the weather is lovely today",
    "we watched a documentary about cooking",
    "my garden finally has ripe tomatoes",
    "the train was on time this morning",
    "she plays the violin beautifully",
]

# (is_hateful, template pool, weight)
_RECIPE = [
    (1, "covered", 0.40),
    (1, "trash", 0.25),
    (1, "para", 0.35),
    (0, "trash", 0.30),
    (0, "target", 0.35),
    (0, "filler", 0.35),
]


def _render(rng: random.Random, kind: str, hateful: bool) -> str:
    if hateful:
        pool = {"covered": _HATE_COVERED, "trash": _HATE_TRASH, "para": _HATE_PARA}[kind]
    else:
        pool = {"trash": _BENIGN_TRASH, "target": _BENIGN_TARGET, "filler": _BENIGN_FILLER}[kind]
    return rng.choice(pool).format(
        t=rng.choice(_TARGETS),
        pv=rng.choice(_PARA_VERBS),
        bv=rng.choice(_BENIGN_VERBS),
    )


def planted_ruleset() -> Ruleset:
    return Ruleset([
        Rule(id="r-hate", expr=parse_expr('contains("hate")'), provenance="manual"),
        Rule(id="r-trash", expr=parse_expr('contains("trash")'), provenance="manual"),
    ])


def make_synthetic(seed: int, n_train: int = 200, n_val: int = 60,
                   n_test: int = 60) -> tuple[Corpus, Ruleset]:
    """Deterministic labeled corpus with planted over-general and fragile rules."""
    for size in (n_train, n_val, n_test):
        if size < 10:
            raise ValidationError("each split needs at least 10 documents")
    rng = random.Random(seed)
    docs: list[Document] = []
    for split, size in (("train", n_train), ("val", n_val), ("test", n_test)):
        for i in range(size):
            # Half hateful, half benign; template mix follows the recipe weights.
            hateful = i % 2 == 0
            kinds = [(k, w) for (h, k, w) in _RECIPE if h == int(hateful)]
            kind = rng.choices([k for k, _ in kinds], weights=[w for _, w in kinds])[0]
            docs.append(Document(
                id=f"{split}-{i:04d}",
                text=_render(rng, kind, hateful),
                label=int(hateful),
                split=split,
            ))
    return Corpus(docs), planted_ruleset()
