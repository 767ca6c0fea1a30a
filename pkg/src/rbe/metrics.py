"""Binary classification metrics; positive class is 1 (hateful)."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from .errors import ValidationError


@dataclass
class Confusion:
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


def confusion(preds: Mapping[str, int], golds: Mapping[str, int]) -> Confusion:
    if set(preds) != set(golds):
        missing = set(golds) ^ set(preds)
        sample = sorted(missing)[:3]
        raise ValidationError(f"prediction/gold id mismatch, e.g. {sample}")
    c = Confusion()
    for doc_id, pred in preds.items():
        gold = golds[doc_id]
        if pred == 1 and gold == 1:
            c.tp += 1
        elif pred == 1 and gold == 0:
            c.fp += 1
        elif pred == 0 and gold == 0:
            c.tn += 1
        else:
            c.fn += 1
    return c


def _f1(p: float, r: float) -> float:
    return 2 * p * r / (p + r) if p + r else 0.0


def metrics(c: Confusion) -> dict:
    """Precision/recall are positive-class; macro F1 averages both classes.

    Zero-denominator cases are reported as 0 and flagged.
    """
    zero_hit = False

    def ratio(num: int, den: int) -> float:
        nonlocal zero_hit
        if den == 0:
            zero_hit = True
            return 0.0
        return num / den

    precision = ratio(c.tp, c.tp + c.fp)
    recall = ratio(c.tp, c.tp + c.fn)
    f1_pos = _f1(precision, recall)
    prec_neg = ratio(c.tn, c.tn + c.fn)
    rec_neg = ratio(c.tn, c.tn + c.fp)
    f1_neg = _f1(prec_neg, rec_neg)
    accuracy = ratio(c.tp + c.tn, c.total)
    return {
        "precision": precision,
        "recall": recall,
        "f1_pos": f1_pos,
        "macro_f1": (f1_pos + f1_neg) / 2.0,
        "accuracy": accuracy,
        "zero_division_hit": zero_hit,
    }
