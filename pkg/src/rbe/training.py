"""Supervised dual-encoder training loop with early stopping on validation macro-F1."""

from __future__ import annotations

import logging
import math
import random
from dataclasses import dataclass, field

import numpy as np

from .corpus import Corpus
from .encoder import EncoderParams, LossConfig, loss_and_grads, tokenize
from .errors import RBEError, ValidationError
from .exemplars import ExemplarMap, build_rule_input
from .inference import build_index, calibrate_threshold, score_document
from .metrics import confusion, metrics
from .optim import AdamWConfig, AdamWState, adamw_step, lr_at
from .rules import Ruleset, apply_ruleset

log = logging.getLogger(__name__)


@dataclass
class TrainConfig:
    lr: float = 2e-5
    weight_decay: float = 0.01
    batch_size: int = 8
    max_epochs: int = 10
    warmup_frac: float = 0.10
    margin: float = 0.5
    seed: int = 0
    patience: int = 3
    dim: int = 64

    def __post_init__(self):
        if not 0.0 < self.warmup_frac < 1.0:
            raise ValidationError("warmup_frac must lie in (0, 1)")
        if self.batch_size < 1:
            raise ValidationError("batch_size must be >= 1")

    def adamw(self) -> AdamWConfig:
        return AdamWConfig(lr=self.lr, weight_decay=self.weight_decay)


@dataclass
class TrainResult:
    params_r: EncoderParams
    params_t: EncoderParams
    history: list[dict] = field(default_factory=list)
    val_history: list[dict] = field(default_factory=list)
    best_val_macro_f1: float = 0.0
    best_tau: float = 0.5
    steps: int = 0


def _val_macro_f1(params_r, params_t, rs, emap, corpus, val_docs) -> tuple[float, float]:
    index = build_index(params_r, emap, corpus)
    tau = calibrate_threshold(params_r, params_t, rs, emap, corpus, val_docs, index)
    preds = {}
    golds = {}
    for doc in val_docs:
        if doc.label is None:
            continue
        score, _ = score_document(params_r, params_t, rs, emap, corpus, doc, index)
        preds[doc.id] = int(score >= tau)
        golds[doc.id] = doc.label
    return metrics(confusion(preds, golds))["macro_f1"], tau


def train(corpus: Corpus, rs: Ruleset, emap: ExemplarMap,
          cfg: TrainConfig) -> TrainResult:
    """Seeded, bit-reproducible training of both encoders.

    Per instance the fired rules are resolved and their exemplars form the
    rule-side input (seeded random fallback when none fire), both encoders
    run, and both parameter sets take an AdamW step on the contrastive
    loss.  The best validation macro-F1 checkpoint is returned.
    """
    train_docs = [d for d in corpus.split("train") if d.label is not None]
    if not train_docs:
        raise ValidationError("train split is empty or unlabeled")
    if not emap.pairs:
        raise ValidationError("exemplar map is empty")
    val_docs = [d for d in corpus.split("val") if d.label is not None]

    params_r = EncoderParams.init(cfg.seed, dim=cfg.dim)
    params_t = EncoderParams.init(cfg.seed + 1, dim=cfg.dim)
    state_r = AdamWState.zeros_like(params_r)
    state_t = AdamWState.zeros_like(params_t)
    adamw_cfg = cfg.adamw()
    loss_cfg = LossConfig(margin=cfg.margin)

    _, fired = apply_ruleset(rs, train_docs)
    text_tokens = {d.id: tokenize(d.text) for d in train_docs}

    steps_per_epoch = math.ceil(len(train_docs) / cfg.batch_size)
    total_steps = cfg.max_epochs * steps_per_epoch
    rng = random.Random(cfg.seed)

    result = TrainResult(params_r=params_r, params_t=params_t)
    best = None
    bad_epochs = 0
    step = 0
    for epoch in range(cfg.max_epochs):
        order = list(range(len(train_docs)))
        rng.shuffle(order)
        for start in range(0, len(order), cfg.batch_size):
            batch = []
            for i in order[start:start + cfg.batch_size]:
                doc = train_docs[i]
                rule_input = build_rule_input(doc, fired[doc.id], emap, rs,
                                              corpus, rng)
                batch.append((rule_input.token_sequence, text_tokens[doc.id],
                              doc.label))
            try:
                loss, grads_r, grads_t = loss_and_grads(params_r, params_t,
                                                        batch, loss_cfg)
            except RBEError as exc:
                raise RBEError(f"step {step}: {exc}") from exc
            lr = lr_at(step, total_steps, cfg.lr, cfg.warmup_frac)
            adamw_step(params_r, grads_r, state_r, lr, adamw_cfg)
            adamw_step(params_t, grads_t, state_t, lr, adamw_cfg)
            result.history.append({"step": step, "loss": loss, "lr": lr})
            step += 1

        if val_docs:
            macro_f1, tau = _val_macro_f1(params_r, params_t, rs, emap,
                                          corpus, val_docs)
            result.val_history.append({"epoch": epoch, "macro_f1": macro_f1,
                                       "tau": tau})
            log.info("epoch %d: val macro-F1 %.4f (tau %.4f)", epoch, macro_f1, tau)
            if best is None or macro_f1 > best[0]:
                best = (macro_f1, tau, params_r.copy(), params_t.copy())
                bad_epochs = 0
            else:
                bad_epochs += 1
                if bad_epochs >= cfg.patience:
                    break

    result.steps = step
    if best is not None:
        result.best_val_macro_f1, result.best_tau = best[0], best[1]
        result.params_r, result.params_t = best[2], best[3]
    return result
