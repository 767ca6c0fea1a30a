"""HTTP service: rule CRUD with live index updates, prediction, weak-label preview.

Rule edits never retrain the encoders; only the index entries of the
touched rule are rebuilt, so predictions for content governed by other
rules are unchanged.  All mutations are serialized through one lock and
bump a monotonically increasing ruleset revision; the ruleset file is
rewritten atomically (temp file + rename).
"""

from __future__ import annotations

import os
import tempfile
import threading
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel

from . import inference, weaklabel
from .corpus import Document, load_corpus
from .encoder import load_checkpoint
from .errors import RuleSyntaxError, ValidationError
from .exemplars import ExemplarMap
from .metrics import confusion, metrics
from .rules import Rule, Ruleset, apply_ruleset, parse_expr, save_ruleset, to_dsl, load_ruleset


class RuleBody(BaseModel):
    id: Optional[str] = None
    expr: str
    provenance: str = "manual"
    exemplar_ids: list[str] = []


class ExemplarBody(BaseModel):
    exemplar_ids: list[str]


class PredictBody(BaseModel):
    text: str


class WeakLabelPreviewBody(BaseModel):
    strategy: str
    k: float


class ServiceState:
    def __init__(self, state_dir: str):
        self.dir = Path(state_dir)
        self.corpus = load_corpus(self.dir / "corpus.jsonl")
        self.ruleset = load_ruleset(self.dir / "ruleset.jsonl")
        self.params_r, self.params_t, self.manifest = load_checkpoint(
            self.dir / "checkpoint.rbe")
        self.emap = ExemplarMap.from_ruleset(self.ruleset)
        self.index = inference.build_index(self.params_r, self.emap, self.corpus)
        self.cache = None
        cache_path = self.dir / "cache.jsonl"
        if cache_path.exists():
            self.cache = weaklabel.load_embedding_cache(cache_path)
        self.tau = 0.5
        metrics_path = self.dir / "metrics.json"
        if metrics_path.exists():
            import json

            with open(metrics_path, encoding="utf-8") as fh:
                self.tau = json.load(fh).get("tau", 0.5)
        self.revision = 1
        self.lock = threading.Lock()

    # -- mutation helpers ---------------------------------------------------

    def persist_ruleset(self) -> None:
        fd, tmp = tempfile.mkstemp(dir=self.dir, suffix=".tmp")
        os.close(fd)
        try:
            save_ruleset(self.ruleset, tmp)
            os.replace(tmp, self.dir / "ruleset.jsonl")
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise

    def check_exemplars(self, rule_id: str, exemplar_ids: list[str]) -> None:
        for doc_id in exemplar_ids:
            if doc_id not in self.corpus.index:
                raise HTTPException(422, f"unknown exemplar id {doc_id!r}")
            owner = self.emap.reverse.get(doc_id)
            if owner is not None and owner != rule_id:
                raise HTTPException(
                    409, f"exemplar {doc_id!r} already owned by rule {owner!r}")

    def rebuild_rule_entries(self, rule_id: str) -> None:
        """Replace only this rule's index entries; other entries untouched."""
        kept = [e for e in self.index.entries if e.rule_id != rule_id]
        if rule_id in self.emap.pairs:
            fresh = inference.build_index(
                self.params_r,
                ExemplarMap({rule_id: self.emap.pairs[rule_id]}),
                self.corpus,
            )
            kept.extend(fresh.entries)
        self.index = inference.ExemplarIndex(kept, self.index.params_digest)

    def commit(self, rule_id: str) -> None:
        self.emap = ExemplarMap.from_ruleset(self.ruleset)
        self.persist_ruleset()
        self.rebuild_rule_entries(rule_id)
        self.revision += 1


def create_app(state_dir: str) -> FastAPI:
    state = ServiceState(state_dir)
    app = FastAPI(title="rule workbench service")
    app.state.rbe = state

    @app.get("/rules")
    def get_rules():
        covers, _ = apply_ruleset(state.ruleset, state.corpus)
        cover_count = {c.rule_id: len(c.doc_ids) for c in covers}
        return {
            "revision": state.revision,
            "rules": [
                {
                    "id": r.id,
                    "expr": to_dsl(r.expr),
                    "provenance": r.provenance,
                    "exemplar_ids": r.exemplar_ids,
                    "cover_count": cover_count[r.id],
                }
                for r in state.ruleset
            ],
        }

    @app.post("/rules", status_code=201)
    def post_rule(body: RuleBody):
        with state.lock:
            try:
                expr = parse_expr(body.expr)
            except RuleSyntaxError as exc:
                raise HTTPException(400, {"message": str(exc), "offset": exc.offset})
            rule_id = body.id or f"rule-{state.revision:04d}"
            if state.ruleset.get(rule_id) is not None:
                raise HTTPException(409, f"rule id {rule_id!r} already exists")
            state.check_exemplars(rule_id, body.exemplar_ids)
            try:
                rule = Rule(id=rule_id, expr=expr, provenance=body.provenance,
                            exemplar_ids=list(body.exemplar_ids))
            except ValidationError as exc:
                raise HTTPException(400, str(exc))
            state.ruleset = Ruleset(state.ruleset.rules + [rule])
            state.commit(rule_id)
            return {"id": rule_id, "revision": state.revision}

    @app.delete("/rules/{rule_id}")
    def delete_rule(rule_id: str):
        with state.lock:
            if state.ruleset.get(rule_id) is None:
                raise HTTPException(404, f"no rule {rule_id!r}")
            state.ruleset = Ruleset(
                [r for r in state.ruleset if r.id != rule_id])
            state.commit(rule_id)
            return {"revision": state.revision}

    @app.post("/rules/{rule_id}/exemplars")
    def post_exemplars(rule_id: str, body: ExemplarBody):
        with state.lock:
            rule = state.ruleset.get(rule_id)
            if rule is None:
                raise HTTPException(404, f"no rule {rule_id!r}")
            state.check_exemplars(rule_id, body.exemplar_ids)
            for doc_id in body.exemplar_ids:
                if doc_id not in rule.exemplar_ids:
                    rule.exemplar_ids.append(doc_id)
            state.commit(rule_id)
            return {"id": rule_id, "exemplar_ids": rule.exemplar_ids,
                    "revision": state.revision}

    @app.post("/predict")
    def predict(body: PredictBody):
        if not body.text.strip():
            raise HTTPException(400, "text must be non-empty")
        if not state.emap.pairs:
            raise HTTPException(409, "no rule has exemplars; attach some first")
        doc = Document(id="scratch", text=body.text)
        score, fired = inference.score_document(
            state.params_r, state.params_t, state.ruleset, state.emap,
            state.corpus, doc, state.index)
        gp = inference.ground(doc, int(score >= state.tau), score, fired,
                              state.index, state.params_t, state.ruleset, k=3)
        return {
            "label": gp.label,
            "score": gp.score,
            "tau": state.tau,
            "fired_rules": gp.fired_rules,
            "nearest": [
                {"exemplar": e, "rule": r, "sim": s} for e, r, s in gp.nearest
            ],
            "revision": state.revision,
        }

    @app.post("/weaklabel/preview")
    def weaklabel_preview(body: WeakLabelPreviewBody):
        if body.strategy not in weaklabel.STRATEGIES:
            raise HTTPException(422, f"unknown strategy {body.strategy!r}")
        if state.cache is None:
            raise HTTPException(409, "no embedding cache loaded in the state dir")
        doc_ids = [d.id for d in state.corpus]
        try:
            if body.strategy == "distance":
                covers, _ = apply_ruleset(state.ruleset, state.corpus)
                wls = weaklabel.distance_filter(
                    state.ruleset, covers, doc_ids, state.cache, body.k)
            else:
                emap = state.emap
                if body.strategy == "mean":
                    vecs = {r.id: weaklabel.rule_embedding_mean(r, emap, state.cache)
                            for r in state.ruleset if r.id in emap.pairs}
                else:
                    vecs = {r.id: weaklabel.rule_embedding_concat(
                                r, emap, state.corpus, state.cache)
                            for r in state.ruleset if r.id in emap.pairs}
                wls = weaklabel.label_by_similarity(
                    vecs, doc_ids, state.cache, body.k, body.strategy)
        except ValidationError as exc:
            raise HTTPException(422, str(exc))
        rule_positives = {
            doc_id for doc_id, rids in
            apply_ruleset(state.ruleset, state.corpus)[1].items() if rids
        }
        flips = [
            {"doc_id": doc_id,
             "from": int(doc_id in rule_positives),
             "to": wls.labels[doc_id]}
            for doc_id in doc_ids
            if wls.labels[doc_id] != int(doc_id in rule_positives)
        ]
        return {
            "strategy": body.strategy,
            "k": body.k,
            "positives": sum(wls.labels.values()),
            "total": len(doc_ids),
            "eliminated_rules": wls.eliminated_rules,
            "sample_flips": flips[:10],
            "revision": state.revision,
        }

    @app.get("/metrics")
    def get_metrics():
        docs = [d for d in state.corpus.split("test") if d.label is not None]
        if not docs:
            raise HTTPException(409, "no labeled test split in the state corpus")
        preds = {}
        golds = {}
        for doc in docs:
            score, _ = inference.score_document(
                state.params_r, state.params_t, state.ruleset, state.emap,
                state.corpus, doc, state.index)
            preds[doc.id] = int(score >= state.tau)
            golds[doc.id] = doc.label
        out = metrics(confusion(preds, golds))
        out["revision"] = state.revision
        return out

    return app
