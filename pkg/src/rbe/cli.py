"""Command-line front door for the whole pipeline."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import corpus as corpus_mod
from . import induction, inference, rules, training, weaklabel
from .encoder import load_checkpoint, save_checkpoint
from .errors import RBEError, ValidationError
from .exemplars import ExemplarMap, select_exemplars
from .metrics import confusion, metrics

log = logging.getLogger("rbe")


def _write_json(path, obj) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, sort_keys=True, indent=2)
        fh.write("\n")


def _load_state(args):
    """Corpus, ruleset (with exemplars), and checkpoint shared by label/ground."""
    corp = corpus_mod.load_corpus(args.corpus)
    rs = rules.load_ruleset(args.ruleset)
    emap = ExemplarMap.from_ruleset(rs)
    if not emap.pairs:
        raise ValidationError("ruleset carries no exemplar_ids; run select-exemplars")
    params_r, params_t, manifest = load_checkpoint(args.checkpoint)
    return corp, rs, emap, params_r, params_t, manifest


def cmd_synth(args) -> int:
    corp, rs = corpus_mod.make_synthetic(args.seed, args.train_size,
                                         args.val_size, args.test_size)
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    corpus_mod.save_corpus(corp, out / "corpus.jsonl")
    rules.save_ruleset(rs, out / "ruleset.jsonl")
    print(f"wrote {len(corp)} documents and {len(rs)} rules to {out}")
    return 0


def cmd_induce(args) -> int:
    corp = corpus_mod.load_corpus(args.corpus)
    rationales = induction.load_rationales(args.rationales)
    rs = induction.induce_ruleset(rationales, corp, args.top_n, args.min_df)
    rules.save_ruleset(rs, args.output)
    print(f"induced {len(rs)} rules -> {args.output}")
    return 0


def cmd_select_exemplars(args) -> int:
    corp = corpus_mod.load_corpus(args.corpus)
    rs = rules.load_ruleset(args.ruleset)
    emap = select_exemplars(rs, corp, n=args.n, seed=args.seed)
    emap.write_into(rs)
    rules.save_ruleset(rs, args.output)
    print(f"selected exemplars for {len(emap)} of {len(rs)} rules -> {args.output}")
    return 0


def cmd_train(args) -> int:
    corp = corpus_mod.load_corpus(args.corpus)
    rs = rules.load_ruleset(args.ruleset)
    emap = ExemplarMap.from_ruleset(rs)
    cfg = training.TrainConfig(
        lr=args.lr, weight_decay=args.weight_decay, batch_size=args.batch_size,
        max_epochs=args.max_epochs, margin=args.margin, seed=args.seed,
        patience=args.patience, dim=args.dim,
    )
    result = training.train(corp, rs, emap, cfg)
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    save_checkpoint(out / "checkpoint.rbe", result.params_r, result.params_t,
                    seed=cfg.seed, step=result.steps)
    with open(out / "history.jsonl", "w", encoding="utf-8") as fh:
        for row in result.history:
            fh.write(json.dumps(row, sort_keys=True) + "\n")
    _write_json(out / "metrics.json", {
        "val_macro_f1": result.best_val_macro_f1,
        "tau": result.best_tau,
        "steps": result.steps,
        "val_history": result.val_history,
    })
    print(f"trained {result.steps} steps; best val macro-F1 "
          f"{result.best_val_macro_f1:.4f} (tau {result.best_tau:.4f}) -> {out}")
    return 0


def _resolve_tau(args, corp, rs, emap, params_r, params_t) -> float:
    if args.calibrate:
        val_docs = [d for d in corp.split("val") if d.label is not None]
        return inference.calibrate_threshold(params_r, params_t, rs, emap,
                                             corp, val_docs)
    return args.tau


def cmd_label(args) -> int:
    corp, rs, emap, params_r, params_t, _ = _load_state(args)
    tau = _resolve_tau(args, corp, rs, emap, params_r, params_t)
    index = inference.build_index(params_r, emap, corp)
    docs = corp.split(args.split) if args.split else list(corp)
    with open(args.output, "w", encoding="utf-8") as fh:
        for doc in docs:
            score, _ = inference.score_document(params_r, params_t, rs, emap,
                                                corp, doc, index)
            fh.write(json.dumps({
                "id": doc.id, "pred": int(score >= tau), "score": score,
            }, sort_keys=True) + "\n")
    print(f"labeled {len(docs)} documents (tau {tau:.4f}) -> {args.output}")
    return 0


def cmd_ground(args) -> int:
    corp, rs, emap, params_r, params_t, _ = _load_state(args)
    tau = _resolve_tau(args, corp, rs, emap, params_r, params_t)
    index = inference.build_index(params_r, emap, corp)
    docs = corp.split(args.split) if args.split else list(corp)
    with open(args.output, "w", encoding="utf-8") as fh:
        for doc in docs:
            score, fired = inference.score_document(params_r, params_t, rs,
                                                    emap, corp, doc, index)
            gp = inference.ground(doc, int(score >= tau), score, fired, index,
                                  params_t, rs, k=args.k)
            fh.write(json.dumps({
                "doc_id": gp.doc_id, "label": gp.label, "score": gp.score,
                "fired_rules": gp.fired_rules,
                "nearest": [
                    {"exemplar": e, "rule": r, "sim": s} for e, r, s in gp.nearest
                ],
            }, sort_keys=True) + "\n")
    print(f"grounded {len(docs)} documents -> {args.output}")
    return 0


def cmd_embed(args) -> int:
    corp = corpus_mod.load_corpus(args.corpus)
    _, params_t, _ = load_checkpoint(args.checkpoint)
    emap = None
    if args.ruleset:
        emap = ExemplarMap.from_ruleset(rules.load_ruleset(args.ruleset))
    cache = weaklabel.populate_cache(params_t, corp, emap)
    weaklabel.save_embedding_cache(cache, args.output)
    print(f"embedded {len(cache.vectors)} entries -> {args.output}")
    return 0


def _weak_labels(args, corp, rs, cache):
    emap = ExemplarMap.from_ruleset(rs)
    doc_ids = [d.id for d in corp]
    if args.strategy == "mean":
        vecs = {r.id: weaklabel.rule_embedding_mean(r, emap, cache)
                for r in rs if r.id in emap.pairs}
        return weaklabel.label_by_similarity(vecs, doc_ids, cache, args.k, "mean")
    if args.strategy == "concat":
        vecs = {r.id: weaklabel.rule_embedding_concat(r, emap, corp, cache)
                for r in rs if r.id in emap.pairs}
        return weaklabel.label_by_similarity(vecs, doc_ids, cache, args.k, "concat")
    covers, _ = rules.apply_ruleset(rs, corp)
    return weaklabel.distance_filter(rs, covers, doc_ids, cache, args.k,
                                     all_pairs=args.all_pairs)


def cmd_weak_label(args) -> int:
    corp = corpus_mod.load_corpus(args.corpus)
    rs = rules.load_ruleset(args.ruleset)
    cache = weaklabel.load_embedding_cache(args.cache)
    wls = _weak_labels(args, corp, rs, cache)
    with open(args.output, "w", encoding="utf-8") as fh:
        for doc in corp:
            fh.write(json.dumps({
                "id": doc.id, "text": doc.text,
                "label": wls.labels[doc.id], "split": "train",
            }, sort_keys=True) + "\n")
    positives = sum(wls.labels.values())
    print(f"{args.strategy} (k={args.k}): {positives}/{len(corp)} positives "
          f"-> {args.output}")
    if wls.eliminated_rules:
        print(f"eliminated rules: {', '.join(wls.eliminated_rules)}")
    return 0


def cmd_sweep(args) -> int:
    corp = corpus_mod.load_corpus(args.corpus)
    rs = rules.load_ruleset(args.ruleset)
    cache = weaklabel.load_embedding_cache(args.cache)
    golds = {d.id: d.label for d in corp if d.label is not None}
    lo, hi, steps = args.k_min, args.k_max, args.k_steps
    rows = []
    for i in range(steps):
        k = lo + (hi - lo) * i / max(1, steps - 1)
        args_k = argparse.Namespace(**{**vars(args), "k": k})
        wls = _weak_labels(args_k, corp, rs, cache)
        row = {"k": k, "positives": sum(wls.labels.values())}
        if golds:
            preds = {i_: wls.labels[i_] for i_ in golds}
            row.update(metrics(confusion(preds, golds)))
        rows.append(row)
    _write_json(args.output, {"strategy": args.strategy, "grid": rows})
    print(f"swept {steps} thresholds -> {args.output}")
    return 0


def cmd_eval(args) -> int:
    corp = corpus_mod.load_corpus(args.corpus)
    preds: dict[str, int] = {}
    with open(args.preds, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                preds[obj["id"]] = int(obj["pred"])
            except (json.JSONDecodeError, KeyError, ValueError) as exc:
                raise ValidationError(
                    f"{args.preds}:{lineno}: bad prediction: {exc}") from exc
    docs = corp.split(args.split) if args.split else list(corp)
    golds = {d.id: d.label for d in docs if d.label is not None}
    preds = {i: p for i, p in preds.items() if i in golds} if args.split else preds
    result = metrics(confusion(preds, golds))
    _write_json(args.output, result)
    print(json.dumps(result, sort_keys=True))
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(args.state_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rbe", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("synth", help="generate the synthetic fixture corpus")
    sp.add_argument("--seed", type=int, default=7)
    sp.add_argument("--train-size", type=int, default=200)
    sp.add_argument("--val-size", type=int, default=60)
    sp.add_argument("--test-size", type=int, default=60)
    sp.add_argument("-o", "--output", required=True)
    sp.set_defaults(func=cmd_synth)

    sp = sub.add_parser("induce", help="induce rules from annotator rationales")
    sp.add_argument("--rationales", required=True)
    sp.add_argument("--corpus", required=True)
    sp.add_argument("--top-n", type=int, default=100)
    sp.add_argument("--min-df", type=int, default=1)
    sp.add_argument("-o", "--output", required=True)
    sp.set_defaults(func=cmd_induce)

    sp = sub.add_parser("select-exemplars", help="pair rules with exemplars")
    sp.add_argument("--corpus", required=True)
    sp.add_argument("--ruleset", required=True)
    sp.add_argument("-n", type=int, default=1)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("-o", "--output", required=True)
    sp.set_defaults(func=cmd_select_exemplars)

    sp = sub.add_parser("train", help="train the dual encoder")
    sp.add_argument("--corpus", required=True)
    sp.add_argument("--ruleset", required=True)
    sp.add_argument("--lr", type=float, default=2e-5)
    sp.add_argument("--weight-decay", type=float, default=0.01)
    sp.add_argument("--batch-size", type=int, default=8)
    sp.add_argument("--max-epochs", type=int, default=10)
    sp.add_argument("--margin", type=float, default=0.5)
    sp.add_argument("--patience", type=int, default=3)
    sp.add_argument("--dim", type=int, default=64)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("-o", "--output", required=True)
    sp.set_defaults(func=cmd_train)

    for name, func in (("label", cmd_label), ("ground", cmd_ground)):
        sp = sub.add_parser(name, help=f"{name} documents with a trained model")
        sp.add_argument("--corpus", required=True)
        sp.add_argument("--ruleset", required=True)
        sp.add_argument("--checkpoint", required=True)
        sp.add_argument("--tau", type=float, default=0.5)
        sp.add_argument("--calibrate", action="store_true",
                        help="pick tau on the val split instead of --tau")
        sp.add_argument("--split", choices=corpus_mod.SPLITS, default=None)
        if name == "ground":
            sp.add_argument("-K", "--k", type=int, default=3)
        sp.add_argument("-o", "--output", required=True)
        sp.set_defaults(func=func)

    sp = sub.add_parser("embed", help="populate an embedding cache with the "
                                      "internal text encoder")
    sp.add_argument("--corpus", required=True)
    sp.add_argument("--checkpoint", required=True)
    sp.add_argument("--ruleset", default=None,
                    help="also embed each rule's concatenated exemplar text")
    sp.add_argument("-o", "--output", required=True)
    sp.set_defaults(func=cmd_embed)

    sp = sub.add_parser("weak-label", help="unsupervised weak labeling")
    sp.add_argument("--corpus", required=True)
    sp.add_argument("--ruleset", required=True)
    sp.add_argument("--cache", required=True)
    sp.add_argument("--strategy", choices=weaklabel.STRATEGIES, required=True)
    sp.add_argument("--k", type=float, required=True)
    sp.add_argument("--all-pairs", action="store_true")
    sp.add_argument("-o", "--output", required=True)
    sp.set_defaults(func=cmd_weak_label)

    sp = sub.add_parser("sweep", help="weak-label metrics across a k grid")
    sp.add_argument("--corpus", required=True)
    sp.add_argument("--ruleset", required=True)
    sp.add_argument("--cache", required=True)
    sp.add_argument("--strategy", choices=weaklabel.STRATEGIES, required=True)
    sp.add_argument("--k-min", type=float, default=-1.0)
    sp.add_argument("--k-max", type=float, default=1.0)
    sp.add_argument("--k-steps", type=int, default=20)
    sp.add_argument("--all-pairs", action="store_true")
    sp.add_argument("-o", "--output", required=True)
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("eval", help="score predictions against gold labels")
    sp.add_argument("--preds", required=True)
    sp.add_argument("--corpus", required=True)
    sp.add_argument("--split", choices=corpus_mod.SPLITS, default=None)
    sp.add_argument("-o", "--output", required=True)
    sp.set_defaults(func=cmd_eval)

    sp = sub.add_parser("serve", help="HTTP service over a state directory")
    sp.add_argument("--state-dir", required=True)
    sp.add_argument("--host", default="127.0.0.1")
    sp.add_argument("--port", type=int, default=8321)
    sp.set_defaults(func=cmd_serve)

    return p


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (RBEError, OSError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
