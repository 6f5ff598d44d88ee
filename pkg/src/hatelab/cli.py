"""Command-line entry point chaining the pipeline stages.

Every subcommand reads and writes the documented file formats, so stages
are independently re-runnable and intermediate artifacts stay inspectable.
Exit codes: 0 success, 1 usage error, 2 data error. Reports go to stdout
or --out; logs go to stderr. HATELAB_CONFIG may point to a JSON config
file supplying defaults; explicit flags override it.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from functools import lru_cache
from importlib import resources
from pathlib import Path

from . import __version__, corpus, review, segment
from .annotation import (
    AssignmentPlan,
    Decision,
    LabelStore,
    adjudicate,
    agreement_timeline,
    cohen_kappa,
    default_characteristics,
    make_assignments,
    percent_agreement,
)
from .errors import HatelabError
from .features import FeatureConfig
from .lexicon import load_lexicon, merge_lexicons
from .models import (
    HATE,
    NOT_HATE,
    Dataset,
    Example,
    ModelArtifact,
    ModelSpec,
    cross_validate,
    predict,
    train_model,
)

log = logging.getLogger("hatelab")

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2


class UsageError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors exit 1, not argparse's 2
        raise UsageError(message)


@lru_cache(maxsize=1)
def _env_config() -> dict:
    path = os.environ.get("HATELAB_CONFIG")
    if not path:
        return {}
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read HATELAB_CONFIG {path}: {exc}") from exc


def _resolve(args, key: str, default=None, required: bool = False):
    value = getattr(args, key, None)
    if value is None:
        value = _env_config().get(key, default)
    if value is None and required:
        raise UsageError(f"--{key.replace('_', '-')} is required (flag or HATELAB_CONFIG)")
    return value


def _emit(payload: dict, out: str | None) -> None:
    text = json.dumps(payload, ensure_ascii=False, indent=2)
    if out:
        Path(out).write_text(text + "\n", encoding="utf-8")
        log.info("wrote %s", out)
    else:
        print(text)


def _packaged(name: str) -> Path:
    return Path(resources.files("hatelab").joinpath("data", name))


def _load_labels_csv(path: str) -> dict[str, str]:
    """post_id -> hate/not-hate from any CSV bearing post_id and decision."""
    labels: dict[str, str] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            decision = (row.get("decision") or "").strip()
            if decision not in ("Yes", "No"):
                continue
            labels[row["post_id"]] = HATE if decision == "Yes" else NOT_HATE
    return labels


def _feature_config(args) -> FeatureConfig:
    return FeatureConfig(
        unit=_resolve(args, "unit", "word"),
        n_lo=int(_resolve(args, "ngram_lo", 1)),
        n_hi=int(_resolve(args, "ngram_hi", 1)),
        min_count=int(_resolve(args, "min_count", 1)),
    )


def _model_spec(args) -> ModelSpec:
    model = _resolve(args, "model", required=True)
    if model == "svm":
        params = {"lambda_": float(_resolve(args, "svm_lambda", 1e-4)),
                  "epochs": int(_resolve(args, "epochs", 10))}
        return ModelSpec("svm", _feature_config(args), params)
    if model == "brf":
        params = {"n_trees": int(_resolve(args, "trees", 50)),
                  "max_depth": int(_resolve(args, "depth", 8))}
        fps = _resolve(args, "features_per_split")
        if fps is not None:
            params["features_per_split"] = int(fps)
        return ModelSpec("brf", _feature_config(args), params)
    if model == "fasttext":
        char_lo = int(_resolve(args, "char_lo", 2))
        char_hi = int(_resolve(args, "char_hi", 5))
        params = {
            "dim": int(_resolve(args, "dim", 100)),
            "lr": float(_resolve(args, "lr", 0.1)),
            "epochs": int(_resolve(args, "epochs", 25)),
            "word_ngrams": int(_resolve(args, "word_ngrams", 2)),
            "char_ngrams": (char_lo, char_hi) if char_hi >= char_lo > 0 else None,
            "buckets": int(_resolve(args, "buckets", 65536)),
        }
        return ModelSpec("fasttext", None, params)
    raise UsageError(f"unknown model {model!r}")


def cmd_ingest(args) -> int:
    posts, report = corpus.ingest(_resolve(args, "input", required=True))
    _emit({"config": {"input": args.input}, **report.to_dict()}, args.out)
    return EXIT_OK


def _pipeline_config(args, seed: int) -> corpus.PipelineConfig:
    lexicon_path = _resolve(args, "lexicon", required=True)
    dictionary_path = _resolve(args, "dictionary") or _packaged("burmese_dictionary.txt")
    stopword_path = _resolve(args, "stopwords") or _packaged("burmese_stopwords.txt")
    return corpus.PipelineConfig(
        lexicon=load_lexicon(lexicon_path, "merged"),
        dictionary=segment.SegmentDictionary.load(dictionary_path),
        stopwords=segment.load_stopwords(stopword_path),
        min_syllables=int(_resolve(args, "min_syllables", 3)),
        ratio_threshold=float(_resolve(args, "ratio_threshold", 0.5)),
        seed=seed,
    )


def cmd_clean(args) -> int:
    seed = int(_resolve(args, "seed", required=True))
    config = _pipeline_config(args, seed)
    posts, ingest_report = corpus.ingest(_resolve(args, "input", required=True))
    cleaned, report = corpus.clean_pipeline(posts, config)
    out = _resolve(args, "out", required=True)
    corpus.write_corpus(cleaned, out)
    log.info("wrote %d posts to %s", len(cleaned), out)
    payload = {
        "config": {
            "input": args.input, "lexicon": args.lexicon, "seed": seed,
            "min_syllables": config.min_syllables,
            "ratio_threshold": config.ratio_threshold,
        },
        "ingest": ingest_report.to_dict(),
        "pipeline": report.to_dict(),
    }
    _emit(payload, args.report)
    return EXIT_OK


def cmd_lexicon_merge(args) -> int:
    a = load_lexicon(_resolve(args, "a", required=True), _resolve(args, "a_tag", "a"))
    b = load_lexicon(_resolve(args, "b", required=True), _resolve(args, "b_tag", "b"))
    merged, report = merge_lexicons(a, b)
    out = _resolve(args, "out", required=True)
    with open(out, "w", encoding="utf-8") as fh:
        fh.write("# merged lexicon: term<TAB>source<TAB>note\n")
        for term in merged.terms:
            fh.write(f"{term.term}\t{term.source}\t{term.note}\n")
    log.info("wrote %d terms to %s", len(merged), out)
    _emit({"config": {"a": args.a, "b": args.b}, **report.to_dict()}, args.report)
    return EXIT_OK


def cmd_assign(args) -> int:
    seed = int(_resolve(args, "seed", required=True))
    posts = corpus.read_corpus(_resolve(args, "corpus", required=True))
    annotators = [a.strip() for a in _resolve(args, "annotators", required=True).split(",") if a.strip()]
    plan = make_assignments(
        annotators, [p.post_id for p in posts],
        batch_size=int(_resolve(args, "batch_size", 100)),
        paired_rounds=int(_resolve(args, "rounds", 4)),
        seed=seed,
    )
    plan.save(_resolve(args, "out", required=True))
    log.info("plan: %d pairs, %d paired rounds", len(plan.pairs), plan.paired_rounds)
    summary = {"pairs": [list(p) for p in plan.pairs],
               "paired_posts": sum(len(b) for rounds in plan.rounds for b in rounds),
               "solo_sizes": {a: len(v) for a, v in plan.solo.items()}}
    _emit({"config": {"seed": seed}, **summary}, args.report)
    return EXIT_OK


def cmd_agreement(args) -> int:
    store = LabelStore(_resolve(args, "labels", required=True))
    plan = AssignmentPlan.load(_resolve(args, "plan", required=True))
    round_no = _resolve(args, "round")
    labels = store.all_labels()
    if round_no is None:
        _emit({"config": {}, "timeline": agreement_timeline(labels, plan).to_dict()},
              args.out)
        return EXIT_OK
    round_no = int(round_no)
    result = []
    for pair_idx, (a, b) in enumerate(plan.pairs):
        batch = set(plan.rounds[pair_idx][round_no - 1]) if 1 <= round_no <= plan.paired_rounds else set()
        labels_a = [l for l in labels if l.annotator_id == a and l.post_id in batch]
        labels_b = [l for l in labels if l.annotator_id == b and l.post_id in batch]
        if batch and len(labels_a) == len(batch) == len(labels_b):
            result.append({
                "pair": [a, b],
                "percent_agreement": percent_agreement(labels_a, labels_b),
                "cohen_kappa": cohen_kappa(labels_a, labels_b),
            })
        else:
            result.append({"pair": [a, b], "percent_agreement": None,
                           "cohen_kappa": None, "note": "round incomplete"})
    _emit({"config": {"round": round_no}, "pairs": result}, args.out)
    return EXIT_OK


def cmd_adjudicate(args) -> int:
    store = LabelStore(_resolve(args, "labels", required=True))
    plan = AssignmentPlan.load(_resolve(args, "plan", required=True))
    facilitator: dict[str, tuple[Decision, tuple[str, ...]]] = {}
    fac_path = _resolve(args, "facilitator_decisions")
    if fac_path:
        with open(fac_path, newline="", encoding="utf-8") as fh:
            for row in csv.DictReader(fh):
                chars = tuple(c for c in (row.get("characteristics") or "").split(";") if c)
                facilitator[row["post_id"]] = (Decision(row["decision"]), chars)

    finals = []
    for pair_idx, (a, b) in enumerate(plan.pairs):
        for batch in plan.rounds[pair_idx]:
            for post_id in batch:
                la = store.label_for(post_id, a)
                lb = store.label_for(post_id, b)
                if la is None or lb is None:
                    continue
                fac = facilitator.get(post_id)
                final = adjudicate(post_id, la, lb,
                                   facilitator_decision=fac[0] if fac else None,
                                   facilitator_characteristics=fac[1] if fac else ())
                finals.append(final)
    for annotator, solo_posts in plan.solo.items():
        for post_id in solo_posts:
            label = store.label_for(post_id, annotator)
            if label is None:
                continue
            finals.append(adjudicate(post_id, label, label))

    out = _resolve(args, "out", required=True)
    with open(out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["post_id", "decision", "status", "characteristics"])
        for final in finals:
            writer.writerow([final.post_id,
                             final.decision.value if final.decision else "",
                             final.status.value, ";".join(final.characteristics)])
    pending = sum(1 for f in finals if f.decision is None)
    log.info("wrote %d final labels to %s (%d need a facilitator)", len(finals), out, pending)
    _emit({"config": {}, "final_labels": len(finals), "needs_facilitator": pending},
          args.report)
    return EXIT_OK


def _dataset(corpus_path: str, labels_path: str) -> Dataset:
    posts = corpus.read_corpus(corpus_path)
    labels = _load_labels_csv(labels_path)
    examples = [Example(p, labels[p.post_id]) for p in posts if p.post_id in labels]
    ds = Dataset(examples)
    ds.validate()
    return ds


def cmd_train(args) -> int:
    seed = int(_resolve(args, "seed", required=True))
    spec = _model_spec(args)
    ds = _dataset(_resolve(args, "corpus", required=True),
                  _resolve(args, "labels", required=True))
    oversample = bool(_resolve(args, "oversample", False))
    k = int(_resolve(args, "cv", 5))
    log.info("cross-validating %s on %d examples (k=%d, oversample=%s)",
             spec.model_type, len(ds), k, oversample)
    report = cross_validate(ds, spec, k=k, seed=seed, oversample=oversample)

    train_ds = ds
    if oversample:
        from .models import random_oversample
        train_ds = random_oversample(ds, seed)
    artifact = train_model(train_ds, spec, seed)
    out = _resolve(args, "out", required=True)
    artifact.save(out)
    log.info("wrote model to %s", out)
    _emit({"config": {"spec": spec.describe(), "seed": seed, "cv": k,
                      "oversample": oversample},
           "cv_report": report.to_dict()}, args.report)
    return EXIT_OK


def cmd_evaluate(args) -> int:
    artifact = ModelArtifact.load(_resolve(args, "model", required=True))
    posts = corpus.read_corpus(_resolve(args, "corpus", required=True))
    gold = _load_labels_csv(_resolve(args, "labels", required=True))
    scoped = [p for p in posts if p.post_id in gold]
    predictions = {p.post_id: predict(artifact, p)[0] for p in scoped}
    from .models import evaluate as evaluate_predictions
    report = evaluate_predictions(predictions, {p.post_id: gold[p.post_id] for p in scoped})
    _emit({"config": {"model": args.model}, "report": report.to_dict()}, args.out)
    return EXIT_OK


def cmd_predict(args) -> int:
    artifact = ModelArtifact.load(_resolve(args, "model", required=True))
    posts = corpus.read_corpus(_resolve(args, "corpus", required=True))
    out = _resolve(args, "out", required=True)
    with open(out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["post_id", "label", "score"])
        for post in posts:
            label, score = predict(artifact, post)
            writer.writerow([post.post_id, label, f"{score:.6f}"])
    log.info("wrote predictions for %d posts to %s", len(posts), out)
    return EXIT_OK


def cmd_review_sample(args) -> int:
    seed = int(_resolve(args, "seed", required=True))
    artifact = ModelArtifact.load(_resolve(args, "model", required=True))
    posts = corpus.read_corpus(_resolve(args, "corpus", required=True))
    items = review.infer_batch(artifact, posts)
    sample = review.sample_for_review(items, _resolve(args, "strategy", "uncertainty"),
                                      int(_resolve(args, "n", required=True)), seed)
    text_of = {p.post_id: p.text for p in posts}
    out = _resolve(args, "out", required=True)
    with open(out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["post_id", "model_label", "model_score",
                         "lexicon_hit_count", "text", "expert_label"])
        for item in sample:
            writer.writerow([item.post_id, item.model_label, f"{item.model_score:.6f}",
                             item.lexicon_hit_count, text_of[item.post_id], ""])
    log.info("wrote %d review items to %s", len(sample), out)
    return EXIT_OK


def cmd_review_report(args) -> int:
    items = []
    with open(_resolve(args, "items", required=True), newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            expert = (row.get("expert_label") or "").strip()
            if expert in ("Yes", "No"):  # annotation vocabulary accepted too
                expert = HATE if expert == "Yes" else NOT_HATE
            item = review.ReviewItem(
                post_id=row["post_id"],
                model_label=row["model_label"],
                model_score=float(row["model_score"]),
                lexicon_hit_count=int(row["lexicon_hit_count"]),
            )
            items.append(item.with_expert(expert) if expert else item)
    analysis = review.disagreement_report(items)
    _emit({"config": {}, **analysis.to_dict()}, args.out)
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .server import create_app

    auth_path = _resolve(args, "auth", required=True)
    auth = json.loads(Path(auth_path).read_text(encoding="utf-8"))
    plan = AssignmentPlan.load(_resolve(args, "plan", required=True))
    posts = corpus.read_corpus(_resolve(args, "corpus", required=True))
    store = LabelStore(_resolve(args, "labels", required=True),
                       characteristics=default_characteristics())
    app = create_app(plan=plan, store=store, posts=posts,
                     annotator_passcodes=auth.get("annotators", {}),
                     facilitator_passcodes=auth.get("facilitators", {}))
    host = _resolve(args, "host", "127.0.0.1")
    port = int(_resolve(args, "port", 8000))
    log.info("serving on %s:%d", host, port)
    uvicorn.run(app, host=host, port=port, log_level="warning")
    return EXIT_OK


def build_parser() -> Parser:
    parser = Parser(prog="hatelab", description=__doc__)
    parser.add_argument("--version", action="version", version=f"hatelab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse a posts CSV and report row quality")
    p.add_argument("--in", dest="input")
    p.add_argument("--out")
    p.set_defaults(handler=cmd_ingest)

    p = sub.add_parser("clean", help="run the cleaning pipeline to a JSONL corpus")
    p.add_argument("--in", dest="input")
    p.add_argument("--lexicon")
    p.add_argument("--dictionary")
    p.add_argument("--stopwords")
    p.add_argument("--min-syllables", dest="min_syllables", type=int)
    p.add_argument("--ratio-threshold", dest="ratio_threshold", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.add_argument("--report")
    p.set_defaults(handler=cmd_clean)

    lex = sub.add_parser("lexicon", help="lexicon operations")
    lex_sub = lex.add_subparsers(dest="lexicon_command", required=True)
    p = lex_sub.add_parser("merge", help="merge two lexicons with a duplicate report")
    p.add_argument("--a")
    p.add_argument("--a-tag", dest="a_tag")
    p.add_argument("--b")
    p.add_argument("--b-tag", dest="b_tag")
    p.add_argument("--out")
    p.add_argument("--report")
    p.set_defaults(handler=cmd_lexicon_merge)

    p = sub.add_parser("assign", help="build the paired labelling plan")
    p.add_argument("--corpus")
    p.add_argument("--annotators")
    p.add_argument("--batch-size", dest="batch_size", type=int)
    p.add_argument("--rounds", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.add_argument("--report")
    p.set_defaults(handler=cmd_assign)

    p = sub.add_parser("agreement", help="per-pair agreement for a round, or the full timeline")
    p.add_argument("--labels")
    p.add_argument("--plan")
    p.add_argument("--round", type=int)
    p.add_argument("--out")
    p.set_defaults(handler=cmd_agreement)

    p = sub.add_parser("adjudicate", help="resolve pair labels into final labels")
    p.add_argument("--labels")
    p.add_argument("--plan")
    p.add_argument("--facilitator-decisions", dest="facilitator_decisions")
    p.add_argument("--out")
    p.add_argument("--report")
    p.set_defaults(handler=cmd_adjudicate)

    p = sub.add_parser("train", help="cross-validate and train a classifier")
    p.add_argument("--model", choices=["svm", "brf", "fasttext"])
    p.add_argument("--corpus")
    p.add_argument("--labels")
    p.add_argument("--cv", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--oversample", action="store_const", const=True, default=None)
    p.add_argument("--out")
    p.add_argument("--report")
    p.add_argument("--unit", choices=["word", "char", "syllable"])
    p.add_argument("--ngram-lo", dest="ngram_lo", type=int)
    p.add_argument("--ngram-hi", dest="ngram_hi", type=int)
    p.add_argument("--min-count", dest="min_count", type=int)
    p.add_argument("--epochs", type=int)
    p.add_argument("--svm-lambda", dest="svm_lambda", type=float)
    p.add_argument("--trees", type=int)
    p.add_argument("--depth", type=int)
    p.add_argument("--features-per-split", dest="features_per_split", type=int)
    p.add_argument("--dim", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--word-ngrams", dest="word_ngrams", type=int)
    p.add_argument("--char-lo", dest="char_lo", type=int)
    p.add_argument("--char-hi", dest="char_hi", type=int)
    p.add_argument("--buckets", type=int)
    p.set_defaults(handler=cmd_train)

    p = sub.add_parser("evaluate", help="score a model against gold labels")
    p.add_argument("--model")
    p.add_argument("--corpus")
    p.add_argument("--labels")
    p.add_argument("--out")
    p.set_defaults(handler=cmd_evaluate)

    p = sub.add_parser("predict", help="label a corpus with a trained model")
    p.add_argument("--model")
    p.add_argument("--corpus")
    p.add_argument("--out")
    p.set_defaults(handler=cmd_predict)

    rev = sub.add_parser("review", help="expert-review loop")
    rev_sub = rev.add_subparsers(dest="review_command", required=True)
    p = rev_sub.add_parser("sample", help="pick posts for expert review")
    p.add_argument("--model")
    p.add_argument("--corpus")
    p.add_argument("--strategy", choices=["uncertainty", "random", "top_positive"])
    p.add_argument("--n", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(handler=cmd_review_sample)
    p = rev_sub.add_parser("report", help="categorize model errors from reviewed items")
    p.add_argument("--items")
    p.add_argument("--out")
    p.set_defaults(handler=cmd_review_report)

    p = sub.add_parser("serve", help="run the annotation HTTP server")
    p.add_argument("--port", type=int)
    p.add_argument("--host")
    p.add_argument("--labels")
    p.add_argument("--plan")
    p.add_argument("--corpus")
    p.add_argument("--auth")
    p.set_defaults(handler=cmd_serve)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO,
                        format="%(levelname)s %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.handler(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except HatelabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
