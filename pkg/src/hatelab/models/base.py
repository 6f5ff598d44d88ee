"""Dataset and model-artifact plumbing shared by the three classifiers.

An artifact is one JSON file: header (model type, version, hyperparameters,
seed, feature config) plus parameter arrays, with fixed field order so the
bytes are reproducible. Artifacts are self-contained: prediction needs no
state beyond the file.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from ..corpus import CleanPost
from ..errors import FeatureConfigMismatch, IdMismatch, SingleClass
from ..features import SparseVector, Vocab, hashed_ngram_ids, tfidf_vectorize

HATE = "hate"
NOT_HATE = "not-hate"
LABELS = (HATE, NOT_HATE)


@dataclass(frozen=True)
class Example:
    post: CleanPost
    label: str

    @property
    def post_id(self) -> str:
        return self.post.post_id


@dataclass
class Dataset:
    examples: list[Example]

    @classmethod
    def from_corpus(cls, posts: Sequence[CleanPost], labels: dict[str, str]) -> "Dataset":
        examples = [Example(p, labels[p.post_id]) for p in posts if p.post_id in labels]
        ds = cls(examples)
        ds.validate()
        return ds

    def validate(self) -> None:
        ids = [e.post_id for e in self.examples]
        if len(set(ids)) != len(ids):
            raise ValueError("post_ids must be unique")
        bad = {e.label for e in self.examples} - set(LABELS)
        if bad:
            raise ValueError(f"labels must be binary {LABELS}, got extra {bad}")

    def class_counts(self) -> dict[str, int]:
        counts = {HATE: 0, NOT_HATE: 0}
        for e in self.examples:
            counts[e.label] += 1
        return counts

    def __len__(self) -> int:
        return len(self.examples)


def random_oversample(train: Dataset, seed: int) -> Dataset:
    """Duplicate minority examples (sampling with replacement) until class
    counts are equal; every original example is retained. Apply to training
    folds only, never to evaluation data."""
    counts = train.class_counts()
    if counts[HATE] == 0 or counts[NOT_HATE] == 0:
        raise SingleClass(f"both classes required, got {counts}")
    minority = HATE if counts[HATE] < counts[NOT_HATE] else NOT_HATE
    deficit = abs(counts[HATE] - counts[NOT_HATE])
    if deficit == 0:
        return Dataset(list(train.examples))
    pool = [e for e in train.examples if e.label == minority]
    rng = np.random.default_rng(seed)
    picks = rng.integers(0, len(pool), size=deficit)
    return Dataset(list(train.examples) + [pool[i] for i in picks])


@dataclass
class ModelArtifact:
    model_type: str  # "svm" | "brf" | "fasttext"
    hyperparameters: dict
    feature_config: dict
    params: dict
    seed: int
    training_log: dict = field(default_factory=dict)
    format_version: int = 1

    def to_dict(self) -> dict:
        return {
            "model_type": self.model_type,
            "format_version": self.format_version,
            "hyperparameters": self.hyperparameters,
            "seed": self.seed,
            "feature_config": self.feature_config,
            "params": self.params,
            "training_log": self.training_log,
        }

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), ensure_ascii=False),
                              encoding="utf-8")

    @classmethod
    def from_dict(cls, d: dict) -> "ModelArtifact":
        return cls(
            model_type=d["model_type"],
            hyperparameters=d["hyperparameters"],
            feature_config=d["feature_config"],
            params=d["params"],
            seed=d["seed"],
            training_log=d.get("training_log", {}),
            format_version=d["format_version"],
        )

    @classmethod
    def load(cls, path: str | Path) -> "ModelArtifact":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def _sigmoid(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    ex = math.exp(x)
    return ex / (1.0 + ex)


def _prepared(artifact: ModelArtifact) -> dict:
    """Decode JSON-shaped parameters into numpy state once per artifact."""
    cache = getattr(artifact, "_prepared_cache", None)
    if cache is not None:
        return cache
    if artifact.model_type not in ("svm", "brf", "fasttext"):
        raise FeatureConfigMismatch(f"unknown model type {artifact.model_type!r}")
    kind = artifact.feature_config.get("kind")
    state: dict = {}
    try:
        if kind == "tfidf_vocab":
            state["vocab"] = Vocab.from_dict(artifact.feature_config["vocab"])
        elif kind == "hashed_ngrams":
            fc = artifact.feature_config
            state["hash"] = (fc["word_ngrams"],
                             tuple(fc["char_ngrams"]) if fc["char_ngrams"] else None,
                             fc["buckets"])
        else:
            raise FeatureConfigMismatch(f"unknown feature config kind {kind!r}")
    except KeyError as exc:
        raise FeatureConfigMismatch(f"malformed feature config: missing {exc}") from exc
    if artifact.model_type == "svm":
        state["weights"] = np.asarray(artifact.params["weights"], dtype=np.float64)
        state["bias"] = float(artifact.params["bias"])
    elif artifact.model_type == "brf":
        state["trees"] = artifact.params["trees"]
        state["n_features"] = artifact.params["n_features"]
    else:  # fasttext
        state["emb"] = np.asarray(artifact.params["embeddings"], dtype=np.float64)
        state["w_out"] = np.asarray(artifact.params["output_weights"], dtype=np.float64)
        state["b_out"] = np.asarray(artifact.params["output_bias"], dtype=np.float64)
    artifact._prepared_cache = state
    return state


def featurize_for(artifact: ModelArtifact, post: CleanPost) -> SparseVector | list[int]:
    """Featurize an input with the model's own feature configuration."""
    state = _prepared(artifact)
    if "vocab" in state:
        return tfidf_vectorize(post, state["vocab"])
    word_ngrams, char_ngrams, buckets = state["hash"]
    return hashed_ngram_ids(post, word_ngrams, char_ngrams, buckets)


def predict(artifact: ModelArtifact, post: CleanPost) -> tuple[str, float]:
    """(label, score); the score is the calibration-free chance of hate in
    [0, 1]: logistic margin for the SVM, vote fraction for the forest,
    softmax probability for the fastText-style model."""
    state = _prepared(artifact)
    features = featurize_for(artifact, post)
    if artifact.model_type == "svm":
        return _predict_svm_vector(state, features)
    if artifact.model_type == "brf":
        return _predict_brf_vector(state, features)
    return _predict_fasttext_ids(state, features)


def _predict_svm_vector(state: dict, vec: SparseVector) -> tuple[str, float]:
    weights = state["weights"]
    if vec.nnz and int(vec.indices[-1]) >= len(weights):
        raise FeatureConfigMismatch(
            f"vector index {int(vec.indices[-1])} out of range for {len(weights)} weights")
    margin = float(weights[vec.indices] @ vec.weights) + state["bias"]
    score = _sigmoid(margin)
    return (HATE if margin > 0 else NOT_HATE), score


def _predict_brf_vector(state: dict, vec: SparseVector) -> tuple[str, float]:
    n_features = state["n_features"]
    if vec.nnz and int(vec.indices[-1]) >= n_features:
        raise FeatureConfigMismatch(
            f"vector index {int(vec.indices[-1])} out of range for {n_features} features")
    values = dict(zip((int(i) for i in vec.indices), (float(w) for w in vec.weights)))
    votes = 0
    trees = state["trees"]
    for tree in trees:
        node = tree
        while "leaf" not in node:
            x = values.get(node["feature"], 0.0)
            node = node["left"] if x <= node["threshold"] else node["right"]
        n_hate, n_not = node["leaf"]
        votes += 1 if n_hate > n_not else 0
    score = votes / len(trees)
    return (HATE if score > 0.5 else NOT_HATE), score


def _predict_fasttext_ids(state: dict, ids: list[int]) -> tuple[str, float]:
    emb = state["emb"]
    if ids:
        h = emb[np.asarray(ids, dtype=np.int64)].mean(axis=0)
    else:
        h = np.zeros(emb.shape[1], dtype=np.float64)
    z = state["w_out"] @ h + state["b_out"]
    z = z - z.max()
    p = np.exp(z)
    p /= p.sum()
    score = float(p[0])  # index 0 is the hate class
    return (HATE if score > 0.5 else NOT_HATE), score


@dataclass
class ClassMetrics:
    precision: float
    recall: float
    f1: float

    def to_dict(self) -> dict:
        return {"precision": self.precision, "recall": self.recall, "f1": self.f1}


@dataclass
class EvalReport:
    per_class: dict[str, ClassMetrics]
    macro_precision: float
    macro_recall: float
    macro_f1: float
    confusion: dict[str, dict[str, int]]  # confusion[gold][predicted]
    per_fold: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "per_class": {c: m.to_dict() for c, m in self.per_class.items()},
            "macro_precision": self.macro_precision,
            "macro_recall": self.macro_recall,
            "macro_f1": self.macro_f1,
            "confusion": self.confusion,
            "per_fold": self.per_fold,
        }


def evaluate(predictions: dict[str, str], gold: dict[str, str]) -> EvalReport:
    """Per-class precision/recall/F1 with 0/0 defined as 0; macro is the
    unweighted class mean; confusion entries sum to the example count."""
    if set(predictions) != set(gold):
        missing = sorted(set(gold) - set(predictions))[:5]
        extra = sorted(set(predictions) - set(gold))[:5]
        raise IdMismatch(f"id sets differ (missing {missing}, extra {extra})")
    confusion = {g: {p: 0 for p in LABELS} for g in LABELS}
    for pid, gold_label in gold.items():
        confusion[gold_label][predictions[pid]] += 1

    def safe(num: float, den: float) -> float:
        return num / den if den else 0.0

    per_class = {}
    for cls in LABELS:
        tp = confusion[cls][cls]
        fp = sum(confusion[other][cls] for other in LABELS if other != cls)
        fn = sum(confusion[cls][other] for other in LABELS if other != cls)
        precision = safe(tp, tp + fp)
        recall = safe(tp, tp + fn)
        f1 = safe(2 * precision * recall, precision + recall)
        per_class[cls] = ClassMetrics(precision, recall, f1)
    macro_p = sum(m.precision for m in per_class.values()) / len(LABELS)
    macro_r = sum(m.recall for m in per_class.values()) / len(LABELS)
    macro_f = sum(m.f1 for m in per_class.values()) / len(LABELS)
    return EvalReport(per_class, macro_p, macro_r, macro_f, confusion)
