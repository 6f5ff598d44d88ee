"""Stratified cross-validation and grid search.

Leakage rules: oversampling, vocabulary building, and idf statistics all
happen inside each training fold only; test folds stay untouched and every
example is tested exactly once. Reported metrics pool the out-of-fold
predictions; per-fold breakdowns ride along.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import TooFewMinority
from ..features import FeatureConfig
from .base import Dataset, EvalReport, ModelArtifact, evaluate, predict, random_oversample
from .fasttext import train_fasttext
from .forest import train_brf
from .svm import train_svm


@dataclass(frozen=True)
class ModelSpec:
    model_type: str  # "svm" | "brf" | "fasttext"
    features: FeatureConfig | None = None  # vocab models only
    params: dict = field(default_factory=dict)

    def describe(self) -> dict:
        return {
            "model_type": self.model_type,
            "features": self.features.to_dict() if self.features else None,
            "params": dict(self.params),
        }


def train_model(train: Dataset, spec: ModelSpec, seed: int) -> ModelArtifact:
    if spec.model_type == "svm":
        return train_svm(train, features=spec.features, seed=seed, **spec.params)
    if spec.model_type == "brf":
        return train_brf(train, features=spec.features, seed=seed, **spec.params)
    if spec.model_type == "fasttext":
        return train_fasttext(train, seed=seed, **spec.params)
    raise ValueError(f"unknown model type {spec.model_type!r}")


def stratified_folds(dataset: Dataset, k: int, seed: int) -> list[tuple[list[int], list[int]]]:
    """(train_indices, test_indices) per fold; class proportions are
    preserved within one example per fold."""
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    by_class: dict[str, list[int]] = {}
    for i, e in enumerate(dataset.examples):
        by_class.setdefault(e.label, []).append(i)
    minority = min(len(v) for v in by_class.values())
    if minority < k:
        raise TooFewMinority(f"minority class has {minority} examples, need >= {k}")
    rng = np.random.default_rng(seed)
    fold_of = {}
    for label in sorted(by_class):
        indices = np.array(by_class[label])
        rng.shuffle(indices)
        for pos, idx in enumerate(indices):
            fold_of[int(idx)] = pos % k
    folds = []
    for f in range(k):
        test = [i for i in range(len(dataset.examples)) if fold_of[i] == f]
        train = [i for i in range(len(dataset.examples)) if fold_of[i] != f]
        folds.append((train, test))
    return folds


def _fold_seed(seed: int, fold: int) -> int:
    return (seed * 1_000_003 + fold) % (2 ** 31 - 1)


def cross_validate(dataset: Dataset, spec: ModelSpec, k: int = 5, seed: int = 0,
                   oversample: bool = False) -> EvalReport:
    folds = stratified_folds(dataset, k, seed)
    pooled_pred: dict[str, str] = {}
    pooled_gold: dict[str, str] = {}
    per_fold = []
    for fold_no, (train_idx, test_idx) in enumerate(folds):
        fseed = _fold_seed(seed, fold_no)
        train_ds = Dataset([dataset.examples[i] for i in train_idx])
        if oversample:
            train_ds = random_oversample(train_ds, fseed)
        artifact = train_model(train_ds, spec, fseed)
        fold_pred = {}
        fold_gold = {}
        for i in test_idx:
            example = dataset.examples[i]
            label, _ = predict(artifact, example.post)
            fold_pred[example.post_id] = label
            fold_gold[example.post_id] = example.label
        pooled_pred.update(fold_pred)
        pooled_gold.update(fold_gold)
        fold_report = evaluate(fold_pred, fold_gold)
        per_fold.append({"fold": fold_no, "size": len(test_idx),
                         "macro_f1": fold_report.macro_f1})
    report = evaluate(pooled_pred, pooled_gold)
    report.per_fold = per_fold
    return report


def grid_search(dataset: Dataset, grid: list[ModelSpec], k: int = 5, seed: int = 0,
                oversample: bool = False) -> tuple[ModelSpec, list[dict]]:
    """Evaluate every grid point with cross_validate; best is the maximum
    macro-F1 with ties broken by earliest grid position."""
    if not grid:
        raise ValueError("grid must not be empty")
    table = []
    best_spec = None
    best_f1 = -1.0
    for position, spec in enumerate(grid):
        report = cross_validate(dataset, spec, k=k, seed=seed, oversample=oversample)
        table.append({"position": position, "spec": spec.describe(),
                      "macro_f1": report.macro_f1,
                      "macro_precision": report.macro_precision,
                      "macro_recall": report.macro_recall,
                      "report": report.to_dict()})
        if report.macro_f1 > best_f1:
            best_f1 = report.macro_f1
            best_spec = spec
    return best_spec, table
