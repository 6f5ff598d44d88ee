"""Classifiers for the hate-speech task: linear SVM, balanced random
forest, and a fastText-style model, plus oversampling, evaluation, and
stratified cross-validation."""

from .base import (
    HATE,
    LABELS,
    NOT_HATE,
    ClassMetrics,
    Dataset,
    EvalReport,
    Example,
    ModelArtifact,
    evaluate,
    featurize_for,
    predict,
    random_oversample,
)
from .crossval import (
    ModelSpec,
    cross_validate,
    grid_search,
    stratified_folds,
    train_model,
)
from .fasttext import train_fasttext
from .forest import train_brf
from .svm import train_svm

__all__ = [
    "HATE", "NOT_HATE", "LABELS",
    "ClassMetrics", "Dataset", "EvalReport", "Example", "ModelArtifact",
    "ModelSpec",
    "evaluate", "featurize_for", "predict", "random_oversample",
    "cross_validate", "grid_search", "stratified_folds", "train_model",
    "train_svm", "train_brf", "train_fasttext",
]
