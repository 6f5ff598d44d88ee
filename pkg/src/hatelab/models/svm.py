"""Linear SVM trained by stochastic subgradient descent on L2-regularized
hinge loss with the 1/(lambda*t) step schedule, over TF-IDF vectors.

The weight vector is kept as scale * direction so the per-step shrink is
O(1) and only margin violations touch the sparse coordinates. The final
model is the average of the epoch-end iterates, whose objective converges
smoothly where the raw last iterate oscillates.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import NonFiniteLoss, SingleClass
from ..features import FeatureConfig, build_vocab, tfidf_vectorize
from .base import HATE, Dataset, ModelArtifact


def train_svm(train: Dataset, features: FeatureConfig | None = None,
              lambda_: float = 1e-4, epochs: int = 10, seed: int = 0) -> ModelArtifact:
    counts = train.class_counts()
    if min(counts.values()) == 0:
        raise SingleClass(f"both classes required, got {counts}")
    features = features or FeatureConfig()

    vocab = build_vocab((e.post for e in train.examples), features)
    vectors = [tfidf_vectorize(e.post, vocab) for e in train.examples]
    ys = np.array([1.0 if e.label == HATE else -1.0 for e in train.examples])
    n, dim = len(vectors), len(vocab)

    rng = np.random.default_rng(seed)
    direction = np.zeros(dim)
    scale = 1.0
    bias = 0.0
    t = 2  # step counter starts past 1 so the first shrink is not to zero
    # averaged iterate: the epoch-wise mean of the weights is the smoothly
    # converging quantity and becomes the final model
    avg_weights = np.zeros(dim)
    avg_bias = 0.0
    objective_log: list[float] = []

    def objective(w: np.ndarray, b: float) -> float:
        hinge = 0.0
        for vec, y in zip(vectors, ys):
            margin = y * (float(w[vec.indices] @ vec.weights) + b)
            hinge += max(0.0, 1.0 - margin)
        return 0.5 * lambda_ * float(w @ w) + hinge / n

    for epoch in range(epochs):
        for i in rng.permutation(n):
            vec = vectors[i]
            y = ys[i]
            eta = 1.0 / (lambda_ * t)
            margin = y * (scale * float(direction[vec.indices] @ vec.weights) + bias)
            scale *= 1.0 - eta * lambda_
            if scale < 1e-100:  # refold to avoid underflow
                direction *= scale
                scale = 1.0
            if margin < 1.0:
                direction[vec.indices] += (eta * y / scale) * vec.weights
                bias += eta * y
            t += 1
        avg_weights += (scale * direction - avg_weights) / (epoch + 1)
        avg_bias += (bias - avg_bias) / (epoch + 1)
        value = objective(avg_weights, avg_bias)
        if not math.isfinite(value):
            raise NonFiniteLoss(epoch)
        objective_log.append(value)

    weights, bias = avg_weights, avg_bias
    return ModelArtifact(
        model_type="svm",
        hyperparameters={"lambda": lambda_, "epochs": epochs},
        feature_config={"kind": "tfidf_vocab", "vocab": vocab.to_dict()},
        params={"weights": [float(w) for w in weights], "bias": float(bias)},
        seed=seed,
        training_log={"objective_per_epoch": objective_log},
    )
