"""FastText-style classifier: hashed word and character n-grams feed an
embedding bag that is mean-pooled into a linear softmax layer, trained by
SGD with a linearly decaying learning rate.

Deterministic under (seed, fixed visit order): the per-epoch shuffle comes
from the seeded generator and nothing else is stochastic.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import NonFiniteLoss, SingleClass
from ..features import hashed_ngram_ids
from .base import HATE, Dataset, ModelArtifact


def train_fasttext(train: Dataset, dim: int = 100, lr: float = 0.1,
                   epochs: int = 25, word_ngrams: int = 2,
                   char_ngrams: tuple[int, int] | None = (2, 5),
                   buckets: int = 1_000_000, seed: int = 0) -> ModelArtifact:
    counts = train.class_counts()
    if min(counts.values()) == 0:
        raise SingleClass(f"both classes required, got {counts}")

    docs = [np.asarray(hashed_ngram_ids(e.post, word_ngrams, char_ngrams, buckets),
                       dtype=np.int64) for e in train.examples]
    # class index 0 = hate, 1 = not-hate
    ys = np.array([0 if e.label == HATE else 1 for e in train.examples])
    n = len(docs)

    rng = np.random.default_rng(seed)
    emb = rng.uniform(-1.0 / dim, 1.0 / dim, size=(buckets, dim))
    w_out = np.zeros((2, dim))
    b_out = np.zeros(2)

    total_steps = epochs * n
    step = 0
    loss_log: list[float] = []
    for epoch in range(epochs):
        epoch_loss = 0.0
        for i in rng.permutation(n):
            ids = docs[i]
            rate = lr * (1.0 - step / total_steps)
            step += 1
            h = emb[ids].mean(axis=0) if len(ids) else np.zeros(dim)
            z = w_out @ h + b_out
            z -= z.max()
            p = np.exp(z)
            p /= p.sum()
            epoch_loss += -math.log(max(p[ys[i]], 1e-300))
            dz = p.copy()
            dz[ys[i]] -= 1.0
            dh = w_out.T @ dz
            w_out -= rate * np.outer(dz, h)
            b_out -= rate * dz
            if len(ids):
                np.add.at(emb, ids, -rate * dh / len(ids))
        mean_loss = epoch_loss / n
        if not math.isfinite(mean_loss):
            raise NonFiniteLoss(epoch)
        loss_log.append(mean_loss)

    return ModelArtifact(
        model_type="fasttext",
        hyperparameters={"dim": dim, "lr": lr, "epochs": epochs},
        feature_config={"kind": "hashed_ngrams", "word_ngrams": word_ngrams,
                        "char_ngrams": list(char_ngrams) if char_ngrams else None,
                        "buckets": buckets},
        params={
            "embeddings": [[float(v) for v in row] for row in emb],
            "output_weights": [[float(v) for v in row] for row in w_out],
            "output_bias": [float(v) for v in b_out],
        },
        seed=seed,
        training_log={"loss_per_epoch": loss_log},
    )
